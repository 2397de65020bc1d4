use std::path::Path;
use std::process::{Command, Output};

use wrsn_core::{calibrate_target, CalibrationBounds, Scenario, SchemeKind, SchemeSpec, SimConfig};

fn wrsn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wrsn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("sub/b.json");
    for out in [&a, &b] {
        let o = wrsn(&["gen", "--n", "100", "--seed", "1", "--out", path(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_keeps_nodes_inside_the_area() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    wrsn(&["gen", "--n", "200", "--area", "100", "--seed", "3", "--out", path(&out)]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let nodes = v["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 200);
    for n in nodes {
        for k in ["x", "y"] {
            let c = n[k].as_f64().unwrap();
            assert!((0.0..=100.0).contains(&c));
        }
    }
}

#[test]
fn gen_rejects_empty_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = wrsn(&["gen", "--n", "0", "--out", path(&dir.path().join("s.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty scenario"));
}

fn small_scenario(dir: &Path) -> std::path::PathBuf {
    let s = dir.join("s.json");
    let o = wrsn(&["gen", "--n", "25", "--area", "50", "--seed", "3", "--out", path(&s)]);
    assert_eq!(o.status.code(), Some(0));
    s
}

#[test]
fn completed_run_writes_four_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[targets]\net_p = 25.0\n").unwrap();
    let out = dir.path().join("run");
    let o = wrsn(&["run", "--scenario", path(&s), "--scheme", "pivot", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["heads.csv", "series.csv", "summary.json", "trajectory.csv"]);
    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(series.starts_with("run_id,t_s,n_at_target,n_overcharged,stage\npivot-n25-s3,"));
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t_s,x_m,y_m,bearing_rad,action\n"));
    let heads = std::fs::read_to_string(out.join("heads.csv")).unwrap();
    assert!(heads.starts_with("head_id,e_before_j,e_after_j\n"));
}

#[test]
fn undersized_target_stalls_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let s_path = small_scenario(dir.path());
    let s = Scenario::load(&s_path).unwrap();
    let spec = SchemeSpec::table(SchemeKind::Pivot, s.len());
    let c = calibrate_target(&s, &spec, &SimConfig::default(), CalibrationBounds::new(1.0, 30.0)).unwrap();
    assert!(c.found);
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, format!("[targets]\net_p = {}\n", c.value - 1.0)).unwrap();
    let out = dir.path().join("run");
    let o = wrsn(&["run", "--scenario", path(&s_path), "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["status"], "stalled");
    assert!(!v["unmet"].as_array().unwrap().is_empty());
}

#[test]
fn missing_scenario_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wrsn(&["run", "--scenario", path(&dir.path().join("nope.json")), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.json"));
}

#[test]
fn bad_usage_and_config_exit_one() {
    assert_eq!(wrsn(&["run", "--scheme", "omni"]).status.code(), Some(1));
    assert_eq!(wrsn(&["frobnicate"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let s = small_scenario(dir.path());
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[charger]\nwarp = 9\n").unwrap();
    let o = wrsn(&["run", "--scenario", path(&s), "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("warp"));
}

#[test]
fn help_lists_flags_and_defaults() {
    let gen = stdout(&wrsn(&["gen", "--help"]));
    for s in ["--n", "[default: 100]", "--area", "--seed", "[default: 1]", "--out"] {
        assert!(gen.contains(s), "gen help lacks {s}:\n{gen}");
    }
    let run = stdout(&wrsn(&["run", "--help"]));
    for s in ["--scenario", "--scheme", "[default: pivot]", "--config", "--out", "--sample-every", "else 100"] {
        assert!(run.contains(s), "run help lacks {s}:\n{run}");
    }
    let sweep = stdout(&wrsn(&["sweep", "--help"]));
    for s in ["--n", "[default: 100,150,200]", "--seeds", "[default: 1..10]", "--scheme", "[default: pivot,trading,flat]", "--area", "--config", "--out", "--jobs", "--sample-every", "--per-run"] {
        assert!(sweep.contains(s), "sweep help lacks {s}:\n{sweep}");
    }
    let report = wrsn(&["report", "--help"]);
    assert_eq!(report.status.code(), Some(0));
    assert!(stdout(&report).contains("--out"));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn sweep_is_independent_of_jobs_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let o = wrsn(&[
            "sweep", "--n", "20,30", "--seeds", "1..2", "--area", "45", "--jobs", jobs, "--per-run", "--out", path(out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let files = read_all(&a);
    assert_eq!(files, read_all(&b));
    assert_eq!(files.len(), 12 * 4 + 2);
    let csv = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);

    let rep = dir.path().join("rep");
    let o = wrsn(&["report", path(&a), "--out", path(&rep)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(rep.join("summary.csv")).unwrap(), csv.as_bytes());
    assert_eq!(
        std::fs::read(rep.join("summary.json")).unwrap(),
        std::fs::read(a.join("summary.json")).unwrap()
    );
}

#[test]
fn sweep_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--n", "20", "--seeds", "1,2", "--scheme", "pivot,flat", "--area", "40", "--out", path(dir.path())];
    assert_eq!(wrsn(&args).status.code(), Some(0));
    std::fs::remove_dir_all(dir.path().join("runs/flat-n20-s2")).unwrap();
    let o = wrsn(&args);
    assert!(stdout(&o).contains("(1 executed, 3 resumed)"), "{}", stdout(&o));
}

#[test]
fn single_cell_sweep_matches_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    wrsn(&["gen", "--n", "30", "--area", "45", "--seed", "2", "--out", path(&s)]);
    let run_out = dir.path().join("run");
    wrsn(&["run", "--scenario", path(&s), "--scheme", "trading", "--out", path(&run_out)]);
    let sweep_out = dir.path().join("sweep");
    wrsn(&["sweep", "--n", "30", "--seeds", "2", "--scheme", "trading", "--area", "45", "--out", path(&sweep_out)]);
    assert_eq!(
        std::fs::read(run_out.join("summary.json")).unwrap(),
        std::fs::read(sweep_out.join("runs/trading-n30-s2/summary.json")).unwrap()
    );
}
