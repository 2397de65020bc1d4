//! Run artifacts on disk.
//!
//! Every file is written to a temporary sibling first and renamed into place,
//! so readers never see a half-written artifact.
//!
//! | file             | columns                                        |
//! |------------------|------------------------------------------------|
//! | `series.csv`     | `run_id,t_s,n_at_target,n_overcharged,stage`   |
//! | `trajectory.csv` | `t_s,x_m,y_m,bearing_rad,action`               |
//! | `heads.csv`      | `head_id,e_before_j,e_after_j`                 |
//! | `summary.json`   | [`RunSummary`]                                 |

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{RunResult, SchemeKind};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scenario::NodeId;
use crate::stage2::{HeadEnergy, Stage2Status};
use crate::targets::Targets;
use crate::trace::{SeriesPoint, TrajectoryRow};

pub const SERIES_FILE: &str = "series.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const HEADS_FILE: &str = "heads.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Writes `bytes` to `path` through a temporary file and a rename. Parent
/// directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Compact, serializable digest of a [`RunResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub scheme: SchemeKind,
    pub n_nodes: usize,
    pub seed: u64,
    pub targets: Targets,
    pub status: Stage2Status,
    pub t_stage1_s: f64,
    pub t_stage2_s: f64,
    pub t_total_s: f64,
    pub n_clusters: usize,
    pub best_start: Point,
    pub best_start_head: Option<NodeId>,
    pub start_runs: usize,
    pub stage1_overcharged: usize,
    pub energy_transmitted_j: f64,
    pub energy_received_j: f64,
    pub efficiency: f64,
    pub unmet: Vec<Unmet>,
    pub head_energy: Vec<HeadEnergy>,
    pub clusters: Vec<ClusterEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unmet {
    pub node: NodeId,
    pub deficit_j: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub head: NodeId,
    pub members: Vec<NodeId>,
}

impl RunSummary {
    pub fn new(run_id: &str, seed: u64, r: &RunResult) -> Self {
        Self {
            run_id: run_id.to_owned(),
            scheme: r.scheme,
            n_nodes: r.n_nodes,
            seed,
            targets: r.targets,
            status: r.status,
            t_stage1_s: r.t_stage1,
            t_stage2_s: r.t_stage2,
            t_total_s: r.t_total,
            n_clusters: r.clusters.len(),
            best_start: r.best_start,
            best_start_head: r.best_start_head,
            start_runs: r.start_runs,
            stage1_overcharged: r.stage1_overcharged,
            energy_transmitted_j: r.energy_transmitted,
            energy_received_j: r.energy_received,
            efficiency: r.efficiency,
            unmet: r
                .unmet
                .iter()
                .map(|&(node, deficit_j)| Unmet { node, deficit_j })
                .collect(),
            head_energy: r.head_energy.clone(),
            clusters: r
                .clusters
                .clusters
                .iter()
                .map(|c| ClusterEntry {
                    head: c.head,
                    members: c.members.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn csv_bytes(f: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    f(&mut w)?;
    w.into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
}

pub fn series_csv(run_id: &str, series: &[SeriesPoint]) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        w.write_record(["run_id", "t_s", "n_at_target", "n_overcharged", "stage"])?;
        for p in series {
            w.write_record([
                run_id,
                &p.t.to_string(),
                &p.n_at_target.to_string(),
                &p.n_overcharged.to_string(),
                p.stage.as_str(),
            ])?;
        }
        Ok(())
    })
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        w.write_record(["t_s", "x_m", "y_m", "bearing_rad", "action"])?;
        for r in rows {
            w.write_record([
                &r.t.to_string(),
                &r.pos.x.to_string(),
                &r.pos.y.to_string(),
                &r.bearing.to_string(),
                r.action.as_str(),
            ])?;
        }
        Ok(())
    })
}

pub fn heads_csv(heads: &[HeadEnergy]) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        w.write_record(["head_id", "e_before_j", "e_after_j"])?;
        for h in heads {
            w.write_record([
                &h.head.to_string(),
                &h.before.to_string(),
                &h.after.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Writes all four artifacts of a run into `dir`. The summary goes last, so
/// its presence marks a finished run.
pub fn write_run(dir: &Path, summary: &RunSummary, r: &RunResult) -> Result<Vec<PathBuf>> {
    let files = [
        (SERIES_FILE, series_csv(&summary.run_id, &r.series)?),
        (TRAJECTORY_FILE, trajectory_csv(&r.trajectory)?),
        (HEADS_FILE, heads_csv(&r.head_energy)?),
        (SUMMARY_FILE, summary.to_json().into_bytes()),
    ];
    let mut out = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        out.push(path);
    }
    Ok(out)
}
