use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use wrsn_core::artifacts::{self, RunSummary, SUMMARY_FILE};
use wrsn_core::config::RunConfig;
use wrsn_core::metrics::{summarize, summary_csv, summary_json, SummaryRow};
use wrsn_core::sweep::{run_and_write, run_id, run_sweep, SweepPlan};
use wrsn_core::{Scenario, SchemeKind, Stage2Status};

/// Two-stage RF charging simulator for wireless rechargeable sensor networks.
#[derive(Parser, Debug)]
#[command(name = "wrsn", version)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random scenario file.
    Gen(GenArgs),
    /// Run one scheme on a scenario file.
    Run(RunArgs),
    /// Run every combination of sizes, seeds and schemes.
    Sweep(SweepArgs),
    /// Rebuild the summary tables from finished run directories.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Number of nodes.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Side of the square area, meters.
    #[arg(long, default_value_t = 100.0)]
    area: f64,
    /// Placement seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output scenario file.
    #[arg(long, default_value = "scenario.json")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario file written by `gen`.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = Scheme::Pivot)]
    scheme: Scheme,
    /// TOML run configuration; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the run artifacts [default: output.out_dir from the config, else "out"].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Series sampling interval in steps [default: output.sample_every from the config, else 100].
    #[arg(long)]
    sample_every: Option<u64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Network sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100,150,200")]
    n: Vec<usize>,
    /// Seeds, comma separated; `a..b` is an inclusive range.
    #[arg(long, default_value = "1..10")]
    seeds: String,
    /// Schemes, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "pivot,trading,flat")]
    scheme: Vec<Scheme>,
    /// Side of the square area, meters.
    #[arg(long, default_value_t = 100.0)]
    area: f64,
    /// TOML run configuration; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: output.out_dir from the config, else "sweep"].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Series sampling interval in steps [default: output.sample_every from the config, else 100].
    #[arg(long)]
    sample_every: Option<u64>,
    /// Also write series, trajectory and head CSVs for every run.
    #[arg(long)]
    per_run: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Sweep or run directory to scan for run summaries.
    input: PathBuf,
    /// Where to write summary.csv and summary.json [default: the input directory].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Scheme {
    Pivot,
    Trading,
    Flat,
}

impl From<Scheme> for SchemeKind {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Pivot => SchemeKind::Pivot,
            Scheme::Trading => SchemeKind::Trading,
            Scheme::Flat => SchemeKind::Flat,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        SchemeKind::from(*self).fmt(f)
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.parse().with_context(|| format!("bad seed range `{part}`"))?;
            let b: u64 = b.parse().with_context(|| format!("bad seed range `{part}`"))?;
            if a > b {
                bail!("empty seed range `{part}`");
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(part.parse().with_context(|| format!("bad seed `{part}`"))?);
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn load_config(path: Option<&Path>, sample_every: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(k) = sample_every {
        cfg.output.sample_every = k;
    }
    Ok(cfg)
}

fn cmd_gen(a: &GenArgs) -> Result<ExitCode> {
    let s = Scenario::generate(a.n, a.area, a.seed)?;
    s.save(&a.out)?;
    println!("wrote {} nodes to {}", s.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(a: &RunArgs) -> Result<ExitCode> {
    let scenario = Scenario::load(&a.scenario)?;
    let rc = load_config(a.config.as_deref(), a.sample_every)?;
    let cfg = rc.sim_config()?;
    let kind = SchemeKind::from(a.scheme);
    let spec = rc.scheme_spec(kind, scenario.len());
    let out = a
        .out
        .clone()
        .or_else(|| rc.output.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let id = run_id(kind, scenario.len(), scenario.seed);
    let (summary, _) = run_and_write(&scenario, &spec, &cfg, &id, &out, true)?;
    println!(
        "{id}: {:?}, stage 1 {:.4} s, stage 2 {:.4} s, total {:.4} s",
        summary.status, summary.t_stage1_s, summary.t_stage2_s, summary.t_total_s
    );
    if !summary.unmet.is_empty() {
        println!("{} nodes left below the service target", summary.unmet.len());
    }
    Ok(match summary.status {
        Stage2Status::Complete => ExitCode::SUCCESS,
        Stage2Status::Stalled => ExitCode::from(2),
    })
}

fn cmd_sweep(a: &SweepArgs) -> Result<ExitCode> {
    let config = load_config(a.config.as_deref(), a.sample_every)?;
    let out_dir = a
        .out
        .clone()
        .or_else(|| config.output.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("sweep"));
    let plan = SweepPlan {
        sizes: a.n.clone(),
        seeds: parse_seeds(&a.seeds)?,
        schemes: a.scheme.iter().map(|&s| s.into()).collect(),
        area_side: a.area,
        config,
        out_dir,
        per_run_artifacts: a.per_run,
        jobs: a.jobs,
    };
    let outcome = run_sweep(&plan)?;
    println!(
        "{} runs ({} executed, {} resumed) -> {}",
        outcome.records.len(),
        outcome.executed,
        outcome.resumed,
        plan.out_dir.display()
    );
    print_rows(&outcome.rows);
    Ok(ExitCode::SUCCESS)
}

fn find_summaries(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_summaries(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == SUMMARY_FILE) {
            out.push(p);
        }
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<ExitCode> {
    let mut paths = Vec::new();
    find_summaries(&a.input, &mut paths)?;
    // a sweep directory keeps its aggregate table next to `runs/`
    if a.input.join("runs").is_dir() {
        let aggregate = a.input.join(SUMMARY_FILE);
        paths.retain(|p| *p != aggregate);
    }
    let records: Vec<RunSummary> = paths
        .iter()
        .map(|p| RunSummary::load(p))
        .collect::<wrsn_core::Result<_>>()?;
    if records.is_empty() {
        bail!("no run summaries under {}", a.input.display());
    }
    let rows = summarize(&records, None)?;
    let out = a.out.as_ref().unwrap_or(&a.input);
    artifacts::write_atomic(&out.join("summary.csv"), &summary_csv(&rows)?)?;
    artifacts::write_atomic(&out.join("summary.json"), summary_json(&rows).as_bytes())?;
    println!("{} runs summarized into {}", records.len(), out.display());
    print_rows(&rows);
    Ok(ExitCode::SUCCESS)
}

fn print_rows(rows: &[SummaryRow]) {
    println!(
        "{:<8} {:>5} {:>5} {:>12} {:>12} {:>12} {:>9} {:>10}",
        "scheme", "n", "runs", "mean_t_s", "min_t_s", "max_t_s", "complete", "s1_over"
    );
    for r in rows {
        println!(
            "{:<8} {:>5} {:>5} {:>12.4} {:>12.4} {:>12.4} {:>9.2} {:>10.1}",
            r.scheme.as_str(),
            r.n_nodes,
            r.runs,
            r.t_total_mean_s,
            r.t_total_min_s,
            r.t_total_max_s,
            r.completion_rate,
            r.stage1_overcharged_mean
        );
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
