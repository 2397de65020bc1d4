//! Experiment grids: every (N_T, seed, scheme) cell is an independent job.
//!
//! Layout under the output directory:
//!
//! ```text
//! summary.csv, summary.json      per-(scheme, N_T) rows
//! runs/<run_id>/summary.json     per-run digest, always written
//! runs/<run_id>/*.csv            series, trajectory, heads (optional)
//! ```
//!
//! A cell whose `summary.json` already exists is loaded instead of re-run, so
//! an interrupted sweep can be restarted with the same arguments.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::artifacts::{self, write_atomic, RunSummary, SUMMARY_FILE};
use crate::config::RunConfig;
use crate::engine::{run_scheme, RunResult, SchemeKind, SchemeSpec, SimConfig};
use crate::error::{Error, Result};
use crate::metrics::{summarize, summary_csv, summary_json, SummaryRow};
use crate::scenario::Scenario;

pub fn run_id(scheme: SchemeKind, n_nodes: usize, seed: u64) -> String {
    format!("{scheme}-n{n_nodes}-s{seed}")
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub schemes: Vec<SchemeKind>,
    pub area_side: f64,
    pub config: RunConfig,
    pub out_dir: PathBuf,
    /// Also write series, trajectory and head CSVs for every run.
    pub per_run_artifacts: bool,
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub n_nodes: usize,
    pub seed: u64,
    pub scheme: SchemeKind,
}

impl SweepPlan {
    /// Cells in (size, seed, scheme) order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n_nodes in &self.sizes {
            for &seed in &self.seeds {
                for &scheme in &self.schemes {
                    out.push(Cell {
                        n_nodes,
                        seed,
                        scheme,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// One record per cell, in cell order.
    pub records: Vec<RunSummary>,
    pub rows: Vec<SummaryRow>,
    pub executed: usize,
    pub resumed: usize,
}

/// Runs one scheme and writes its artifacts into `dir`.
pub fn run_and_write(
    scenario: &Scenario,
    spec: &SchemeSpec,
    cfg: &SimConfig,
    run_id: &str,
    dir: &Path,
    all_artifacts: bool,
) -> Result<(RunSummary, RunResult)> {
    let result = run_scheme(scenario, spec, cfg)?;
    let summary = RunSummary::new(run_id, scenario.seed, &result);
    if all_artifacts {
        artifacts::write_run(dir, &summary, &result)?;
    } else {
        write_atomic(&dir.join(SUMMARY_FILE), summary.to_json().as_bytes())?;
    }
    Ok((summary, result))
}

pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutcome> {
    if plan.sizes.is_empty() || plan.seeds.is_empty() || plan.schemes.is_empty() {
        return Err(Error::invalid("sweep needs at least one size, seed and scheme"));
    }
    let cfg = plan.config.sim_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let cells = plan.cells();
    let runs_dir = plan.out_dir.join("runs");

    let done: Vec<Result<(RunSummary, bool)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let id = run_id(cell.scheme, cell.n_nodes, cell.seed);
                let dir = runs_dir.join(&id);
                let existing = dir.join(SUMMARY_FILE);
                if existing.is_file() {
                    log::info!("{id}: already done");
                    return Ok((RunSummary::load(&existing)?, true));
                }
                let scenario = Scenario::generate(cell.n_nodes, plan.area_side, cell.seed)?;
                let spec = plan.config.scheme_spec(cell.scheme, cell.n_nodes);
                let (summary, _) =
                    run_and_write(&scenario, &spec, &cfg, &id, &dir, plan.per_run_artifacts)?;
                log::info!(
                    "{id}: {:?} in {:.3} s simulated",
                    summary.status,
                    summary.t_total_s
                );
                Ok((summary, false))
            })
            .collect()
    });

    let mut records = Vec::with_capacity(done.len());
    let mut resumed = 0;
    for r in done {
        let (s, was_done) = r?;
        resumed += usize::from(was_done);
        records.push(s);
    }
    let rows = summarize(&records, None)?;
    write_atomic(&plan.out_dir.join("summary.csv"), &summary_csv(&rows)?)?;
    write_atomic(&plan.out_dir.join("summary.json"), summary_json(&rows).as_bytes())?;
    Ok(SweepOutcome {
        executed: records.len() - resumed,
        resumed,
        records,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_product_in_order() {
        let plan = SweepPlan {
            sizes: vec![100, 150, 200],
            seeds: (1..=5).collect(),
            schemes: SchemeKind::ALL.to_vec(),
            area_side: 100.0,
            config: RunConfig::default(),
            out_dir: PathBuf::new(),
            per_run_artifacts: false,
            jobs: 1,
        };
        let cells = plan.cells();
        assert_eq!(cells.len(), 45);
        assert_eq!(
            cells[0],
            Cell {
                n_nodes: 100,
                seed: 1,
                scheme: SchemeKind::Pivot
            }
        );
        assert_eq!(cells[44].scheme, SchemeKind::Flat);
        assert_eq!(run_id(SchemeKind::Trading, 150, 3), "trading-n150-s3");
    }
}
