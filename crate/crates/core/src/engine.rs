//! Full scheme runs: clustering, start search, stage 1, then the matching
//! stage-2 scheme.
//!
//! * `Pivot`: heads carry a steerable directional antenna and charge their own
//!   members one at a time.
//! * `Trading`: heads are omni-directional; every overcharged node sells to
//!   undercharged neighbours.
//! * `Flat`: no clusters; the charger plans for every node directly and there
//!   is no second stage.

use serde::{Deserialize, Serialize};

use crate::clustering::{cluster_nodes, ClusterSet};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::model::{AntennaPattern, PropagationParams};
use crate::scenario::{NodeId, Scenario};
use crate::stage1::{search_starts, ChargeTask, ChargerConfig, StartSearch};
use crate::stage2::{
    run_stage2_pivot, run_stage2_trading, HeadEnergy, Stage2Config, Stage2Input, Stage2Status,
};
use crate::targets::{table_targets, Targets, DEFAULT_ET_S};
use crate::trace::{SeriesPoint, StepObserver, TrajectoryRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Pivot,
    Trading,
    Flat,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Pivot, SchemeKind::Trading, SchemeKind::Flat];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Pivot => "pivot",
            SchemeKind::Trading => "trading",
            SchemeKind::Flat => "flat",
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pivot" => Ok(SchemeKind::Pivot),
            "trading" => Ok(SchemeKind::Trading),
            "flat" => Ok(SchemeKind::Flat),
            other => Err(Error::invalid(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub targets: Targets,
}

impl SchemeSpec {
    /// Table targets for the network size nearest `n_nodes`.
    pub fn table(kind: SchemeKind, n_nodes: usize) -> Self {
        let (et_p, et_h) = table_targets(n_nodes);
        let head = match kind {
            SchemeKind::Pivot => et_p,
            SchemeKind::Trading => et_h,
            SchemeKind::Flat => DEFAULT_ET_S,
        };
        Self {
            kind,
            targets: Targets::new(DEFAULT_ET_S, head),
        }
    }
}

/// Everything besides the scenario and the scheme that a run depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub prop: PropagationParams,
    pub charger: ChargerConfig,
    pub stage2: Stage2Config,
    /// Transmit pattern of pivot heads.
    pub head_pattern: AntennaPattern,
    pub r_cl: f64,
    pub sample_every: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            prop: PropagationParams::default(),
            charger: ChargerConfig::default(),
            stage2: Stage2Config::default(),
            head_pattern: AntennaPattern::default(),
            r_cl: 10.0,
            sample_every: 100,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.prop.validate()?;
        self.charger.validate()?;
        self.stage2.validate()?;
        self.head_pattern.validate()?;
        if !(self.r_cl >= 0.0 && self.r_cl.is_finite()) {
            return Err(Error::invalid("cluster radius must be non-negative"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scheme: SchemeKind,
    pub targets: Targets,
    pub n_nodes: usize,
    pub clusters: ClusterSet,
    pub best_start: Point,
    pub best_start_head: Option<NodeId>,
    /// Number of starting spots evaluated.
    pub start_runs: usize,
    pub t_stage1: f64,
    pub t_stage2: f64,
    pub t_total: f64,
    pub status: Stage2Status,
    pub unmet: Vec<(NodeId, f64)>,
    /// Whole-run series; stage-2 samples are shifted by `t_stage1`.
    pub series: Vec<SeriesPoint>,
    pub trajectory: Vec<TrajectoryRow>,
    pub head_energy: Vec<HeadEnergy>,
    /// Nodes at or above their role target when stage 1 ends.
    pub stage1_overcharged: usize,
    pub stage1_energies: Vec<f64>,
    pub final_energies: Vec<f64>,
    pub energy_transmitted: f64,
    pub energy_received: f64,
    /// Received over transmitted energy. Not bounded by 1: every node harvests
    /// from the same emission.
    pub efficiency: f64,
}

pub fn run_scheme(scenario: &Scenario, spec: &SchemeSpec, cfg: &SimConfig) -> Result<RunResult> {
    run_scheme_observed(scenario, spec, cfg, None)
}

pub fn run_scheme_observed(
    scenario: &Scenario,
    spec: &SchemeSpec,
    cfg: &SimConfig,
    mut observer: Option<&mut dyn StepObserver>,
) -> Result<RunResult> {
    scenario.validate()?;
    cfg.validate()?;
    if spec.kind == SchemeKind::Flat {
        return run_flat_baseline_observed(scenario, spec.targets.et_s, cfg, observer);
    }

    let clusters = cluster_nodes(scenario, cfg.r_cl);
    let task = ChargeTask::for_heads(scenario, &clusters, &spec.targets);
    let starts: Vec<(NodeId, Point)> = clusters.heads().map(|h| (h, scenario.pos(h))).collect();
    let search = search_starts(
        &task,
        &cfg.charger,
        &cfg.prop,
        &starts,
        cfg.sample_every,
        observer.as_mut().map(|o| &mut **o as &mut dyn StepObserver),
    )?;

    let input = Stage2Input {
        scenario,
        clusters: &clusters,
        energies: &search.result.energies,
        et_s: spec.targets.et_s,
        role_targets: &task.role_targets,
        sample_every: cfg.sample_every,
    };
    let stage2 = match spec.kind {
        SchemeKind::Pivot => {
            run_stage2_pivot(&input, &cfg.stage2, &cfg.prop, &cfg.head_pattern, observer)?
        }
        SchemeKind::Trading => {
            let s2 = Stage2Config {
                seller_threshold: spec.targets.head,
                ..cfg.stage2
            };
            run_stage2_trading(&input, &s2, &cfg.prop, observer)?
        }
        SchemeKind::Flat => unreachable!("handled above"),
    };

    let stage1_overcharged = search
        .result
        .series
        .last()
        .map(|s| s.n_overcharged)
        .unwrap_or(0);
    let t_stage1 = search.result.t_cm;
    let mut series = search.result.series.clone();
    series.extend(
        stage2
            .series
            .iter()
            .filter(|s| s.t > 0.0)
            .map(|s| SeriesPoint {
                t: t_stage1 + s.t,
                ..*s
            }),
    );
    let transmitted = search.result.energy_transmitted + stage2.energy_transmitted;
    let received = search.result.energy_received + stage2.energy_received;
    let StartSearch {
        best_head,
        best_start,
        result: stage1,
        candidates,
    } = search;

    Ok(RunResult {
        scheme: spec.kind,
        targets: spec.targets,
        n_nodes: scenario.len(),
        clusters,
        best_start,
        best_start_head: best_head,
        start_runs: candidates.len(),
        t_stage1,
        t_stage2: stage2.duration,
        t_total: t_stage1 + stage2.duration,
        status: stage2.status,
        unmet: stage2.unmet,
        series,
        trajectory: stage1.trajectory,
        head_energy: stage2.head_energy,
        stage1_overcharged,
        stage1_energies: stage1.energies,
        final_energies: stage2.energies,
        energy_transmitted: transmitted,
        energy_received: received,
        efficiency: ratio(received, transmitted),
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Baseline without clusters: the charger plans for every node and stops once
/// all of them hold `et_s`. It starts at the densest spot, the node whose
/// inclusion circle covers the most nodes.
pub fn run_flat_baseline(scenario: &Scenario, et_s: f64, cfg: &SimConfig) -> Result<RunResult> {
    run_flat_baseline_observed(scenario, et_s, cfg, None)
}

pub fn run_flat_baseline_observed(
    scenario: &Scenario,
    et_s: f64,
    cfg: &SimConfig,
    observer: Option<&mut dyn StepObserver>,
) -> Result<RunResult> {
    scenario.validate()?;
    cfg.validate()?;
    let clusters = cluster_nodes(scenario, cfg.r_cl);
    let first = clusters.clusters[0].head;
    let task = ChargeTask::for_all_nodes(scenario, et_s);
    let search = search_starts(
        &task,
        &cfg.charger,
        &cfg.prop,
        &[(first, scenario.pos(first))],
        cfg.sample_every,
        observer,
    )?;
    let r = search.result;
    let stage1_overcharged = r.series.last().map(|s| s.n_overcharged).unwrap_or(0);
    Ok(RunResult {
        scheme: SchemeKind::Flat,
        targets: Targets::new(et_s, et_s),
        n_nodes: scenario.len(),
        clusters,
        best_start: search.best_start,
        best_start_head: search.best_head,
        start_runs: 1,
        t_stage1: r.t_cm,
        t_stage2: 0.0,
        t_total: r.t_cm,
        status: Stage2Status::Complete,
        unmet: Vec::new(),
        series: r.series,
        trajectory: r.trajectory,
        head_energy: Vec::new(),
        stage1_overcharged,
        final_energies: r.energies.clone(),
        stage1_energies: r.energies,
        energy_transmitted: r.energy_transmitted,
        energy_received: r.energy_received,
        efficiency: ratio(r.energy_received, r.energy_transmitted),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBounds {
    pub low: f64,
    pub high: f64,
    pub tolerance: f64,
}

impl CalibrationBounds {
    pub fn new(low: f64, high: f64) -> Self {
        Self {
            low,
            high,
            tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Smallest completing head target found, or `high` when none completes.
    pub value: f64,
    pub found: bool,
    /// Every probed target and whether the run completed.
    pub probes: Vec<(f64, bool)>,
}

/// Bisects the stage-1 head target for the smallest value whose two-stage run
/// completes, to within `bounds.tolerance`.
pub fn calibrate_target(
    scenario: &Scenario,
    spec: &SchemeSpec,
    cfg: &SimConfig,
    bounds: CalibrationBounds,
) -> Result<Calibration> {
    let CalibrationBounds {
        low,
        high,
        tolerance,
    } = bounds;
    if !(low < high) || !low.is_finite() || !high.is_finite() || !(tolerance > 0.0) {
        return Err(Error::InvalidBounds { low, high });
    }
    if spec.kind == SchemeKind::Flat {
        return Err(Error::invalid("the flat baseline has no head target"));
    }
    let mut probes = Vec::new();
    let mut completes = |target: f64| -> Result<bool> {
        let mut s = *spec;
        s.targets.head = target;
        let ok = run_scheme(scenario, &s, cfg)?.status == Stage2Status::Complete;
        log::debug!("calibration probe {target:.4} J -> complete={ok}");
        probes.push((target, ok));
        Ok(ok)
    };

    if !completes(high)? {
        return Ok(Calibration {
            value: high,
            found: false,
            probes,
        });
    }
    if completes(low)? {
        return Ok(Calibration {
            value: low,
            found: true,
            probes,
        });
    }
    let (mut lo, mut hi) = (low, high);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if completes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Calibration {
        value: hi,
        found: true,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.as_str().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("omni".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn degenerate_bounds_rejected() {
        let s = Scenario::from_points(10.0, &[(1.0, 1.0)]).unwrap();
        let spec = SchemeSpec::table(SchemeKind::Pivot, 1);
        let err = calibrate_target(&s, &spec, &SimConfig::default(), CalibrationBounds::new(2.0, 2.0));
        assert!(matches!(err, Err(Error::InvalidBounds { .. })));
        let flat = SchemeSpec::table(SchemeKind::Flat, 1);
        assert!(calibrate_target(&s, &flat, &SimConfig::default(), CalibrationBounds::new(2.0, 3.0)).is_err());
    }

    #[test]
    fn flat_has_no_second_stage() {
        let s = Scenario::from_points(30.0, &[(5.0, 5.0), (12.0, 9.0), (20.0, 25.0)]).unwrap();
        let r = run_flat_baseline(&s, 2.0, &SimConfig::default()).unwrap();
        assert_eq!(r.t_stage2, 0.0);
        assert_eq!(r.t_total, r.t_stage1);
        assert_eq!(r.status, Stage2Status::Complete);
        assert!(r.final_energies.iter().all(|&e| e >= 2.0));
    }

    #[test]
    fn flat_single_node_matches_single_head_stage1() {
        let s = Scenario::from_points(10.0, &[(4.0, 6.0)]).unwrap();
        let cfg = SimConfig::default();
        let flat = run_flat_baseline(&s, 2.0, &cfg).unwrap();
        let cs = cluster_nodes(&s, cfg.r_cl);
        let st = crate::stage1::run_stage1(&s, &cs, s.pos(0), &cfg.charger, &cfg.prop, &Targets::new(2.0, 2.0)).unwrap();
        assert_eq!(flat.t_stage1, st.t_cm);
        assert_eq!(flat.trajectory, st.trajectory);
    }
}
