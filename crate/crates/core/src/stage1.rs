//! Mobile-charger stage: a greedy sector rule steers the charger in fixed time
//! steps until every head holds its stage-1 target.
//!
//! Each step the charger considers, for every undercharged head, moving one
//! step towards it or staying put, in both cases aiming its beam at that head.
//! A candidate is scored by the power its beam delivers to the undercharged
//! heads lying inside the sector of half-angle `sector_half_angle` around the
//! beam, evaluated at the position the charger would occupy. The best
//! candidate wins; ties prefer staying, then the smallest bearing.
//!
//! The whole run is repeated from every head location and the fastest start
//! is kept.

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSet;
use crate::error::{Error, Result};
use crate::geometry::{angle_between, normalize_angle, Point};
use crate::model::{directive_gain, AntennaPattern, Beam, Emitter, PropagationParams};
use crate::scenario::{NodeId, Scenario};
use crate::targets::Targets;
use crate::trace::{
    count_progress, Emission, SeriesPoint, Source, Stage, StepObserver, StepView, TrajectoryAction,
    TrajectoryRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargerConfig {
    /// Step duration, seconds.
    pub dt: f64,
    /// Distance covered by one Move step, meters.
    pub step_len: f64,
    /// Half of the sector's interior angle, radians.
    pub sector_half_angle: f64,
    pub pattern: AntennaPattern,
    /// Power drained by the charger while transmitting, watts.
    pub tx_power: f64,
    pub step_budget: u64,
    /// Abandon a candidate start as soon as it is slower than the best so far.
    pub prune_starts: bool,
}

impl Default for ChargerConfig {
    fn default() -> Self {
        Self {
            dt: 0.0025,
            step_len: 0.05,
            sector_half_angle: 22f64.to_radians(),
            pattern: AntennaPattern::default(),
            tx_power: 2.0,
            step_budget: 100_000_000,
            prune_starts: true,
        }
    }
}

impl ChargerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("charger dt must be positive"));
        }
        if !(self.step_len >= 0.0 && self.step_len.is_finite()) {
            return Err(Error::invalid("charger step length must be non-negative"));
        }
        if !(self.sector_half_angle >= 0.0) {
            return Err(Error::invalid("sector half-angle must be non-negative"));
        }
        self.pattern.validate()
    }

    /// Travel speed while moving, m/s.
    pub fn speed(&self) -> f64 {
        self.step_len / self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargerState {
    pub pos: Point,
    pub boresight: f64,
    pub elapsed: f64,
}

impl ChargerState {
    pub fn at(pos: Point) -> Self {
        Self {
            pos,
            boresight: 0.0,
            elapsed: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    Stay,
    Move,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    /// Beam bearing, and travel bearing for `Move`, in (-pi, pi].
    pub direction: f64,
}

/// Stay and Move towards each distinct bearing of an undercharged head.
///
/// Ordered Stay before Move, then by ascending bearing; that is also the
/// tie-break order used by [`plan_step`].
pub fn candidate_actions(state: &ChargerState, heads: &[(NodeId, Point)]) -> Result<Vec<Action>> {
    let dirs = distinct_bearings(state.pos, heads)?;
    let mut out = Vec::with_capacity(2 * dirs.len());
    for kind in [ActionKind::Stay, ActionKind::Move] {
        out.extend(dirs.iter().map(|&direction| Action { kind, direction }));
    }
    Ok(out)
}

fn distinct_bearings(from: Point, heads: &[(NodeId, Point)]) -> Result<Vec<f64>> {
    if heads.is_empty() {
        return Err(Error::NoUnderchargedHeads);
    }
    let mut dirs: Vec<f64> = heads
        .iter()
        .map(|&(_, p)| normalize_angle(from.bearing_to(p)))
        .collect();
    dirs.sort_by(f64::total_cmp);
    dirs.dedup();
    Ok(dirs)
}

/// Power the beam aimed along `direction` from `eval_pos` delivers to the
/// heads inside the sector; heads outside contribute nothing.
pub fn sector_power(
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    eval_pos: Point,
    direction: f64,
    heads: &[(NodeId, Point)],
) -> f64 {
    heads
        .iter()
        .map(|&(_, p)| {
            let phi = angle_between(direction, eval_pos.bearing_to(p));
            if phi.abs() <= cfg.sector_half_angle {
                directive_gain(&cfg.pattern, phi) * prop.path_power(eval_pos.distance(p))
            } else {
                0.0
            }
        })
        .sum()
}

/// Same value as [`sector_power`], skipping trigonometry for heads that are
/// clearly outside the sector.
fn sector_power_pruned(
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    outside_cos: Option<f64>,
    eval_pos: Point,
    direction: f64,
    heads: &[(NodeId, Point)],
) -> f64 {
    let (uy, ux) = direction.sin_cos();
    heads
        .iter()
        .map(|&(_, p)| {
            let (dx, dy) = (p.x - eval_pos.x, p.y - eval_pos.y);
            let d = (dx * dx + dy * dy).sqrt();
            if let Some(c) = outside_cos {
                if d > 0.0 && ux * dx + uy * dy < c * d {
                    return 0.0;
                }
            }
            let phi = angle_between(direction, eval_pos.bearing_to(p));
            if phi.abs() <= cfg.sector_half_angle {
                directive_gain(&cfg.pattern, phi) * prop.path_power(d)
            } else {
                0.0
            }
        })
        .sum()
}

/// Greedy choice of the next action.
pub fn plan_step(
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    state: &ChargerState,
    heads: &[(NodeId, Point)],
) -> Result<Action> {
    let dirs = distinct_bearings(state.pos, heads)?;
    let edge = cfg.sector_half_angle + 1e-7;
    let outside_cos = (edge < std::f64::consts::PI).then(|| edge.cos());

    // Stay candidates share one evaluation point.
    let here: Vec<(f64, f64)> = heads
        .iter()
        .map(|&(_, p)| (state.pos.bearing_to(p), prop.path_power(state.pos.distance(p))))
        .collect();

    let mut best = Action {
        kind: ActionKind::Stay,
        direction: dirs[0],
    };
    let mut best_power = f64::NEG_INFINITY;
    for &dir in &dirs {
        let power: f64 = here
            .iter()
            .map(|&(bearing, base)| {
                let phi = angle_between(dir, bearing);
                if phi.abs() <= cfg.sector_half_angle {
                    directive_gain(&cfg.pattern, phi) * base
                } else {
                    0.0
                }
            })
            .sum();
        if power > best_power {
            best_power = power;
            best = Action {
                kind: ActionKind::Stay,
                direction: dir,
            };
        }
    }
    for &dir in &dirs {
        let eval = state.pos.advanced(dir, cfg.step_len);
        let power = sector_power_pruned(cfg, prop, outside_cos, eval, dir, heads);
        if power > best_power {
            best_power = power;
            best = Action {
                kind: ActionKind::Move,
                direction: dir,
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Result {
    /// Charging time until every head reached its target, seconds.
    pub t_cm: f64,
    pub steps: u64,
    pub start: Point,
    pub final_state: ChargerState,
    /// Energy of every node at the end of the stage.
    pub energies: Vec<f64>,
    pub trajectory: Vec<TrajectoryRow>,
    pub series: Vec<SeriesPoint>,
    pub move_steps: u64,
    /// Moves refused because they would have left the area.
    pub clamped_moves: u64,
    /// Energy radiated by the charger, joules.
    pub energy_transmitted: f64,
    /// Energy harvested by all nodes, joules.
    pub energy_received: f64,
}

/// What the charger is asked to do.
#[derive(Debug, Clone)]
pub(crate) struct ChargeTask {
    pub positions: Vec<Point>,
    pub area_side: f64,
    /// Nodes the planner steers for, with their stage-1 targets.
    pub goals: Vec<(NodeId, f64)>,
    pub role_targets: Vec<f64>,
    pub et_s: f64,
}

impl ChargeTask {
    pub fn for_heads(scenario: &Scenario, clusters: &ClusterSet, targets: &Targets) -> Self {
        Self {
            positions: scenario.positions(),
            area_side: scenario.area_side,
            goals: targets.stage1_goals(clusters),
            role_targets: targets.role_targets(clusters, scenario.len()),
            et_s: targets.et_s,
        }
    }

    /// Every node is a goal with the service target.
    pub fn for_all_nodes(scenario: &Scenario, et_s: f64) -> Self {
        Self {
            positions: scenario.positions(),
            area_side: scenario.area_side,
            goals: (0..scenario.len()).map(|i| (i, et_s)).collect(),
            role_targets: vec![et_s; scenario.len()],
            et_s,
        }
    }
}

#[derive(Default)]
pub(crate) struct DriveOptions<'o> {
    /// Track every node, the trajectory and the series; otherwise only goals.
    pub record: bool,
    pub sample_every: u64,
    /// Give up (returning `None`) once more than this many steps are needed.
    pub step_cap: Option<u64>,
    pub observer: Option<&'o mut dyn StepObserver>,
}

/// Runs the charger from `start`. Returns `None` only when `step_cap` was hit.
pub(crate) fn drive(
    task: &ChargeTask,
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    start: Point,
    mut opts: DriveOptions<'_>,
) -> Result<Option<Stage1Result>> {
    let n = task.positions.len();
    let record = opts.record || opts.observer.is_some();
    let sample_every = opts.sample_every.max(1);
    // nodes whose energy is integrated
    let tracked: Vec<NodeId> = if record {
        (0..n).collect()
    } else {
        task.goals.iter().map(|&(id, _)| id).collect()
    };
    let mut energy = vec![0.0; n];
    let mut before = if opts.observer.is_some() {
        vec![0.0; n]
    } else {
        Vec::new()
    };
    let receivers = vec![true; n];

    let mut pending: Vec<(NodeId, f64)> = task
        .goals
        .iter()
        .copied()
        .filter(|&(id, t)| energy[id] < t)
        .collect();
    let mut heads: Vec<(NodeId, Point)> =
        pending.iter().map(|&(id, _)| (id, task.positions[id])).collect();

    let mut state = ChargerState::at(start);
    let mut trajectory = Vec::new();
    let mut series = Vec::new();
    let mut step: u64 = 0;
    let mut move_steps = 0;
    let mut clamped = 0;
    let mut received = 0.0;
    // per tracked node gain for the cached action
    let mut plan: Option<(Action, Emitter, Vec<f64>)> = None;

    if record {
        let (at, over) = count_progress(&energy, &task.role_targets, task.et_s);
        series.push(SeriesPoint {
            t: 0.0,
            n_at_target: at,
            n_overcharged: over,
            stage: Stage::Stage1,
        });
    }

    while !pending.is_empty() {
        if opts.step_cap.is_some_and(|cap| step >= cap) {
            return Ok(None);
        }
        if step >= cfg.step_budget {
            let worst = pending
                .iter()
                .map(|&(id, t)| t - energy[id])
                .fold(0.0, f64::max);
            return Err(Error::StepBudgetExceeded {
                budget: cfg.step_budget,
                remaining: pending.len(),
                total: task.goals.len(),
                worst_deficit: worst,
            });
        }
        if plan.is_none() {
            let action = plan_step(cfg, prop, &state, &heads)?;
            let beam = Beam::Directional {
                pattern: cfg.pattern,
                boresight: action.direction,
            };
            let emitter = Emitter::new(state.pos, &beam);
            let gains = tracked
                .iter()
                .map(|&id| emitter.power_to(prop, task.positions[id]) * cfg.dt)
                .collect();
            plan = Some((action, emitter, gains));
        }
        let (action, emitter, gains) = plan.as_ref().expect("plan computed above");
        let (action, emitter) = (*action, *emitter);

        if opts.observer.is_some() {
            before.copy_from_slice(&energy);
        }
        for (&id, &g) in tracked.iter().zip(gains) {
            energy[id] += g;
        }
        if record {
            received += gains.iter().sum::<f64>();
        }

        let t = step as f64 * cfg.dt;
        if let Some(obs) = opts.observer.as_deref_mut() {
            let emissions = [Emission {
                source: Source::Charger,
                pos: emitter.pos,
                beam: Beam::Directional {
                    pattern: cfg.pattern,
                    boresight: action.direction,
                },
                active_s: cfg.dt,
            }];
            obs.on_step(&StepView {
                stage: Stage::Stage1,
                index: step,
                t,
                dt: cfg.dt,
                emissions: &emissions,
                receivers: &receivers,
                gains,
                energy_before: &before,
                energy_after: &energy,
            });
        }

        let mut executed = TrajectoryAction::Stay;
        if action.kind == ActionKind::Move {
            let next = state.pos.advanced(action.direction, cfg.step_len);
            if next.in_square(task.area_side) {
                executed = TrajectoryAction::Move;
                move_steps += 1;
            } else {
                clamped += 1;
                log::debug!(
                    "charger move to ({:.3}, {:.3}) leaves the area; staying",
                    next.x,
                    next.y
                );
            }
            if record {
                trajectory.push(TrajectoryRow {
                    t,
                    pos: state.pos,
                    bearing: action.direction,
                    action: executed,
                });
            }
            if executed == TrajectoryAction::Move {
                state.pos = next;
                plan = None;
            }
        } else if record {
            trajectory.push(TrajectoryRow {
                t,
                pos: state.pos,
                bearing: action.direction,
                action: executed,
            });
        }
        state.boresight = action.direction;
        step += 1;

        let before_len = pending.len();
        pending.retain(|&(id, t)| energy[id] < t);
        if pending.len() != before_len {
            heads = pending.iter().map(|&(id, _)| (id, task.positions[id])).collect();
            plan = None;
        }

        if record && (step.is_multiple_of(sample_every) || pending.is_empty()) {
            let (at, over) = count_progress(&energy, &task.role_targets, task.et_s);
            series.push(SeriesPoint {
                t: step as f64 * cfg.dt,
                n_at_target: at,
                n_overcharged: over,
                stage: Stage::Stage1,
            });
        }
    }

    let t_cm = step as f64 * cfg.dt;
    state.elapsed = t_cm;
    if record {
        trajectory.push(TrajectoryRow {
            t: t_cm,
            pos: state.pos,
            bearing: state.boresight,
            action: TrajectoryAction::Stop,
        });
    }
    Ok(Some(Stage1Result {
        t_cm,
        steps: step,
        start,
        final_state: state,
        energies: energy,
        trajectory,
        series,
        move_steps,
        clamped_moves: clamped,
        energy_transmitted: cfg.tx_power * t_cm,
        energy_received: received,
    }))
}

/// Charges every head from energy-depleted nodes, starting at `start`.
pub fn run_stage1(
    scenario: &Scenario,
    clusters: &ClusterSet,
    start: Point,
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    targets: &Targets,
) -> Result<Stage1Result> {
    run_stage1_with(scenario, clusters, start, cfg, prop, targets, 100, None)
}

#[allow(clippy::too_many_arguments)]
pub fn run_stage1_with(
    scenario: &Scenario,
    clusters: &ClusterSet,
    start: Point,
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    targets: &Targets,
    sample_every: u64,
    observer: Option<&mut dyn StepObserver>,
) -> Result<Stage1Result> {
    cfg.validate()?;
    let task = ChargeTask::for_heads(scenario, clusters, targets);
    let opts = DriveOptions {
        record: true,
        sample_every,
        step_cap: None,
        observer,
    };
    Ok(drive(&task, cfg, prop, start, opts)?.expect("uncapped run always finishes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartCandidate {
    pub head: NodeId,
    pub start: Point,
    /// `None` when the run was abandoned for being slower than the best.
    pub steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSearch {
    pub best_head: Option<NodeId>,
    pub best_start: Point,
    pub result: Stage1Result,
    /// One entry per head, in cluster order.
    pub candidates: Vec<StartCandidate>,
}

/// Tries every head location as the starting spot and keeps the fastest,
/// ties going to the lowest head id.
pub fn optimize_start(
    scenario: &Scenario,
    clusters: &ClusterSet,
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    targets: &Targets,
) -> Result<StartSearch> {
    optimize_start_with(scenario, clusters, cfg, prop, targets, 100, None)
}

#[allow(clippy::too_many_arguments)]
pub fn optimize_start_with(
    scenario: &Scenario,
    clusters: &ClusterSet,
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    targets: &Targets,
    sample_every: u64,
    observer: Option<&mut dyn StepObserver>,
) -> Result<StartSearch> {
    cfg.validate()?;
    if clusters.is_empty() {
        return Err(Error::invalid("no clusters to start from"));
    }
    let task = ChargeTask::for_heads(scenario, clusters, targets);
    let starts: Vec<(NodeId, Point)> = clusters.heads().map(|h| (h, scenario.pos(h))).collect();
    search_starts(&task, cfg, prop, &starts, sample_every, observer)
}

pub(crate) fn search_starts(
    task: &ChargeTask,
    cfg: &ChargerConfig,
    prop: &PropagationParams,
    starts: &[(NodeId, Point)],
    sample_every: u64,
    observer: Option<&mut dyn StepObserver>,
) -> Result<StartSearch> {
    let mut candidates = Vec::with_capacity(starts.len());
    let mut best: Option<(u64, NodeId, Point)> = None;
    for &(head, start) in starts {
        let step_cap = if cfg.prune_starts {
            best.map(|(s, _, _)| s)
        } else {
            None
        };
        let opts = DriveOptions {
            record: false,
            sample_every,
            step_cap,
            observer: None,
        };
        let steps = drive(task, cfg, prop, start, opts)?.map(|r| r.steps);
        if let Some(s) = steps {
            if best.is_none_or(|(bs, bh, _)| (s, head) < (bs, bh)) {
                best = Some((s, head, start));
            }
        }
        candidates.push(StartCandidate { head, start, steps });
    }
    let (_, head, start) = best.expect("at least one start");
    let opts = DriveOptions {
        record: true,
        sample_every,
        step_cap: None,
        observer,
    };
    let result = drive(task, cfg, prop, start, opts)?.expect("uncapped run always finishes");
    Ok(StartSearch {
        best_head: Some(head),
        best_start: start,
        result,
        candidates,
    })
}
