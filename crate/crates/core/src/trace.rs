//! Recorded time series and per-step observation hooks.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::model::Beam;
use crate::scenario::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Stage1,
    Stage2,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Stage1 => "stage1",
            Stage::Stage2 => "stage2",
        }
    }
}

/// One sample of the charging-progress series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    /// Nodes holding at least the service target.
    pub n_at_target: usize,
    /// Nodes holding at least their own role's target.
    pub n_overcharged: usize,
    pub stage: Stage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryAction {
    Move,
    Stay,
    /// Terminal row: where the charger ended up.
    Stop,
}

impl TrajectoryAction {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryAction::Move => "move",
            TrajectoryAction::Stay => "stay",
            TrajectoryAction::Stop => "stop",
        }
    }
}

/// Charger pose at the start of a step and what it did during the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub pos: Point,
    pub bearing: f64,
    pub action: TrajectoryAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Charger,
    Node(NodeId),
}

/// A transmitter that radiated during a step, for `active_s` seconds of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub source: Source,
    pub pos: Point,
    pub beam: Beam,
    pub active_s: f64,
}

/// Everything that happened to node energies during one step.
#[derive(Debug)]
pub struct StepView<'a> {
    pub stage: Stage,
    pub index: u64,
    /// Stage-local time at the start of the step.
    pub t: f64,
    pub dt: f64,
    pub emissions: &'a [Emission],
    /// Nodes that were allowed to harvest during the step.
    pub receivers: &'a [bool],
    /// Energy harvested by each node during the step, joules.
    pub gains: &'a [f64],
    pub energy_before: &'a [f64],
    pub energy_after: &'a [f64],
}

pub trait StepObserver {
    fn on_step(&mut self, view: &StepView<'_>);
}

impl<F: FnMut(&StepView<'_>)> StepObserver for F {
    fn on_step(&mut self, view: &StepView<'_>) {
        self(view)
    }
}

pub(crate) fn count_progress(energy: &[f64], role_target: &[f64], et_s: f64) -> (usize, usize) {
    let at = energy.iter().filter(|&&e| e >= et_s).count();
    let over = energy
        .iter()
        .zip(role_target)
        .filter(|(e, t)| e >= t)
        .count();
    (at, over)
}
