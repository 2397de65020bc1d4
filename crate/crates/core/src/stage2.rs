//! Second stage: heads (pivot scheme) or every overcharged node (trading
//! scheme) hand their surplus to the nodes still below the service target.
//!
//! Both schemes advance in fixed steps. A transmitter drains `tx_power` while
//! active and never goes below `reserve`; its last step is cut short so it
//! lands exactly on the reserve. Every undercharged node harvests the
//! superposed power of all active transmitters, so off-axis and
//! cross-cluster leakage is included. A node stops harvesting once it
//! reaches the service target.

use serde::{Deserialize, Serialize};

use crate::clustering::{Cluster, ClusterSet};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::model::{AntennaPattern, Beam, Emitter, PropagationParams};
use crate::scenario::{NodeId, Role, Scenario, SensorNode};
use crate::trace::{Emission, SeriesPoint, Source, Stage, StepObserver, StepView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingPolicy {
    /// Largest remaining deficit first.
    #[default]
    MaxDeficit,
    /// Lowest node id first.
    Fifo,
    /// Closest to the head first.
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Config {
    pub dt: f64,
    pub ordering_policy: OrderingPolicy,
    /// Energy every transmitter keeps for itself, joules.
    pub reserve: f64,
    /// Trading: a node starts selling once it holds this much, joules.
    pub seller_threshold: f64,
    /// Trading: a seller only transmits while a buyer lies within this radius.
    pub serve_radius: f64,
    pub stall_window: f64,
    pub stall_epsilon: f64,
    /// Power drained by an active transmitter, watts.
    pub tx_power: f64,
    pub step_budget: u64,
}

impl Default for Stage2Config {
    fn default() -> Self {
        Self {
            dt: 0.0025,
            ordering_policy: OrderingPolicy::MaxDeficit,
            reserve: 2.0,
            seller_threshold: 6.0,
            serve_radius: 20.0,
            stall_window: 5.0,
            stall_epsilon: 1e-6,
            tx_power: 2.0,
            step_budget: 100_000_000,
        }
    }
}

impl Stage2Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("stage-2 dt must be positive"));
        }
        if !(self.reserve >= 0.0) {
            return Err(Error::invalid("reserve must be non-negative"));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(Error::invalid("transmit power must be positive"));
        }
        if !(self.stall_window > 0.0) {
            return Err(Error::invalid("stall window must be positive"));
        }
        Ok(())
    }

    fn window_steps(&self) -> u64 {
        ((self.stall_window / self.dt).ceil() as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage2Status {
    Complete,
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadEnergy {
    pub head: NodeId,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Result {
    pub duration: f64,
    pub steps: u64,
    pub status: Stage2Status,
    /// Nodes left below the service target with their deficits.
    pub unmet: Vec<(NodeId, f64)>,
    pub head_energy: Vec<HeadEnergy>,
    /// Stage-local times.
    pub series: Vec<SeriesPoint>,
    pub energies: Vec<f64>,
    pub energy_transmitted: f64,
    pub energy_received: f64,
}

/// Next member `cluster.head` should beam at, or `None` if every member holds
/// its target. `nodes` is indexed by node id.
pub fn next_target(
    cluster: &Cluster,
    nodes: &[SensorNode],
    policy: OrderingPolicy,
) -> Option<NodeId> {
    let head = nodes[cluster.head].pos;
    let mut best: Option<(NodeId, f64)> = None;
    for &m in &cluster.members {
        let n = &nodes[m];
        if n.energy >= n.target {
            continue;
        }
        // smaller key wins; members are in ascending id order so ties keep the lower id
        let key = match policy {
            OrderingPolicy::MaxDeficit => -(n.target - n.energy),
            OrderingPolicy::Fifo => m as f64,
            OrderingPolicy::Nearest => head.distance(n.pos),
        };
        if best.is_none_or(|(_, k)| key < k) {
            best = Some((m, key));
        }
    }
    best.map(|(m, _)| m)
}

/// Builds the per-node state at the start of stage 2.
pub fn stage2_nodes(
    scenario: &Scenario,
    clusters: &ClusterSet,
    energies: &[f64],
    head_role: Role,
    et_s: f64,
    role_targets: &[f64],
) -> Vec<SensorNode> {
    let is_head = clusters.is_head(scenario.len());
    scenario
        .nodes
        .iter()
        .map(|p| SensorNode {
            id: p.id,
            pos: p.pos(),
            energy: energies[p.id],
            role: if is_head[p.id] { head_role } else { Role::Member },
            // members aim at the service target; heads keep their own role target
            target: if is_head[p.id] { role_targets[p.id] } else { et_s },
        })
        .collect()
}

struct Sim<'a, 'o> {
    cfg: &'a Stage2Config,
    prop: &'a PropagationParams,
    et_s: f64,
    sample_every: u64,
    nodes: Vec<SensorNode>,
    role_targets: Vec<f64>,
    heads: Vec<NodeId>,
    observer: Option<&'o mut dyn StepObserver>,
}

/// One active transmitter for the current step.
struct Active {
    id: NodeId,
    emitter: Emitter,
    beam: Beam,
    active_s: f64,
}

impl Sim<'_, '_> {
    fn undercharged(&self, n: &SensorNode) -> bool {
        n.energy < self.et_s
    }

    fn progress(&self) -> (usize, usize) {
        let at = self.nodes.iter().filter(|n| n.energy >= self.et_s).count();
        let over = self
            .nodes
            .iter()
            .zip(&self.role_targets)
            .filter(|(n, &t)| n.energy >= t)
            .count();
        (at, over)
    }

    fn sample(&self, t: f64, series: &mut Vec<SeriesPoint>) {
        let (at, over) = self.progress();
        series.push(SeriesPoint {
            t,
            n_at_target: at,
            n_overcharged: over,
            stage: Stage::Stage2,
        });
    }

    fn active_time(&self, energy: f64) -> f64 {
        ((energy - self.cfg.reserve) / self.cfg.tx_power).min(self.cfg.dt)
    }

    /// Runs until nothing is undercharged or no more energy can move.
    ///
    /// `select` picks this step's transmitters; it must only return nodes
    /// holding more than the reserve.
    fn run(mut self, mut select: impl FnMut(&Self) -> Vec<Active>) -> Result<Stage2Result> {
        let n = self.nodes.len();
        let head_before: Vec<f64> = self.heads.iter().map(|&h| self.nodes[h].energy).collect();
        let window = self.cfg.window_steps();
        let mut window_mark: Vec<f64> = self.nodes.iter().map(|n| n.energy).collect();
        let mut series = Vec::new();
        self.sample(0.0, &mut series);

        let mut step: u64 = 0;
        let mut transmitted = 0.0;
        let mut received = 0.0;
        let mut gains = vec![0.0; n];
        let mut receivers = vec![false; n];
        let mut before = Vec::new();
        let mut after = Vec::new();

        let status = loop {
            if !self.nodes.iter().any(|x| self.undercharged(x)) {
                break Stage2Status::Complete;
            }
            if step >= self.cfg.step_budget {
                log::warn!("stage 2 hit its step budget of {}", self.cfg.step_budget);
                break Stage2Status::Stalled;
            }
            let active = select(&self);
            if active.is_empty() {
                // nobody can transmit, so nothing will change any more
                break Stage2Status::Stalled;
            }

            for (i, node) in self.nodes.iter().enumerate() {
                receivers[i] = self.undercharged(node);
            }
            for a in &active {
                receivers[a.id] = false;
            }
            for (i, g) in gains.iter_mut().enumerate() {
                *g = if receivers[i] {
                    let p = self.nodes[i].pos;
                    active
                        .iter()
                        .map(|a| a.emitter.power_to(self.prop, p) * a.active_s)
                        .sum()
                } else {
                    0.0
                };
            }

            if self.observer.is_some() {
                before.clear();
                before.extend(self.nodes.iter().map(|x| x.energy));
            }
            for (node, &g) in self.nodes.iter_mut().zip(&gains) {
                node.energy += g;
                received += g;
            }
            for a in &active {
                let node = &mut self.nodes[a.id];
                transmitted += self.cfg.tx_power * a.active_s;
                node.energy = if a.active_s < self.cfg.dt {
                    self.cfg.reserve
                } else {
                    (node.energy - self.cfg.tx_power * a.active_s).max(self.cfg.reserve)
                };
            }

            if let Some(obs) = self.observer.as_deref_mut() {
                after.clear();
                after.extend(self.nodes.iter().map(|x| x.energy));
                let emissions: Vec<Emission> = active
                    .iter()
                    .map(|a| Emission {
                        source: Source::Node(a.id),
                        pos: a.emitter.pos,
                        beam: a.beam,
                        active_s: a.active_s,
                    })
                    .collect();
                obs.on_step(&StepView {
                    stage: Stage::Stage2,
                    index: step,
                    t: step as f64 * self.cfg.dt,
                    dt: self.cfg.dt,
                    emissions: &emissions,
                    receivers: &receivers,
                    gains: &gains,
                    energy_before: &before,
                    energy_after: &after,
                });
            }

            step += 1;
            if step.is_multiple_of(self.sample_every) {
                self.sample(step as f64 * self.cfg.dt, &mut series);
            }
            if step.is_multiple_of(window) {
                let moved = self
                    .nodes
                    .iter()
                    .zip(&window_mark)
                    .any(|(x, &m)| x.energy - m >= self.cfg.stall_epsilon);
                if !moved {
                    break Stage2Status::Stalled;
                }
                for (m, x) in window_mark.iter_mut().zip(&self.nodes) {
                    *m = x.energy;
                }
            }
        };

        let duration = step as f64 * self.cfg.dt;
        if series.last().is_none_or(|s| s.t < duration) {
            self.sample(duration, &mut series);
        }
        let unmet = self
            .nodes
            .iter()
            .filter(|x| self.undercharged(x))
            .map(|x| (x.id, self.et_s - x.energy))
            .collect();
        let head_energy = self
            .heads
            .iter()
            .zip(head_before)
            .map(|(&h, before)| HeadEnergy {
                head: h,
                before,
                after: self.nodes[h].energy,
            })
            .collect();
        Ok(Stage2Result {
            duration,
            steps: step,
            status,
            unmet,
            head_energy,
            series,
            energies: self.nodes.iter().map(|x| x.energy).collect(),
            energy_transmitted: transmitted,
            energy_received: received,
        })
    }
}

/// Common inputs for both stage-2 schemes.
pub struct Stage2Input<'a> {
    pub scenario: &'a Scenario,
    pub clusters: &'a ClusterSet,
    /// Node energies at the end of stage 1.
    pub energies: &'a [f64],
    pub et_s: f64,
    /// Role target per node, used for the overcharged count.
    pub role_targets: &'a [f64],
    pub sample_every: u64,
}

/// Pivot heads beam at their own undercharged members, one at a time.
pub fn run_stage2_pivot(
    input: &Stage2Input<'_>,
    cfg: &Stage2Config,
    prop: &PropagationParams,
    pattern: &AntennaPattern,
    observer: Option<&mut dyn StepObserver>,
) -> Result<Stage2Result> {
    cfg.validate()?;
    let sim = new_sim(input, cfg, prop, Role::PivotHead, observer);
    let clusters = input.clusters;
    let pattern = *pattern;
    sim.run(|s| {
        clusters
            .clusters
            .iter()
            .filter(|c| s.nodes[c.head].energy > cfg.reserve)
            .filter_map(|c| {
                let target = next_target(c, &s.nodes, cfg.ordering_policy)?;
                let from = s.nodes[c.head].pos;
                let beam = Beam::Directional {
                    pattern,
                    boresight: from.bearing_to(s.nodes[target].pos),
                };
                Some(Active {
                    id: c.head,
                    emitter: Emitter::new(from, &beam),
                    beam,
                    active_s: s.active_time(s.nodes[c.head].energy),
                })
            })
            .collect()
    })
}

/// Every overcharged node sells omni-directionally to nearby buyers.
pub fn run_stage2_trading(
    input: &Stage2Input<'_>,
    cfg: &Stage2Config,
    prop: &PropagationParams,
    observer: Option<&mut dyn StepObserver>,
) -> Result<Stage2Result> {
    cfg.validate()?;
    let sim = new_sim(input, cfg, prop, Role::ClusterHead, observer);
    let mut seller = vec![false; sim.nodes.len()];
    sim.run(move |s| {
        for (flag, node) in seller.iter_mut().zip(&s.nodes) {
            if node.energy >= cfg.seller_threshold {
                *flag = true;
            }
            if node.energy <= cfg.reserve {
                *flag = false;
            }
        }
        let buyers: Vec<Point> = s
            .nodes
            .iter()
            .zip(&seller)
            .filter(|(n, &is_seller)| !is_seller && s.undercharged(n))
            .map(|(n, _)| n.pos)
            .collect();
        s.nodes
            .iter()
            .zip(&seller)
            .filter(|(_, &is_seller)| is_seller)
            .filter(|(n, _)| buyers.iter().any(|&b| n.pos.distance(b) <= cfg.serve_radius))
            .map(|(n, _)| Active {
                id: n.id,
                emitter: Emitter::new(n.pos, &Beam::Omni),
                beam: Beam::Omni,
                active_s: s.active_time(n.energy),
            })
            .collect()
    })
}

fn new_sim<'a, 'o>(
    input: &Stage2Input<'_>,
    cfg: &'a Stage2Config,
    prop: &'a PropagationParams,
    head_role: Role,
    observer: Option<&'o mut dyn StepObserver>,
) -> Sim<'a, 'o> {
    let nodes = stage2_nodes(
        input.scenario,
        input.clusters,
        input.energies,
        head_role,
        input.et_s,
        input.role_targets,
    );
    Sim {
        cfg,
        prop,
        et_s: input.et_s,
        sample_every: input.sample_every.max(1),
        nodes,
        role_targets: input.role_targets.to_vec(),
        heads: input.clusters.heads().collect(),
        observer,
    }
}
