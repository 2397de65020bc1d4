#![allow(dead_code)]

use std::f64::consts::PI;

use wrsn_core::{
    received_power, Action, ActionKind, Beam, ChargerConfig, Point, PropagationParams, StepView,
};

/// Per-step energy bookkeeping checked against direct link sums.
#[derive(Debug, Default)]
pub struct Ledger {
    pub steps: u64,
    pub checked_gains: u64,
    /// Largest relative gap between an applied gain and the link sum.
    pub worst_rel: f64,
    /// Applied gains that did not land exactly on the stored energy.
    pub bad_updates: u64,
    /// Transmitters that ended a step below the reserve.
    pub below_reserve: u64,
    /// Non-receivers that gained energy.
    pub stray_gains: u64,
}

impl Ledger {
    pub fn check(&mut self, v: &StepView<'_>, positions: &[Point], prop: &PropagationParams, reserve: f64) {
        self.steps += 1;
        let transmitting: Vec<usize> = v
            .emissions
            .iter()
            .filter_map(|e| match e.source {
                wrsn_core::trace::Source::Node(id) => Some(id),
                wrsn_core::trace::Source::Charger => None,
            })
            .collect();
        for (i, &p) in positions.iter().enumerate() {
            if !v.receivers[i] {
                if v.gains[i] != 0.0 {
                    self.stray_gains += 1;
                }
                continue;
            }
            let expected: f64 = v
                .emissions
                .iter()
                .map(|e| received_power(prop, e.pos, &e.beam, p) * e.active_s)
                .sum();
            let rel = (v.gains[i] - expected).abs() / expected;
            self.worst_rel = self.worst_rel.max(rel);
            self.checked_gains += 1;
            if !transmitting.contains(&i) && v.energy_after[i] != v.energy_before[i] + v.gains[i] {
                self.bad_updates += 1;
            }
        }
        for &t in &transmitting {
            if v.energy_after[t] < reserve {
                self.below_reserve += 1;
            }
        }
    }

    pub fn clean(&self, rel_tol: f64) -> bool {
        self.worst_rel <= rel_tol
            && self.bad_updates == 0
            && self.below_reserve == 0
            && self.stray_gains == 0
            && self.checked_gains > 0
    }
}

/// Plain re-implementation: recount every alive node's circle from scratch
/// each round, take the largest count with the lowest id.
pub fn cluster_oracle(points: &[(f64, f64)], r: f64) -> Vec<(usize, Vec<usize>)> {
    let within = |a: usize, b: usize| {
        let (dx, dy) = (points[a].0 - points[b].0, points[a].1 - points[b].1);
        (dx * dx + dy * dy).sqrt() <= r
    };
    let mut alive: Vec<bool> = vec![true; points.len()];
    let mut out = Vec::new();
    while alive.iter().any(|&a| a) {
        let mut best: Option<(usize, usize)> = None;
        for c in 0..points.len() {
            if !alive[c] {
                continue;
            }
            let count = (0..points.len()).filter(|&n| alive[n] && within(c, n)).count();
            if best.is_none_or(|(_, bc)| count > bc) {
                best = Some((c, count));
            }
        }
        let (head, _) = best.unwrap();
        let members: Vec<usize> = (0..points.len())
            .filter(|&n| n != head && alive[n] && within(head, n))
            .collect();
        alive[head] = false;
        for &m in &members {
            alive[m] = false;
        }
        out.push((head, members));
    }
    out
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

fn bearing(from: Point, to: Point) -> f64 {
    if from == to {
        0.0
    } else {
        (to.y - from.y).atan2(to.x - from.x)
    }
}

/// Scores every Stay/Move candidate directly and keeps the best, preferring
/// Stay, then the smaller direction.
pub fn plan_oracle(cfg: &ChargerConfig, prop: &PropagationParams, pos: Point, heads: &[Point]) -> Action {
    let mut dirs: Vec<f64> = heads.iter().map(|&h| wrap(bearing(pos, h))).collect();
    dirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dirs.dedup();
    let score = |eval: Point, dir: f64| -> f64 {
        let beam = Beam::Directional {
            pattern: cfg.pattern,
            boresight: dir,
        };
        heads
            .iter()
            .filter(|&&h| wrap(bearing(eval, h) - dir).abs() <= cfg.sector_half_angle)
            .map(|&h| received_power(prop, eval, &beam, h))
            .sum()
    };
    let mut scored = Vec::new();
    for &d in &dirs {
        scored.push((score(pos, d), 0u8, d));
    }
    for &d in &dirs {
        let eval = Point::new(pos.x + cfg.step_len * d.cos(), pos.y + cfg.step_len * d.sin());
        scored.push((score(eval, d), 1u8, d));
    }
    let best = scored
        .iter()
        .copied()
        .reduce(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                b
            } else {
                a
            }
        })
        .unwrap();
    Action {
        kind: if best.1 == 0 {
            ActionKind::Stay
        } else {
            ActionKind::Move
        },
        direction: best.2,
    }
}

