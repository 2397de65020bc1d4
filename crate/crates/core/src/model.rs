//! Physical charging model shared by every scheme.
//!
//! Received power follows a Friis-style law with a distance offset:
//!
//! ```text
//! P_r = g(phi) * alpha / (d + beta)^2
//! ```
//!
//! `alpha` folds the transmitter and receiver antenna gains, rectifier
//! efficiency, wavelength, polarization loss and the transmit power into a
//! single constant, so none of those are represented individually. `g(phi)` is
//! the directive gain of the transmit antenna at `phi` radians off boresight
//! and is 1 for omni-directional transmitters.
//!
//! The main lobe of a directional antenna is modelled as a parabola in dB,
//! `G(phi) = gmax - 3 * (2 * phi / hpbw)^2`, clipped from below at a side/back
//! lobe floor. This hits `gmax` on boresight and exactly `gmax - 3 dB` at the
//! half-power points `+-hpbw / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_between, Point};

/// Composite propagation constants. `alpha` in W*m^2, `beta` in m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self {
            alpha: 36.0,
            beta: 30.0,
        }
    }
}

impl PropagationParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha must be positive"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta must be positive"));
        }
        Ok(())
    }

    /// Gain-free received power at distance `d`.
    #[inline]
    pub fn path_power(&self, d: f64) -> f64 {
        let r = d + self.beta;
        self.alpha / (r * r)
    }
}

/// Parametric directive-gain profile of a steerable transmit antenna.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    /// Boresight gain in dB.
    pub gmax_db: f64,
    /// Full half-power beamwidth, radians.
    pub hpbw: f64,
    /// Side/back lobe floor in dB.
    pub floor_db: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        Self {
            gmax_db: 12.0,
            hpbw: 44f64.to_radians(),
            floor_db: -10.0,
        }
    }
}

impl AntennaPattern {
    pub fn from_degrees(gmax_db: f64, hpbw_deg: f64, floor_db: f64) -> Result<Self> {
        let p = Self {
            gmax_db,
            hpbw: hpbw_deg.to_radians(),
            floor_db,
        };
        p.validate()?;
        Ok(p)
    }

    /// A pattern that behaves exactly like an omni-directional antenna.
    pub fn isotropic() -> Self {
        Self {
            gmax_db: 0.0,
            hpbw: std::f64::consts::PI,
            floor_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hpbw > 0.0 && self.hpbw.is_finite()) {
            return Err(Error::invalid("half-power beamwidth must be positive"));
        }
        if !self.gmax_db.is_finite() || !self.floor_db.is_finite() {
            return Err(Error::invalid("antenna gains must be finite"));
        }
        if self.floor_db > self.gmax_db {
            return Err(Error::invalid("antenna floor exceeds peak gain"));
        }
        Ok(())
    }

    pub fn gmax_linear(&self) -> f64 {
        db_to_linear(self.gmax_db)
    }

    pub fn floor_linear(&self) -> f64 {
        db_to_linear(self.floor_db)
    }

    /// Gain in dB at `phi` radians off boresight (`phi` already normalized).
    pub fn gain_db(&self, phi: f64) -> f64 {
        let u = 2.0 * phi / self.hpbw;
        (self.gmax_db - 3.0 * u * u).max(self.floor_db)
    }

    /// Off-boresight angle beyond which the gain sits on the floor.
    pub fn floor_angle(&self) -> f64 {
        0.5 * self.hpbw * ((self.gmax_db - self.floor_db) / 3.0).sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear directive gain at `phi` radians off boresight.
pub fn directive_gain(pattern: &AntennaPattern, phi: f64) -> f64 {
    db_to_linear(pattern.gain_db(crate::geometry::normalize_angle(phi)))
}

/// How a transmitter radiates: omni-directionally, or through a pattern aimed
/// along a boresight bearing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beam {
    Omni,
    Directional {
        pattern: AntennaPattern,
        boresight: f64,
    },
}

/// Power received at `rx` from a transmitter at `tx` radiating with `beam`.
///
/// Finite and positive for every distance, including `d = 0`, where the
/// off-boresight angle is taken with the receiver at bearing 0.
pub fn received_power(prop: &PropagationParams, tx: Point, beam: &Beam, rx: Point) -> f64 {
    let base = prop.path_power(tx.distance(rx));
    match beam {
        Beam::Omni => base,
        Beam::Directional { pattern, boresight } => {
            let phi = angle_between(*boresight, tx.bearing_to(rx));
            directive_gain(pattern, phi) * base
        }
    }
}

/// Transmit power drained per second by a transmitting node, from the ratio
/// `tf` of gain-free received power at zero distance to transmit power.
pub fn derive_tx_power(prop: &PropagationParams, tf: f64) -> Result<f64> {
    if !(tf > 0.0 && tf <= 1.0) {
        return Err(Error::invalid(format!(
            "transfer ratio must lie in (0, 1], got {tf}"
        )));
    }
    Ok(prop.path_power(0.0) / tf)
}

/// Precomputed transmitter used inside the simulation loops.
///
/// Produces bit-identical results to [`received_power`]; it only skips the
/// trigonometry for receivers that are certainly on the pattern floor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Emitter {
    pub pos: Point,
    kind: EmitterKind,
}

#[derive(Debug, Clone, Copy)]
enum EmitterKind {
    Omni,
    Directional {
        pattern: AntennaPattern,
        boresight: f64,
        ux: f64,
        uy: f64,
        floor_gain: f64,
        /// cos of a slightly widened floor angle; `None` if the lobe never reaches the floor.
        floor_cos: Option<f64>,
    },
}

impl Emitter {
    pub fn new(pos: Point, beam: &Beam) -> Self {
        let kind = match *beam {
            Beam::Omni => EmitterKind::Omni,
            Beam::Directional { pattern, boresight } => {
                let edge = pattern.floor_angle() + 1e-6;
                EmitterKind::Directional {
                    pattern,
                    boresight,
                    ux: boresight.cos(),
                    uy: boresight.sin(),
                    floor_gain: pattern.floor_linear(),
                    floor_cos: (edge < std::f64::consts::PI).then(|| edge.cos()),
                }
            }
        };
        Self { pos, kind }
    }

    #[inline]
    pub fn power_to(&self, prop: &PropagationParams, rx: Point) -> f64 {
        let (dx, dy) = (rx.x - self.pos.x, rx.y - self.pos.y);
        let d = (dx * dx + dy * dy).sqrt();
        let base = prop.path_power(d);
        match self.kind {
            EmitterKind::Omni => base,
            EmitterKind::Directional {
                pattern,
                boresight,
                ux,
                uy,
                floor_gain,
                floor_cos,
            } => {
                if let Some(c) = floor_cos {
                    if d > 0.0 && ux * dx + uy * dy < c * d {
                        return floor_gain * base;
                    }
                }
                let phi = angle_between(boresight, self.pos.bearing_to(rx));
                directive_gain(&pattern, phi) * base
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn boresight_gain_is_peak() {
        let p = AntennaPattern::default();
        assert!(close(directive_gain(&p, 0.0), 15.848931924611133, 1e-12));
    }

    #[test]
    fn half_power_point_and_floor() {
        let p = AntennaPattern::default();
        // 3 dB down at half the 44 degree beamwidth
        assert!(close(directive_gain(&p, 22f64.to_radians()), 7.943282347242816, 1e-12));
        assert!(close(directive_gain(&p, 90f64.to_radians()), 0.1, 1e-15));
        assert!(close(p.floor_angle().to_degrees(), 59.58, 0.01));
        let ratio = directive_gain(&p, p.hpbw / 2.0) / directive_gain(&p, 0.0);
        assert!(((ratio - 10f64.powf(-0.3)) / ratio).abs() < 1e-12);
    }

    #[test]
    fn point_checks() {
        let prop = PropagationParams::default();
        let o = Point::new(0.0, 0.0);
        assert_eq!(received_power(&prop, o, &Beam::Omni, o), 0.04);
        let beam = Beam::Directional {
            pattern: AntennaPattern::default(),
            boresight: 0.0,
        };
        let p = received_power(&prop, o, &beam, Point::new(10.0, 0.0));
        assert!(close(p, 15.848931924611133 * 36.0 / 1600.0, 1e-12));
        assert!(close(p, 0.35661, 1e-5));
    }

    #[test]
    fn tx_power_from_ratio() {
        let prop = PropagationParams::default();
        assert!(close(derive_tx_power(&prop, 0.02).unwrap(), 2.0, 1e-12));
        assert!(close(derive_tx_power(&prop, 1.0).unwrap(), 0.04, 1e-15));
        assert!(close(derive_tx_power(&prop, 0.01).unwrap(), 4.0, 1e-12));
        assert!(derive_tx_power(&prop, 0.0).is_err());
        assert!(derive_tx_power(&prop, -0.5).is_err());
        assert!(derive_tx_power(&prop, 1.5).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(PropagationParams::new(0.0, 30.0).is_err());
        assert!(PropagationParams::new(36.0, -1.0).is_err());
        assert!(AntennaPattern::from_degrees(12.0, 0.0, -10.0).is_err());
        assert!(AntennaPattern::from_degrees(0.0, 44.0, 3.0).is_err());
    }

    fn arb_point() -> impl Strategy<Value = Point> {
        (-100.0..100.0f64, -100.0..100.0f64).prop_map(|(x, y)| Point::new(x, y))
    }

    proptest! {
        #[test]
        fn gain_is_even_and_non_increasing(a in 0.0..std::f64::consts::PI, b in 0.0..std::f64::consts::PI) {
            let p = AntennaPattern::default();
            prop_assert_eq!(directive_gain(&p, a), directive_gain(&p, -a));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(directive_gain(&p, hi) <= directive_gain(&p, lo));
            prop_assert!(directive_gain(&p, hi) >= p.floor_linear());
        }

        #[test]
        fn omni_matches_flat_pattern(tx in arb_point(), rx in arb_point(), bore in -3.0..3.0f64) {
            let prop = PropagationParams::default();
            let flat = Beam::Directional { pattern: AntennaPattern::isotropic(), boresight: bore };
            let a = received_power(&prop, tx, &Beam::Omni, rx);
            let b = received_power(&prop, tx, &flat, rx);
            prop_assert!((a - b).abs() <= 1e-15 * a);
        }

        #[test]
        fn invariant_under_rigid_motion(tx in arb_point(), rx in arb_point(), bore in -3.0..3.0f64,
                                        shift in arb_point(), rot in -3.0..3.0f64) {
            let prop = PropagationParams::default();
            let pattern = AntennaPattern::default();
            let move_pt = |p: Point| {
                let (s, c) = rot.sin_cos();
                Point::new(c * p.x - s * p.y + shift.x, s * p.x + c * p.y + shift.y)
            };
            let a = received_power(&prop, tx, &Beam::Directional { pattern, boresight: bore }, rx);
            let b = received_power(&prop, move_pt(tx), &Beam::Directional { pattern, boresight: bore + rot }, move_pt(rx));
            prop_assume!(tx.distance(rx) > 1e-6);
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }

        #[test]
        fn power_decreases_with_distance_and_peaks_on_boresight(d in 0.0..200.0f64, dd in 0.01..50.0f64, phi in -3.0..3.0f64) {
            let prop = PropagationParams::default();
            let beam = Beam::Directional { pattern: AntennaPattern::default(), boresight: phi };
            let tx = Point::new(0.0, 0.0);
            let near = Point::new(d, 0.0);
            let far = Point::new(d + dd, 0.0);
            prop_assert!(received_power(&prop, tx, &beam, far) < received_power(&prop, tx, &beam, near));
            let aimed = Beam::Directional { pattern: AntennaPattern::default(), boresight: 0.0 };
            prop_assert!(received_power(&prop, tx, &beam, near) <= received_power(&prop, tx, &aimed, near));
        }

        #[test]
        fn emitter_is_bit_identical(tx in arb_point(), rx in arb_point(), bore in -3.2..3.2f64, omni in any::<bool>()) {
            let prop = PropagationParams::default();
            let beam = if omni { Beam::Omni } else {
                Beam::Directional { pattern: AntennaPattern::default(), boresight: bore }
            };
            let e = Emitter::new(tx, &beam);
            prop_assert_eq!(e.power_to(&prop, rx).to_bits(), received_power(&prop, tx, &beam, rx).to_bits());
        }
    }
}
