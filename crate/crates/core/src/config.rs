//! TOML run configuration.
//!
//! Every key is optional; absent keys take the simulator defaults and unknown
//! keys are rejected. Angles are given in degrees here and nowhere else.
//!
//! ```toml
//! [propagation]
//! alpha = 36.0
//! beta = 30.0
//!
//! [antenna]            # charger and pivot-head transmit pattern
//! gmax_db = 12.0
//! hpbw_deg = 44.0
//! floor_db = -10.0
//!
//! [charger]
//! dt = 0.0025
//! step_len = 0.05
//! sector_half_angle_deg = 22.0
//! step_budget = 100000000
//! prune_starts = true
//!
//! [power]
//! tf = 0.02
//! tf_includes_gain = false
//!
//! [clustering]
//! r_cl = 10.0
//!
//! [stage2]
//! dt = 0.0025
//! ordering_policy = "max_deficit"   # or "fifo", "nearest"
//! # reserve = 2.0                   # defaults to targets.et_s
//! serve_radius = 20.0
//! stall_window = 5.0
//! stall_epsilon = 1e-6
//! step_budget = 100000000
//!
//! [targets]
//! et_s = 2.0
//! # et_p = 5.5                      # defaults to the table row nearest N_T
//! # et_h = 5.0
//! singleton_target_ets = false
//!
//! [output]
//! sample_every = 100
//! # out_dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{SchemeKind, SchemeSpec, SimConfig};
use crate::error::{Error, Result};
use crate::model::{derive_tx_power, AntennaPattern, PropagationParams};
use crate::stage1::ChargerConfig;
use crate::stage2::{OrderingPolicy, Stage2Config};
use crate::targets::{table_targets, Targets, DEFAULT_ET_S};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub propagation: PropagationSection,
    pub antenna: AntennaSection,
    pub charger: ChargerSection,
    pub power: PowerSection,
    pub clustering: ClusteringSection,
    pub stage2: Stage2Section,
    pub targets: TargetsSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationSection {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for PropagationSection {
    fn default() -> Self {
        let p = PropagationParams::default();
        Self {
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaSection {
    pub gmax_db: f64,
    pub hpbw_deg: f64,
    pub floor_db: f64,
}

impl Default for AntennaSection {
    fn default() -> Self {
        Self {
            gmax_db: 12.0,
            hpbw_deg: 44.0,
            floor_db: -10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChargerSection {
    pub dt: f64,
    pub step_len: f64,
    pub sector_half_angle_deg: f64,
    pub step_budget: u64,
    pub prune_starts: bool,
}

impl Default for ChargerSection {
    fn default() -> Self {
        let c = ChargerConfig::default();
        Self {
            dt: c.dt,
            step_len: c.step_len,
            sector_half_angle_deg: 22.0,
            step_budget: c.step_budget,
            prune_starts: c.prune_starts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub tf: f64,
    /// Count the peak transmit gain in the `tf` ratio.
    pub tf_includes_gain: bool,
}

impl Default for PowerSection {
    fn default() -> Self {
        Self {
            tf: 0.02,
            tf_includes_gain: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringSection {
    pub r_cl: f64,
}

impl Default for ClusteringSection {
    fn default() -> Self {
        Self { r_cl: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stage2Section {
    pub dt: f64,
    pub ordering_policy: OrderingPolicy,
    pub reserve: Option<f64>,
    pub serve_radius: f64,
    pub stall_window: f64,
    pub stall_epsilon: f64,
    pub step_budget: u64,
}

impl Default for Stage2Section {
    fn default() -> Self {
        let c = Stage2Config::default();
        Self {
            dt: c.dt,
            ordering_policy: c.ordering_policy,
            reserve: None,
            serve_radius: c.serve_radius,
            stall_window: c.stall_window,
            stall_epsilon: c.stall_epsilon,
            step_budget: c.step_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetsSection {
    pub et_s: f64,
    pub et_p: Option<f64>,
    pub et_h: Option<f64>,
    pub singleton_target_ets: bool,
}

impl Default for TargetsSection {
    fn default() -> Self {
        Self {
            et_s: DEFAULT_ET_S,
            et_p: None,
            et_h: None,
            singleton_target_ets: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub sample_every: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            sample_every: 100,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Resolves the file into simulator parameters.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let prop = PropagationParams::new(self.propagation.alpha, self.propagation.beta)?;
        let a = &self.antenna;
        let pattern = AntennaPattern::from_degrees(a.gmax_db, a.hpbw_deg, a.floor_db)?;
        let mut tx_power = derive_tx_power(&prop, self.power.tf)?;
        if self.power.tf_includes_gain {
            tx_power *= pattern.gmax_linear();
        }
        let c = &self.charger;
        let charger = ChargerConfig {
            dt: c.dt,
            step_len: c.step_len,
            sector_half_angle: c.sector_half_angle_deg.to_radians(),
            pattern,
            tx_power,
            step_budget: c.step_budget,
            prune_starts: c.prune_starts,
        };
        let s = &self.stage2;
        let stage2 = Stage2Config {
            dt: s.dt,
            ordering_policy: s.ordering_policy,
            reserve: s.reserve.unwrap_or(self.targets.et_s),
            seller_threshold: Stage2Config::default().seller_threshold,
            serve_radius: s.serve_radius,
            stall_window: s.stall_window,
            stall_epsilon: s.stall_epsilon,
            tx_power,
            step_budget: s.step_budget,
        };
        let cfg = SimConfig {
            prop,
            charger,
            stage2,
            head_pattern: pattern,
            r_cl: self.clustering.r_cl,
            sample_every: self.output.sample_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Scheme targets for a network of `n_nodes`: explicit values win, the
    /// nearest table row fills the rest.
    pub fn scheme_spec(&self, kind: SchemeKind, n_nodes: usize) -> SchemeSpec {
        let t = &self.targets;
        let (et_p, et_h) = table_targets(n_nodes);
        let head = match kind {
            SchemeKind::Pivot => t.et_p.unwrap_or(et_p),
            SchemeKind::Trading => t.et_h.unwrap_or(et_h),
            SchemeKind::Flat => t.et_s,
        };
        SchemeSpec {
            kind,
            targets: Targets {
                et_s: t.et_s,
                head,
                singleton_target_ets: t.singleton_target_ets,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap().sim_config().unwrap();
        assert_eq!(cfg, SimConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("[charger]\nspeed = 3.0\n").is_err());
        assert!(RunConfig::from_toml("[nonsense]\n").is_err());
    }

    #[test]
    fn round_trips() {
        let mut c = RunConfig::default();
        c.targets.et_p = Some(4.2);
        c.stage2.ordering_policy = OrderingPolicy::Nearest;
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn gain_in_ratio_scales_power() {
        let c = RunConfig::from_toml("[power]\ntf_includes_gain = true\n").unwrap();
        let cfg = c.sim_config().unwrap();
        assert!((cfg.charger.tx_power - 2.0 * 10f64.powf(1.2)).abs() < 1e-12);
        assert_eq!(cfg.stage2.tx_power, cfg.charger.tx_power);
    }

    #[test]
    fn reserve_follows_service_target() {
        let c = RunConfig::from_toml("[targets]\net_s = 1.5\n").unwrap();
        assert_eq!(c.sim_config().unwrap().stage2.reserve, 1.5);
    }

    #[test]
    fn targets_resolved_per_size() {
        let c = RunConfig::from_toml("[targets]\net_h = 7.0\n").unwrap();
        assert_eq!(c.scheme_spec(SchemeKind::Pivot, 150).targets.head, 4.5);
        assert_eq!(c.scheme_spec(SchemeKind::Trading, 150).targets.head, 7.0);
        assert_eq!(c.scheme_spec(SchemeKind::Flat, 150).targets.head, 2.0);
    }
}
