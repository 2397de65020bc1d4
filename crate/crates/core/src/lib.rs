//! Deterministic simulator of two-stage RF charging for wireless rechargeable
//! sensor networks.
//!
//! A mobile charger with a directional antenna first charges cluster heads
//! along a greedily planned path ([`stage1`]). The heads then pass energy on to
//! their members ([`stage2`]), either by beaming at them one at a time (pivot
//! scheme) or by selling omni-directionally (trading scheme). [`engine`] ties
//! the stages together and also offers a flat single-stage baseline.
//!
//! ```
//! use wrsn_core::{run_scheme, Scenario, SchemeKind, SchemeSpec, SimConfig};
//!
//! let scenario = Scenario::generate(20, 40.0, 1).unwrap();
//! let spec = SchemeSpec::table(SchemeKind::Pivot, scenario.len());
//! let result = run_scheme(&scenario, &spec, &SimConfig::default()).unwrap();
//! assert_eq!(result.t_total, result.t_stage1 + result.t_stage2);
//! ```

pub mod artifacts;
pub mod clustering;
pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod scenario;
pub mod stage1;
pub mod stage2;
pub mod sweep;
pub mod targets;
pub mod trace;

pub use clustering::{cluster_nodes, inclusion_count, Cluster, ClusterSet};
pub use engine::{
    calibrate_target, run_flat_baseline, run_scheme, run_scheme_observed, Calibration,
    CalibrationBounds, RunResult, SchemeKind, SchemeSpec, SimConfig,
};
pub use error::{Error, Result};
pub use geometry::Point;
pub use model::{
    derive_tx_power, directive_gain, received_power, AntennaPattern, Beam, PropagationParams,
};
pub use scenario::{NodeId, Role, Scenario, SensorNode};
pub use stage1::{
    candidate_actions, optimize_start, plan_step, run_stage1, sector_power, Action, ActionKind,
    ChargerConfig, ChargerState, Stage1Result,
};
pub use stage2::{
    next_target, run_stage2_pivot, run_stage2_trading, OrderingPolicy, Stage2Config,
    Stage2Input, Stage2Result, Stage2Status,
};
pub use targets::{table_targets, Targets, DEFAULT_ET_S};
pub use trace::{SeriesPoint, Stage, StepObserver, StepView, TrajectoryAction, TrajectoryRow};
