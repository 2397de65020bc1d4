//! Node placements and per-node simulation state.
//!
//! Scenario files are pretty-printed JSON:
//!
//! ```json
//! {
//!   "area_side": 100.0,
//!   "seed": 1,
//!   "nodes": [
//!     { "id": 0, "x": 12.5, "y": 80.25 }
//!   ]
//! }
//! ```
//!
//! Random placements are drawn i.i.d. uniform over the square with ChaCha8
//! (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`), x then y for each node in
//! id order, each coordinate `area_side * U[0, 1)` with the 53-bit `f64`
//! conversion of `rand` 0.8. The stream is identical on every platform.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodePlacement {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

impl NodePlacement {
    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub area_side: f64,
    pub seed: u64,
    pub nodes: Vec<NodePlacement>,
}

impl Scenario {
    pub fn new(area_side: f64, seed: u64, nodes: Vec<NodePlacement>) -> Result<Self> {
        let s = Self {
            area_side,
            seed,
            nodes,
        };
        s.validate()?;
        Ok(s)
    }

    /// Builds a scenario from raw coordinates, assigning ids in order.
    pub fn from_points(area_side: f64, points: &[(f64, f64)]) -> Result<Self> {
        let nodes = points
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| NodePlacement { id, x, y })
            .collect();
        Self::new(area_side, 0, nodes)
    }

    pub fn generate(n: usize, area_side: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyScenario);
        }
        if !(area_side > 0.0 && area_side.is_finite()) {
            return Err(Error::invalid("area side must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = (0..n)
            .map(|id| {
                let x = area_side * rng.gen::<f64>();
                let y = area_side * rng.gen::<f64>();
                NodePlacement { id, x, y }
            })
            .collect();
        Self::new(area_side, seed, nodes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::EmptyScenario);
        }
        if !(self.area_side > 0.0 && self.area_side.is_finite()) {
            return Err(Error::InvalidScenario("area side must be positive".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidScenario(format!(
                    "node ids must be contiguous from 0; position {i} holds id {}",
                    n.id
                )));
            }
            if !n.pos().in_square(self.area_side) {
                return Err(Error::InvalidScenario(format!(
                    "node {} at ({}, {}) lies outside the {} m square",
                    n.id, n.x, n.y, self.area_side
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn pos(&self, id: NodeId) -> Point {
        self.nodes[id].pos()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.nodes.iter().map(NodePlacement::pos).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let s = Self::from_json(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::artifacts::write_atomic(path, self.to_json().as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    PivotHead,
    ClusterHead,
    Member,
}

impl Role {
    pub fn is_head(self) -> bool {
        !matches!(self, Role::Member)
    }
}

/// Mutable per-node state carried through a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: NodeId,
    pub pos: Point,
    /// Stored energy, joules.
    pub energy: f64,
    pub role: Role,
    /// Target level for this node's role, joules.
    pub target: f64,
}

impl SensorNode {
    pub fn is_overcharged(&self) -> bool {
        self.energy >= self.target
    }
}
