//! Energy target levels.

use serde::{Deserialize, Serialize};

use crate::clustering::{Cluster, ClusterSet};
use crate::scenario::NodeId;

/// Service target every node must finally hold, joules.
pub const DEFAULT_ET_S: f64 = 2.0;

/// Stage-1 head targets by network size: `(n_nodes, pivot ET_p, trading ET_h)`.
pub const TABLE_TARGETS: [(usize, f64, f64); 5] = [
    (100, 4.0, 6.0),
    (125, 4.5, 6.0),
    (150, 4.5, 5.5),
    (175, 5.5, 5.5),
    (200, 5.5, 5.0),
];

/// Table row nearest to `n_nodes`; the lower size wins an exact midpoint.
pub fn table_targets(n_nodes: usize) -> (f64, f64) {
    let mut best = TABLE_TARGETS[0];
    for row in TABLE_TARGETS {
        if row.0.abs_diff(n_nodes) < best.0.abs_diff(n_nodes) {
            best = row;
        }
    }
    (best.1, best.2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    /// Service target for non-head nodes.
    pub et_s: f64,
    /// Stage-1 target for heads (ET_p or ET_h depending on the scheme).
    pub head: f64,
    /// Charge singleton-cluster heads only to `et_s` in stage 1.
    pub singleton_target_ets: bool,
}

impl Targets {
    pub fn new(et_s: f64, head: f64) -> Self {
        Self {
            et_s,
            head,
            singleton_target_ets: false,
        }
    }

    pub fn head_target(&self, cluster: &Cluster) -> f64 {
        if self.singleton_target_ets && cluster.is_singleton() {
            self.et_s
        } else {
            self.head
        }
    }

    /// Heads with their stage-1 targets, in cluster order.
    pub fn stage1_goals(&self, clusters: &ClusterSet) -> Vec<(NodeId, f64)> {
        clusters
            .clusters
            .iter()
            .map(|c| (c.head, self.head_target(c)))
            .collect()
    }

    /// Target of each node's role: heads their stage-1 target, members `et_s`.
    pub fn role_targets(&self, clusters: &ClusterSet, n_nodes: usize) -> Vec<f64> {
        let mut out = vec![self.et_s; n_nodes];
        for c in &clusters.clusters {
            out[c.head] = self.head_target(c);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_row_selected() {
        assert_eq!(table_targets(100), (4.0, 6.0));
        assert_eq!(table_targets(10), (4.0, 6.0));
        assert_eq!(table_targets(140), (4.5, 5.5));
        assert_eq!(table_targets(162), (4.5, 5.5));
        assert_eq!(table_targets(163), (5.5, 5.5));
        assert_eq!(table_targets(200), (5.5, 5.0));
        assert_eq!(table_targets(1000), (5.5, 5.0));
    }
}
