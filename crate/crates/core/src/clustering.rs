//! Inclusion-circle clustering.
//!
//! Every alive node is the center of a closed disc of radius `r_cl`. The node
//! whose disc covers the most alive nodes becomes the next head, everything
//! in its disc becomes its cluster, and the cluster leaves the alive set. The
//! procedure repeats until no node is left. Ties go to the lowest node id.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{NodeId, Scenario};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub head: NodeId,
    /// Ascending node ids, head excluded.
    pub members: Vec<NodeId>,
    /// Inclusion count of the head's circle when it was selected.
    pub inclusion: usize,
}

impl Cluster {
    pub fn is_singleton(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub r_cl: f64,
    /// In selection order.
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn heads(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.clusters.iter().map(|c| c.head)
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster index for every node id.
    pub fn assignment(&self, n_nodes: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_nodes];
        for (ci, c) in self.clusters.iter().enumerate() {
            out[c.head] = Some(ci);
            for &m in &c.members {
                out[m] = Some(ci);
            }
        }
        out
    }

    pub fn is_head(&self, n_nodes: usize) -> Vec<bool> {
        let mut out = vec![false; n_nodes];
        for h in self.heads() {
            out[h] = true;
        }
        out
    }
}

/// Number of alive nodes within `radius` of `center`, the center included.
///
/// `alive` is a mask indexed by node id.
pub fn inclusion_count(
    scenario: &Scenario,
    center: NodeId,
    radius: f64,
    alive: &[bool],
) -> Result<usize> {
    if !alive.get(center).copied().unwrap_or(false) {
        return Err(Error::NodeNotAlive(center));
    }
    let c = scenario.pos(center);
    Ok(scenario
        .nodes
        .iter()
        .filter(|n| alive[n.id] && c.distance(n.pos()) <= radius)
        .count())
}

pub fn cluster_nodes(scenario: &Scenario, r_cl: f64) -> ClusterSet {
    let n = scenario.len();
    let pos = scenario.positions();
    let neighbors: Vec<Vec<NodeId>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| pos[i].distance(pos[j]) <= r_cl)
                .collect()
        })
        .collect();

    let mut alive = vec![true; n];
    let mut count: Vec<usize> = neighbors.iter().map(Vec::len).collect();
    let mut remaining = n;
    let mut clusters = Vec::new();

    while remaining > 0 {
        // strict comparison keeps the lowest id among equal counts
        let mut head = usize::MAX;
        for i in (0..n).filter(|&i| alive[i]) {
            if head == usize::MAX || count[i] > count[head] {
                head = i;
            }
        }
        let inclusion = count[head];
        let taken: Vec<NodeId> = neighbors[head]
            .iter()
            .copied()
            .filter(|&j| alive[j])
            .collect();
        for &j in &taken {
            alive[j] = false;
            remaining -= 1;
            for &k in &neighbors[j] {
                count[k] -= 1;
            }
        }
        let members = taken.into_iter().filter(|&j| j != head).collect();
        clusters.push(Cluster {
            head,
            members,
            inclusion,
        });
    }

    ClusterSet { r_cl, clusters }
}
