//! Operation counting.
//!
//! The cost model: one pairwise combination costs `1` combination plus one
//! cell-op per cell of the *result* domain; one marginalization costs `1`
//! marginalization plus one cell-op per cell of the *source* domain.
//! Marginalizing a potential onto its own domain is free and not counted.
//!
//! Counters are plain values; concurrent use is per-worker counters merged
//! at the end (`merge`), so no atomics are needed on the hot path.

use std::collections::BTreeMap;
use std::ops::AddAssign;

use crate::tree::NodeId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub combinations: u64,
    pub marginalizations: u64,
    pub cell_ops: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one pairwise combination with `out_cells` result cells.
    pub fn record_combination(&mut self, out_cells: usize) {
        self.combinations += 1;
        self.cell_ops += out_cells as u64;
    }

    /// Record one marginalization scanning `src_cells` source cells.
    pub fn record_marginalization(&mut self, src_cells: usize) {
        self.marginalizations += 1;
        self.cell_ops += src_cells as u64;
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.combinations += other.combinations;
        self.marginalizations += other.marginalizations;
        self.cell_ops += other.cell_ops;
    }

    pub fn reset(&mut self) {
        *self = OpCounter::default();
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.merge(&rhs);
    }
}

/// Counters attributed per tree node, plus a bucket for work done outside
/// any node (e.g. direct API combinations).
#[derive(Debug, Clone, Default)]
pub struct Tallies {
    pub by_node: BTreeMap<NodeId, OpCounter>,
    pub unattributed: OpCounter,
}

impl Tallies {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mutable counter for one node, created on first touch.
    pub fn at(&mut self, node: NodeId) -> &mut OpCounter {
        self.by_node.entry(node).or_default()
    }

    /// Fold another tally set into this one, node by node.
    pub fn absorb(&mut self, other: &Tallies) {
        for (node, c) in &other.by_node {
            self.by_node.entry(*node).or_default().merge(c);
        }
        self.unattributed.merge(&other.unattributed);
    }

    /// Grand total across all nodes and the unattributed bucket.
    pub fn total(&self) -> OpCounter {
        let mut t = self.unattributed;
        for c in self.by_node.values() {
            t.merge(c);
        }
        t
    }
}
