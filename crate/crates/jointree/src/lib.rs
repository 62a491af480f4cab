//! Exact local computation on discrete valuation networks.
//!
//! A network is a collection of valuations (dense tables over small sets of
//! finite variables) under either the sum-product or the min-sum semiring.
//! This crate computes the marginal of their combination for every query
//! domain **without ever materializing the joint table**:
//!
//! 1. [`build_join_tree`] arranges the valuation and query domains into a
//!    join tree (one pairwise merge at a time, smallest union first).
//! 2. [`binarize`] rewrites the tree so no node has more than three
//!    neighbors, which is what lets message passing cache partial products.
//! 3. [`Engine`] (or the [`propagate`] shortcut) runs two-register message
//!    passing over the edges: each directed edge carries one message, each
//!    node's marginal is the combination of its own valuation with every
//!    inbound message.
//!
//! Every combination and marginalization is metered by an [`OpCounter`], so
//! the efficiency of different tree shapes and combination strategies can be
//! compared exactly; see [`count_comparison`].
//!
//! [`net`] reads and writes a small JSON network format, and [`random`]
//! generates seeded random networks for verification against the
//! [`brute_force_marginal`] oracle.

pub mod algebra;
pub mod cli;
pub mod count;
pub mod error;
pub mod net;
pub mod potential;
pub mod propagate;
pub mod random;
pub mod semiring;
pub mod tree;

pub use algebra::{DomainSet, VarId, VariableTable};
pub use count::{OpCounter, Tallies};
pub use error::{Error, Result};
pub use net::{load_network, network_from_doc, Network, NetworkDoc, ValuationDoc, VariableDoc};
pub use potential::{combine_many_flat, combine_many_staged, Potential};
pub use propagate::{
    brute_force_marginal, brute_force_marginal_capped, count_comparison, propagate,
    representative_nodes, schedule, schedule_rooted, ChildOrder, CombineStrategy, CountMode,
    CountReport, Engine, EngineOptions, PropagationReport, Targets, DEFAULT_JOINT_CAP,
};
pub use random::{
    potentials_for_subsets, random_hypergraph, random_network, render_doc, shipped_network_docs,
    NetworkConfig,
};
pub use semiring::SemiringKind;
pub use tree::{
    attach_valuations, binarize, build_join_tree, pick_pair, BuildInput, EliminationOrder,
    JoinTree, NodeId, Root, TreeNode,
};
