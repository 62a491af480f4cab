//! One error type for the whole crate.
//!
//! Variants are grouped by the layer that raises them: variable/domain
//! bookkeeping, potential arithmetic, tree construction, propagation
//! scheduling, and network-file loading.

use thiserror::Error;

use crate::algebra::VarId;
use crate::tree::NodeId;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // --- variables and domains ---
    #[error("unknown variable id {0}")]
    UnknownVariable(VarId),
    #[error("unknown variable name `{0}`")]
    UnknownName(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("variable `{0}` must have cardinality >= 1")]
    ZeroCardinality(String),
    #[error("state space size overflows usize")]
    StateSpaceOverflow,
    #[error("state {state} out of range for variable {var} (cardinality {card})")]
    StateOutOfRange { var: String, state: usize, card: usize },
    #[error("assignment does not cover exactly the domain: {0}")]
    AssignmentMismatch(String),
    #[error("configuration index {index} out of range ({size} configurations)")]
    IndexOutOfRange { index: usize, size: usize },

    // --- potentials ---
    #[error("value table has {got} entries but the domain has {want} configurations{ctx}")]
    LengthMismatch { got: usize, want: usize, ctx: String },
    #[error("invalid value in table{ctx}: {value}")]
    InvalidValue { value: f64, ctx: String },
    #[error("potentials carry different semiring tags")]
    SemiringMismatch,
    #[error("potentials reference different variable tables")]
    TableMismatch,
    #[error("domains differ where equal domains are required")]
    DomainMismatch,
    #[error("{0} is not a member of the domain")]
    NotInDomain(String),
    #[error("{0} is not a subset of the source domain")]
    NotASubset(String),
    #[error("cannot normalize: {0}")]
    Normalize(String),
    #[error("no potentials given")]
    EmptyInput,

    // --- join tree construction ---
    #[error("build input has no subsets")]
    EmptyBuild,
    #[error("elimination order error: {0}")]
    BadOrder(String),
    #[error("no node with label {0}")]
    NoSuchLabel(String),
    #[error("node id {0} out of range")]
    NoSuchNode(NodeId),
    #[error("join tree invariant violated: {0}")]
    InvalidTree(String),
    #[error("no node label covers the domain {0}")]
    NoCoveringNode(String),

    // --- propagation ---
    #[error("nodes {0} and {1} are not joined by an edge")]
    NotAnEdge(NodeId, NodeId),
    #[error("message {from} -> {to} has not been computed yet")]
    MissingMessage { from: NodeId, to: NodeId },
    #[error("joint state space has {cells} cells, above the cap of {cap}")]
    JointTooLarge { cells: usize, cap: usize },

    // --- network files ---
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error in `{path}`: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("invalid network file: {0}")]
    BadNetwork(String),
}
