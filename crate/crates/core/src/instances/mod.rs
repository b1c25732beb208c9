//! Instance data model, file formats and preprocessing for both problems.

mod directed;
mod group;
pub mod io;
mod multitree;
mod normalize;

use thiserror::Error;

pub use directed::{DirectedInstance, Edge};
pub use group::{preprocess_gst, GroupTreeInstance};
pub use io::{parse_dst, parse_gst, serialize_dst, serialize_gst, ParseError, ParseErrorKind};
pub use multitree::{GoodnessViolation, MultiTree};
pub use normalize::{normalize, NormalizedInstance, PhiKind, VertexOrigin};

use crate::treekit::TreeError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance has no vertices")]
    Empty,
    #[error("{what} has length {found}, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },
    #[error("{what} id {id} out of range (n = {n})")]
    IdOutOfRange { what: &'static str, id: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("no terminals or groups")]
    NoTerminals,
    #[error("root {0} is listed as a terminal")]
    RootIsTerminal(usize),
    #[error("terminal {0} listed twice")]
    DuplicateTerminal(usize),
    #[error("vertex {0} has degree bound 0")]
    ZeroDegreeBound(usize),
    #[error("edge ({0}, {1}) is not in the graph")]
    MissingEdge(usize, usize),
    #[error("edge set is not an arborescence rooted at the root")]
    NotAnArborescence,
    #[error("tree structure: {0}")]
    Tree(TreeError),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("member {vertex} of group {group} is not a leaf")]
    GroupMemberNotLeaf { group: usize, vertex: usize },
    #[error("vertex {vertex} belongs to more than one group")]
    OverlappingGroups { vertex: usize },
    #[error("synthetic leaf {0} must be a zero-cost leaf")]
    BadSyntheticLeaf(usize),
}
