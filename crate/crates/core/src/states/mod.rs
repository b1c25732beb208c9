//! States, good state trees and the super-tree of all candidate state trees.

mod state;
mod state_tree;
mod super_tree;

use thiserror::Error;

pub use state::{
    base_item_agrees, degree_vectors_consistent, edge_agrees, is_allowable_child_pair, triple_agrees, BaseItem,
    State,
};
pub use state_tree::{
    gen_state_tree, stitch_multi_tree, validate_state_tree, Content, StateTree, StateTreeNode, StateTreeViolation,
};
pub use super_tree::{build_super_tree, KindCounts, NodeKind, StateId, SuperNode, SuperTree, DEFAULT_NODE_CAP};

use crate::instances::{GoodnessViolation, InstanceError};
use crate::treekit::TreeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("edge or triple does not match the portal set of the state")]
    AgreementPrecondition,
    #[error("multi-tree is not good: {0:?}")]
    NotGood(Vec<GoodnessViolation>),
    #[error("vertex {0} appears more than once in the tree")]
    RepeatedLabel(usize),
    #[error("tree has no edges")]
    TrivialTree,
    #[error("decomposition deeper than the height budget {budget}")]
    DepthExceeded { budget: usize },
    #[error("state tree fails validation: {0:?}")]
    InvalidStateTree(Vec<StateTreeViolation>),
    #[error("selection is not a valid extended state tree at node {node}")]
    BadSelection { node: usize },
    #[error(
        "super-tree would have {total} nodes, above the cap of {cap} (exceeded at state level {level}); \
         lower n, the height budget or the degree bounds"
    )]
    CapExceeded { cap: usize, total: u64, level: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}
