//! Bicriteria approximation for degree-bounded directed Steiner tree and
//! degree-bounded group Steiner tree on trees, by LP rounding.
//!
//! The directed pipeline normalizes the graph, builds the super-tree of
//! candidate state trees, solves its LP relaxation and rounds it repeatedly.
//! The group pipeline solves the tree LP, snaps the solution to powers of two,
//! scales it by hop level and rounds top-down. Exact oracles provide ground
//! truth at small sizes.

pub mod dst_round;
pub mod generate;
pub mod gst_round;
pub mod instances;
pub mod lpcore;
pub mod oracle;
pub mod rng;
pub mod states;
pub mod stats;
pub mod treekit;
pub mod verify;

mod error;

pub use error::Error;
pub use instances::{
    normalize, parse_dst, parse_gst, preprocess_gst, serialize_dst, serialize_gst, DirectedInstance, Edge,
    GroupTreeInstance, MultiTree, NormalizedInstance,
};
pub use treekit::RootedTree;

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
