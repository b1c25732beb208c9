//! Sparse LP models for both relaxations, a checked solver entry point and
//! the power-of-two modification of fractional GST solutions.

mod dst_lp;
mod gst_lp;
mod model;
mod modify;
mod solve;

use thiserror::Error;

pub use dst_lp::{build_dst_lp, build_dst_lp_with, DstLp, DstLpOptions};
pub use gst_lp::{build_gst_lp, relevant_vertices, solve_gst_lp, GstLp};
pub use model::{LpModel, LpSolution, LpStatus, Relation, Row, RowTag};
pub use modify::{check_modified, modify_gst_solution, ModifiedSolution, PropertyViolation};
pub use solve::{solve_lp, solve_lp_with, Backend, SolveOptions};

/// Largest constraint or bound violation accepted in an optimal solution.
pub const EPS_FEAS: f64 = 1e-9;
/// Relative objective tolerance used when comparing LP values.
pub const EPS_OBJ: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("solver stopped at its iteration or time limit")]
    IterationLimit,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("solver answer violates a constraint by {violation:e}")]
    Inaccurate { violation: f64 },
    #[error("solver failure: {0}")]
    Backend(String),
}

/// `a ≤ b` up to the relative objective tolerance.
pub fn le_rel(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * b.abs().max(1.0)
}
