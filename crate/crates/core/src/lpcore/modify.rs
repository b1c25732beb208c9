use serde::Serialize;

use crate::instances::GroupTreeInstance;
use crate::treekit::RootedTree;

/// Relative slack for values that already sit on a power of two up to
/// solver noise; such values are snapped instead of doubled.
const SNAP_TOL: f64 = 1e-7;
/// Relative slack in the property checks.
const CHECK_TOL: f64 = 1e-6;

/// `x̃`: every value is 0 or a power of two in `[1/(2n), 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModifiedSolution {
    pub x: Vec<f64>,
    /// `x̃_u = 2^{-exponent[u]}` for retained vertices.
    pub exponent: Vec<Option<u32>>,
}

impl ModifiedSolution {
    pub fn retained(&self, u: usize) -> bool {
        self.exponent[u].is_some()
    }

    pub fn cost(&self, inst: &GroupTreeInstance) -> f64 {
        self.x.iter().zip(&inst.cost).map(|(x, &c)| x * c as f64).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PropertyViolation {
    /// P1: not a power of two in range.
    NotPowerOfTwo { vertex: usize, value: f64 },
    /// P2: child above parent.
    NotMonotone { parent: usize, child: usize },
    /// P3: group mass outside `[1/2, 2]`.
    GroupMass { group: usize, mass: f64 },
    /// P4: group mass below `u` above `2x̃_u`.
    Capacity { vertex: usize, group: usize, mass: f64 },
    /// P5: child mass above `2 d_u x̃_u`.
    Degree { vertex: usize, mass: f64 },
    /// P6: cost more than twice the LP cost.
    Cost { modified: f64, lp: f64 },
}

/// Drops values below `1/(2n)` (and everything under a dropped vertex), then
/// rounds the rest up to the next power of two.
pub fn modify_gst_solution(x: &[f64], tree: &RootedTree) -> ModifiedSolution {
    let n = tree.len();
    let threshold = 1.0 / (2.0 * n as f64);
    let mut out = vec![0.0; n];
    let mut exponent = vec![None; n];
    for u in tree.preorder() {
        let parent_kept = tree.parent(u).is_none_or(|p| exponent[p].is_some());
        if !parent_kept || x[u] < threshold {
            continue;
        }
        let e = round_up_exponent(x[u].min(1.0));
        exponent[u] = Some(e);
        out[u] = (-(e as f64)).exp2();
    }
    ModifiedSolution { x: out, exponent }
}

/// Smallest `i ≥ 0` with `2^{-i} ≥ v`, treating `v` within `SNAP_TOL` above
/// a power of two as equal to it.
fn round_up_exponent(v: f64) -> u32 {
    let mut e = (-v.log2()).floor().max(0.0) as u32;
    // Repair floating error in log2 so that 2^{-e} ≥ v(1 - SNAP_TOL) and 2^{-e-1} < v(1 - SNAP_TOL).
    while e > 0 && (-(e as f64)).exp2() < v * (1.0 - SNAP_TOL) {
        e -= 1;
    }
    while (-((e + 1) as f64)).exp2() >= v * (1.0 - SNAP_TOL) {
        e += 1;
    }
    e
}

/// Scans P1–P6 for `xt` against the LP solution value `lp_cost`.
pub fn check_modified(
    inst: &GroupTreeInstance,
    tree: &RootedTree,
    xt: &ModifiedSolution,
    lp_cost: f64,
) -> Vec<PropertyViolation> {
    let n = tree.len();
    let mut v = Vec::new();
    let floor = 1.0 / (2.0 * n as f64);
    for u in 0..n {
        let val = xt.x[u];
        if val != 0.0 {
            let e = -val.log2();
            let ok = e.fract() == 0.0 && val <= 1.0 && val >= floor * (1.0 - CHECK_TOL) && xt.retained(u);
            if !ok {
                v.push(PropertyViolation::NotPowerOfTwo { vertex: u, value: val });
            }
        }
        if let Some(p) = tree.parent(u) {
            if xt.x[u] > xt.x[p] {
                v.push(PropertyViolation::NotMonotone { parent: p, child: u });
            }
        }
    }
    let order = tree.preorder();
    for (t, g) in inst.groups.iter().enumerate() {
        let mass: f64 = g.iter().map(|&o| xt.x[o]).sum();
        if !(0.5 * (1.0 - CHECK_TOL)..=2.0 * (1.0 + CHECK_TOL)).contains(&mass) {
            v.push(PropertyViolation::GroupMass { group: t, mass });
        }
        let mut below = vec![0.0; n];
        for &o in g {
            below[o] = xt.x[o];
        }
        for &u in order.iter().rev() {
            if let Some(p) = tree.parent(u) {
                below[p] += below[u];
            }
            if below[u] > 2.0 * xt.x[u] * (1.0 + CHECK_TOL) {
                v.push(PropertyViolation::Capacity { vertex: u, group: t, mass: below[u] });
            }
        }
    }
    for u in 0..n {
        let mass: f64 = tree.children(u).iter().map(|&c| xt.x[c]).sum();
        if mass > 2.0 * inst.degree_bound[u] as f64 * xt.x[u] * (1.0 + CHECK_TOL) {
            v.push(PropertyViolation::Degree { vertex: u, mass });
        }
    }
    let modified = xt.cost(inst);
    if modified > 2.0 * lp_cost + CHECK_TOL * lp_cost.abs().max(1.0) {
        v.push(PropertyViolation::Cost { modified, lp: lp_cost });
    }
    v
}
