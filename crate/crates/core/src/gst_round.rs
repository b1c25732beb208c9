//! Rounding for degree-bounded group Steiner tree on trees: hop levels over
//! the power-of-two solution, `γ`-capped scaling, independent top-down
//! rounding repeated `M` times, and the union of the sampled subtrees.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instances::GroupTreeInstance;
use crate::lpcore::{check_modified, modify_gst_solution, solve_gst_lp, ModifiedSolution, SolveOptions};
use crate::rng::stream_rng;
use crate::treekit::RootedTree;
use crate::{Error, SCHEMA_VERSION};

/// Relative slack in the deterministic scans over scaled values.
const SCAN_TOL: f64 = 1e-9;

/// `L = ⌈log₂(2n)⌉`.
pub fn level_count(n: usize) -> u32 {
    (2 * n.max(1)).next_power_of_two().trailing_zeros()
}

/// `γ = max(⌊log₂ L⌋ − 2, 0)`.
pub fn gamma(big_l: u32) -> u32 {
    (big_l.max(1).ilog2()).saturating_sub(2)
}

/// `ℓ_u`: strict decreases of `x̃` on the root path of `u`; `None` for
/// dropped vertices.
pub fn compute_hop_levels(tree: &RootedTree, xt: &[f64]) -> Vec<Option<u32>> {
    let mut level = vec![None; tree.len()];
    for u in tree.preorder() {
        if xt[u] <= 0.0 {
            continue;
        }
        level[u] = match tree.parent(u) {
            None => Some(0),
            Some(p) => level[p].map(|lp| lp + u32::from(xt[u] < xt[p])),
        };
    }
    level
}

/// `x′_u = 2^{min(ℓ_u, γ)}·x̃_u`, and 0 for dropped vertices.
pub fn scale_solution(xt: &[f64], level: &[Option<u32>], gamma: u32) -> Vec<f64> {
    xt.iter()
        .zip(level)
        .map(|(&x, l)| l.map_or(0.0, |l| x * f64::from(l.min(gamma)).exp2()))
        .collect()
}

/// `α_ℓ` for `ℓ = 0..=γ` (index `ℓ`): `α_γ = 1/(2L)` and
/// `α_ℓ = 2α_{ℓ+1} − 4α_{ℓ+1}²`.
pub fn alpha_sequence(big_l: u32, gamma: u32) -> Vec<f64> {
    let mut alpha = vec![0.0; gamma as usize + 1];
    alpha[gamma as usize] = 1.0 / (2.0 * f64::from(big_l));
    for l in (0..gamma as usize).rev() {
        let a = alpha[l + 1];
        alpha[l] = 2.0 * a - 4.0 * a * a;
    }
    alpha
}

/// Default repetition count `⌈ln(10k) / −ln(1 − α₀/2)⌉`.
pub fn default_repetitions(k: usize, alpha0: f64) -> usize {
    let fail = -(-alpha0 / 2.0).ln_1p();
    ((10.0 * k.max(1) as f64).ln() / fail).ceil().max(1.0) as usize
}

/// The modified solution with its hop levels and scaled values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledSolution {
    pub x_tilde: Vec<f64>,
    pub level: Vec<Option<u32>>,
    #[serde(rename = "L")]
    pub big_l: u32,
    pub gamma: u32,
    pub x_prime: Vec<f64>,
}

impl ScaledSolution {
    pub fn new(tree: &RootedTree, xt: &ModifiedSolution) -> Self {
        Self::with_gamma_cap(tree, xt, None)
    }

    /// As [`ScaledSolution::new`] with `γ` lowered to at most `cap`.
    pub fn with_gamma_cap(tree: &RootedTree, xt: &ModifiedSolution, cap: Option<u32>) -> Self {
        let big_l = level_count(tree.len());
        let gamma = cap.map_or(gamma(big_l), |c| c.min(gamma(big_l)));
        let level = compute_hop_levels(tree, &xt.x);
        let x_prime = scale_solution(&xt.x, &level, gamma);
        ScaledSolution { x_tilde: xt.x.clone(), level, big_l, gamma, x_prime }
    }

    /// Edges `(u, v)` with `x′_v > x′_u`.
    pub fn monotonicity_violations(&self, tree: &RootedTree) -> Vec<(usize, usize)> {
        (0..tree.len())
            .filter_map(|v| tree.parent(v).map(|u| (u, v)))
            .filter(|&(u, v)| self.x_prime[v] > self.x_prime[u] * (1.0 + SCAN_TOL))
            .collect()
    }

    /// `Σ_{v child of u} x′_v / x′_u` for every retained `u`, 0 elsewhere.
    pub fn branching_mass(&self, tree: &RootedTree) -> Vec<f64> {
        (0..tree.len())
            .map(|u| {
                if self.x_prime[u] > 0.0 {
                    tree.children(u).iter().map(|&v| self.x_prime[v]).sum::<f64>() / self.x_prime[u]
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// `z_u = Σ x̃_o` over members `o` of `group` in the subtree of `u`.
pub fn group_mass_below(tree: &RootedTree, xt: &[f64], group: &[usize]) -> Vec<f64> {
    let mut z = vec![0.0; tree.len()];
    for &o in group {
        z[o] = xt[o];
    }
    for u in tree.preorder().into_iter().rev() {
        if let Some(p) = tree.parent(u) {
            z[p] += z[u];
        }
    }
    z
}

/// Independent top-down rounding over fixed `x′`: from a selected `u`, each
/// retained child `v` is selected with probability `x′_v / x′_u`.
#[derive(Debug, Clone)]
pub struct GstSampler {
    root: usize,
    /// Retained children with their selection probability.
    children: Vec<Vec<(usize, f64)>>,
}

impl GstSampler {
    pub fn new(tree: &RootedTree, x_prime: &[f64]) -> Result<Self, Error> {
        let root = tree.root();
        if (x_prime[root] - 1.0).abs() > SCAN_TOL {
            return Err(Error::Invariant(format!("scaled root value {} is not 1", x_prime[root])));
        }
        let mut children = vec![Vec::new(); tree.len()];
        for (u, list) in children.iter_mut().enumerate() {
            if x_prime[u] <= 0.0 {
                continue;
            }
            for &v in tree.children(u) {
                if x_prime[v] <= 0.0 {
                    continue;
                }
                let ratio = x_prime[v] / x_prime[u];
                if ratio > 1.0 + SCAN_TOL {
                    return Err(Error::Invariant(format!("selection ratio {ratio} above 1 on edge ({u}, {v})")));
                }
                list.push((v, ratio.min(1.0)));
            }
        }
        Ok(GstSampler { root, children })
    }

    /// Selected vertices, sorted; always contains the root.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut selected = vec![self.root];
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            for &(v, p) in &self.children[u] {
                if p >= 1.0 || rng.gen::<f64>() < p {
                    selected.push(v);
                    stack.push(v);
                }
            }
        }
        selected.sort_unstable();
        selected
    }
}

pub fn recursive_round<R: Rng + ?Sized>(tree: &RootedTree, x_prime: &[f64], rng: &mut R) -> Result<Vec<usize>, Error> {
    Ok(GstSampler::new(tree, x_prime)?.sample(rng))
}

/// Everything the rounding needs, computed once per instance.
#[derive(Debug, Clone)]
pub struct GstPreparation {
    pub tree: RootedTree,
    pub lp_cost: f64,
    pub lp_x: Vec<f64>,
    pub modified: ModifiedSolution,
    pub scaled: ScaledSolution,
    pub alpha: Vec<f64>,
    pub sampler: GstSampler,
}

/// Solves the LP, modifies and scales it, and checks the modification
/// properties, scaled monotonicity and `Σ x′_v/x′_u ≤ 4d_u`.
pub fn prepare_gst(inst: &GroupTreeInstance) -> Result<GstPreparation, Error> {
    prepare_gst_with(inst, None)
}

/// [`prepare_gst`] with `γ` clamped to at most `gamma_cap`.
pub fn prepare_gst_with(inst: &GroupTreeInstance, gamma_cap: Option<u32>) -> Result<GstPreparation, Error> {
    inst.validate()?;
    let (lp, sol) = solve_gst_lp(inst, &SolveOptions::default())?;
    if !sol.is_optimal() {
        return Err(Error::Infeasible("some group cannot be reached within the degree bounds".into()));
    }
    let tree = lp.tree;
    let modified = modify_gst_solution(&sol.x, &tree);
    let violations = check_modified(inst, &tree, &modified, sol.objective);
    if !violations.is_empty() {
        return Err(Error::Modification(violations));
    }
    let scaled = ScaledSolution::with_gamma_cap(&tree, &modified, gamma_cap);
    if let Some(&(u, v)) = scaled.monotonicity_violations(&tree).first() {
        return Err(Error::Invariant(format!("scaled value grows on edge ({u}, {v})")));
    }
    for (u, mass) in scaled.branching_mass(&tree).into_iter().enumerate() {
        let cap = 4.0 * f64::from(inst.degree_bound[u]);
        if mass > cap * (1.0 + SCAN_TOL) {
            return Err(Error::Invariant(format!("branching mass {mass} at {u} exceeds {cap}")));
        }
    }
    let alpha = alpha_sequence(scaled.big_l, scaled.gamma);
    let sampler = GstSampler::new(&tree, &scaled.x_prime)?;
    Ok(GstPreparation { tree, lp_cost: sol.objective, lp_x: sol.x, modified, scaled, alpha, sampler })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GstRunParams {
    /// Repetitions; defaults to the calibrated `M`.
    pub m: Option<usize>,
    pub seed: u64,
    /// Upper bound on `γ`; the computed value is used when absent or larger.
    pub gamma_cap: Option<u32>,
    /// Label copied into the report.
    pub instance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GstRunReport {
    pub schema_version: u32,
    pub instance: String,
    pub seed: u64,
    #[serde(rename = "L")]
    pub big_l: u32,
    pub gamma: u32,
    pub alpha: Vec<f64>,
    pub alpha0: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub lp_cost: f64,
    pub modified_cost: f64,
    pub repetition_costs: Vec<u64>,
    pub repetition_vertices: Vec<Vec<usize>>,
    pub union_vertices: Vec<usize>,
    pub union_cost: u64,
    /// Whether the union contains a member of each group.
    pub coverage: Vec<bool>,
    /// Repetitions whose subtree contains a member of each group.
    pub group_hits: Vec<usize>,
    /// `z_r` of each group.
    pub root_mass: Vec<f64>,
    /// Non-synthetic children in the union over the original bound, for
    /// every vertex with such children.
    pub degree_violations: BTreeMap<usize, f64>,
}

impl GstRunReport {
    pub fn all_covered(&self) -> bool {
        self.coverage.iter().all(|&c| c)
    }
}

pub fn run_gst(inst: &GroupTreeInstance, params: &GstRunParams) -> Result<GstRunReport, Error> {
    let prep = prepare_gst_with(inst, params.gamma_cap)?;
    run_gst_rounding(inst, &prep, params)
}

pub fn run_gst_rounding(inst: &GroupTreeInstance, prep: &GstPreparation, params: &GstRunParams) -> Result<GstRunReport, Error> {
    let alpha0 = prep.alpha[0];
    let m = params.m.unwrap_or_else(|| default_repetitions(inst.k(), alpha0));
    if m == 0 {
        return Err(Error::Invariant("at least one repetition is required".into()));
    }
    let samples: Vec<Vec<usize>> =
        (0..m).into_par_iter().map(|i| prep.sampler.sample(&mut stream_rng(params.seed, i as u64))).collect();

    let group_of = inst.group_of();
    let mut union = BTreeSet::new();
    let mut group_hits = vec![0usize; inst.k()];
    for s in &samples {
        let mut hit = vec![false; inst.k()];
        for &v in s {
            if let Some(t) = group_of[v] {
                hit[t] = true;
            }
        }
        hit.iter().zip(group_hits.iter_mut()).for_each(|(&h, c)| *c += usize::from(h));
        union.extend(s.iter().copied());
    }
    let union_vertices: Vec<usize> = union.into_iter().collect();
    let mut in_union = vec![false; inst.vertex_count()];
    union_vertices.iter().for_each(|&v| in_union[v] = true);
    let coverage = inst.groups.iter().map(|g| g.iter().any(|&o| in_union[o])).collect();

    let synthetic = inst.synthetic_children();
    let mut degree_violations = BTreeMap::new();
    for &u in &union_vertices {
        let kids = prep.tree.children(u).iter().filter(|&&v| in_union[v] && !inst.synthetic_leaf[v]).count();
        if kids > 0 {
            let bound = inst.degree_bound[u].saturating_sub(synthetic[u]).max(1);
            degree_violations.insert(u, kids as f64 / f64::from(bound));
        }
    }
    let root_mass = inst
        .groups
        .iter()
        .map(|g| g.iter().map(|&o| prep.modified.x[o]).sum())
        .collect();

    Ok(GstRunReport {
        schema_version: SCHEMA_VERSION,
        instance: params.instance.clone(),
        seed: params.seed,
        big_l: prep.scaled.big_l,
        gamma: prep.scaled.gamma,
        alpha: prep.alpha.clone(),
        alpha0,
        m,
        lp_cost: prep.lp_cost,
        modified_cost: prep.modified.cost(inst),
        repetition_costs: samples.iter().map(|s| inst.vertex_cost_sum(s)).collect(),
        union_cost: inst.vertex_cost_sum(&union_vertices),
        repetition_vertices: samples,
        union_vertices,
        coverage,
        group_hits,
        root_mass,
        degree_violations,
    })
}
