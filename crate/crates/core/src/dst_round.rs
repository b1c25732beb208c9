//! Randomized rounding of the super-tree LP for degree-bounded directed
//! Steiner tree: one rounding yields a good extended state tree, `Q`
//! independent roundings are unioned in the source graph and a Steiner tree
//! is extracted from the union.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instances::{DirectedInstance, MultiTree, NormalizedInstance, VertexOrigin};
use crate::lpcore::{build_dst_lp, solve_lp, DstLp, LpSolution};
use crate::rng::stream_rng;
use crate::states::{build_super_tree, NodeKind, StateTree, SuperTree, DEFAULT_NODE_CAP};
use crate::stats::Summary;
use crate::treekit::default_height;
use crate::{Error, SCHEMA_VERSION};

/// Largest accepted gap between the mass of a node and the mass of the
/// children it chooses among.
pub const EPS_PROB: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RoundingOutcome {
    /// Selected super-tree nodes, sorted.
    pub selected: Vec<usize>,
    pub state_tree: StateTree,
    pub tree: MultiTree,
    pub cost: u64,
    /// `m_v`: selected base nodes involving each normalized vertex.
    pub copies: Vec<u32>,
}

/// Top-down sampling: the super node and every selected state node keep one
/// child drawn with probability `x_q / Σ x`, a selected virtual node keeps
/// both children.
pub fn sample_selection<R: Rng + ?Sized>(st: &SuperTree, x: &[f64], rng: &mut R) -> Result<Vec<usize>, Error> {
    let root = SuperTree::ROOT;
    if (x[root] - 1.0).abs() > EPS_PROB {
        return Err(Error::ProbabilityMass { node: root, children: x[root], expected: 1.0 });
    }
    let mut selected = vec![root];
    let mut stack = vec![root];
    while let Some(p) = stack.pop() {
        match st.node(p).kind {
            NodeKind::Super | NodeKind::State(_) => {
                let kids = st.children(p);
                let total: f64 = kids.clone().map(|q| x[q]).sum();
                if (total - x[p]).abs() > EPS_PROB || total <= 0.0 {
                    return Err(Error::ProbabilityMass { node: p, children: total, expected: x[p] });
                }
                let mut u = rng.gen::<f64>() * total;
                let mut chosen = None;
                for q in kids {
                    if x[q] > 0.0 {
                        chosen = Some(q);
                        if u < x[q] {
                            break;
                        }
                        u -= x[q];
                    }
                }
                let q = chosen.expect("positive total has a positive child");
                selected.push(q);
                stack.push(q);
            }
            NodeKind::Virtual => {
                for q in st.children(p) {
                    if (x[q] - x[p]).abs() > EPS_PROB {
                        return Err(Error::ProbabilityMass { node: p, children: x[q], expected: x[p] });
                    }
                    selected.push(q);
                    stack.push(q);
                }
            }
            NodeKind::Base(_) => {}
        }
    }
    selected.sort_unstable();
    Ok(selected)
}

/// Selected base nodes involving each normalized vertex.
pub fn involvement_counts(norm: &NormalizedInstance, st: &SuperTree, selected: &[usize]) -> Vec<u32> {
    let mut copies = vec![0u32; norm.vertex_count()];
    for &o in selected {
        for v in st.involved(norm, o) {
            copies[v] += 1;
        }
    }
    copies
}

/// One rounding, converted to a state tree and stitched into a multi-tree.
pub fn round_super_tree<R: Rng + ?Sized>(
    norm: &NormalizedInstance,
    st: &SuperTree,
    x: &[f64],
    rng: &mut R,
) -> Result<RoundingOutcome, Error> {
    let selected = sample_selection(st, x, rng)?;
    let state_tree = st.state_tree_of(&selected)?;
    let tree = crate::states::stitch_multi_tree(norm, &state_tree, st.height_budget())?;
    let cost = selected.iter().map(|&o| st.cost(o)).sum();
    let copies = involvement_counts(norm, st, &selected);
    Ok(RoundingOutcome { selected, state_tree, tree, cost, copies })
}

/// `s = ln(1 + 1/(2h′))`.
pub fn mgf_parameter(h_prime: usize) -> f64 {
    (1.0 / (2.0 * h_prime.max(1) as f64)).ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexConcentration {
    pub vertex: usize,
    /// Samples of `exp(s·m_v)`.
    pub mgf: Summary,
    pub max_copies: u32,
}

/// Streaming estimate of `E[exp(s·m_v)]` and `max m_v` for every vertex.
#[derive(Debug, Clone)]
pub struct ConcentrationAccumulator {
    s: f64,
    stats: Vec<VertexConcentration>,
}

impl ConcentrationAccumulator {
    pub fn new(vertex_count: usize, s: f64) -> Self {
        let stats = (0..vertex_count)
            .map(|vertex| VertexConcentration { vertex, mgf: Summary::default(), max_copies: 0 })
            .collect();
        ConcentrationAccumulator { s, stats }
    }

    pub fn push(&mut self, copies: &[u32]) {
        for (st, &m) in self.stats.iter_mut().zip(copies) {
            st.mgf.push((self.s * m as f64).exp());
            st.max_copies = st.max_copies.max(m);
        }
    }

    pub fn finish(self) -> Vec<VertexConcentration> {
        self.stats
    }
}

pub fn concentration_stats(outcomes: &[RoundingOutcome], s: f64) -> Vec<VertexConcentration> {
    let n = outcomes.first().map_or(0, |o| o.copies.len());
    let mut acc = ConcentrationAccumulator::new(n, s);
    outcomes.iter().for_each(|o| acc.push(&o.copies));
    acc.finish()
}

/// Default repetition count `⌈(h+1)·ln(10k)⌉`.
pub fn default_repetitions(h: usize, k: usize) -> usize {
    (((h + 1) as f64) * (10.0 * k.max(1) as f64).ln()).ceil().max(1.0) as usize
}

/// Depth of the state tree generated from a source arborescence: the
/// smallest height budget whose super-tree contains that tree.
pub fn state_tree_height(norm: &NormalizedInstance, source_edges: &[usize]) -> Result<usize, Error> {
    let tree = norm.lift_tree(source_edges)?;
    let budget = default_height(tree.len()).max(64);
    Ok(crate::states::gen_state_tree(norm, &tree, budget)?.depth())
}

/// The super-tree of a normalized instance with its solved LP.
#[derive(Debug, Clone)]
pub struct DstRelaxation {
    pub super_tree: SuperTree,
    pub lp: DstLp,
    pub solution: LpSolution,
}

impl DstRelaxation {
    pub fn lp_cost(&self) -> f64 {
        self.solution.objective
    }
}

/// Builds the super-tree of height budget `h` and solves its LP.
pub fn solve_dst_relaxation(norm: &NormalizedInstance, h: usize, node_cap: usize) -> Result<DstRelaxation, Error> {
    let super_tree = build_super_tree(norm, h, node_cap)?;
    let lp = build_dst_lp(&super_tree, norm.terminals().len());
    if lp.is_trivially_infeasible() {
        let names: Vec<String> = lp.uncoverable.iter().map(|&i| norm.terminals()[i].to_string()).collect();
        return Err(Error::Infeasible(format!("no state tree of height {h} reaches terminals {}", names.join(", "))));
    }
    let solution = solve_lp(&lp.model)?;
    if !solution.is_optimal() {
        return Err(Error::Infeasible(format!("no fractional state tree of height {h} covers every terminal")));
    }
    Ok(DstRelaxation { super_tree, lp, solution })
}

/// Steiner tree pulled out of a union of source edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractedTree {
    /// Source edge ids, sorted.
    pub edges: Vec<usize>,
    pub cost: u64,
    /// Source terminals reached, sorted.
    pub covered: Vec<usize>,
    pub out_degree: Vec<u32>,
}

/// Breadth-first parent assignment from the root over `union` (out-edges in
/// edge id order), then removal of every vertex with no terminal below it.
pub fn extract_tree(src: &DirectedInstance, union: &[usize]) -> ExtractedTree {
    let n = src.vertex_count;
    let mut out = vec![Vec::new(); n];
    let mut ids: Vec<usize> = union.to_vec();
    ids.sort_unstable();
    ids.dedup();
    for &e in &ids {
        out[src.edges[e].from].push(e);
    }
    let mut parent_edge = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = vec![src.root];
    seen[src.root] = true;
    let mut queue = VecDeque::from([src.root]);
    while let Some(u) = queue.pop_front() {
        for &e in &out[u] {
            let v = src.edges[e].to;
            if !seen[v] {
                seen[v] = true;
                parent_edge[v] = Some(e);
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    let is_terminal = src.is_terminal_mask();
    let mut keep = is_terminal.clone();
    for &v in order.iter().rev() {
        if keep[v] {
            if let Some(e) = parent_edge[v] {
                keep[src.edges[e].from] = true;
            }
        }
    }
    let mut edges: Vec<usize> = order.iter().filter(|&&v| keep[v]).filter_map(|&v| parent_edge[v]).collect();
    edges.sort_unstable();
    let mut out_degree = vec![0u32; n];
    for &e in &edges {
        out_degree[src.edges[e].from] += 1;
    }
    let covered = (0..n).filter(|&v| is_terminal[v] && seen[v]).collect();
    ExtractedTree { cost: src.edge_cost_sum(&edges), edges, covered, out_degree }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DstRunParams {
    /// Height budget of the super-tree; defaults to the bound for the
    /// normalized vertex count.
    pub h: Option<usize>,
    /// Repetitions; defaults to `⌈(h+1)·ln(10k)⌉`.
    pub q: Option<usize>,
    pub seed: u64,
    pub node_cap: usize,
    /// Label copied into the report.
    pub instance: String,
}

impl Default for DstRunParams {
    fn default() -> Self {
        DstRunParams { h: None, q: None, seed: 0, node_cap: DEFAULT_NODE_CAP, instance: String::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub covered: usize,
    pub total: usize,
}

impl Coverage {
    pub fn is_full(&self) -> bool {
        self.covered == self.total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexMgf {
    pub vertex: usize,
    pub source: usize,
    pub mgf: f64,
    pub max_copies: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfStats {
    pub h_prime: usize,
    pub s: f64,
    /// `1 + 1/h′`.
    pub bound: f64,
    pub max_mgf: f64,
    /// Vertices involved in at least one repetition.
    pub vertices: Vec<VertexMgf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DstRunReport {
    pub schema_version: u32,
    pub instance: String,
    pub seed: u64,
    pub h: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub lp_cost: f64,
    pub repetition_costs: Vec<u64>,
    pub union_edges: Vec<usize>,
    pub union_cost: u64,
    pub tree_edges: Vec<(usize, usize)>,
    pub tree_cost: u64,
    pub coverage: Coverage,
    pub uncovered: Vec<usize>,
    /// `out-degree / d_v` in the extracted tree for every vertex with
    /// children.
    pub degree_violations: BTreeMap<usize, f64>,
    pub mgf_stats: MgfStats,
}

/// Builds the super-tree, solves its LP and runs the repeated rounding.
pub fn run_dst(norm: &NormalizedInstance, params: &DstRunParams) -> Result<DstRunReport, Error> {
    let h = params.h.unwrap_or_else(|| default_height(norm.vertex_count()));
    let relax = solve_dst_relaxation(norm, h, params.node_cap)?;
    run_dst_rounding(norm, &relax, params)
}

/// Repeated rounding over an already solved relaxation.
pub fn run_dst_rounding(
    norm: &NormalizedInstance,
    relax: &DstRelaxation,
    params: &DstRunParams,
) -> Result<DstRunReport, Error> {
    let st = &relax.super_tree;
    let x = &relax.solution.x;
    let src = &norm.source;
    let h = st.height_budget();
    let q = params.q.unwrap_or_else(|| default_repetitions(h, src.k()));
    if q == 0 {
        return Err(Error::Invariant("at least one repetition is required".into()));
    }
    let outcomes: Vec<RoundingOutcome> = (0..q)
        .into_par_iter()
        .map(|i| round_super_tree(norm, st, x, &mut stream_rng(params.seed, i as u64)))
        .collect::<Result<_, _>>()?;

    let mut union = BTreeSet::new();
    let mut source_copies = vec![0u64; src.vertex_count];
    for o in &outcomes {
        let bad = o.tree.check_good(norm);
        if !bad.is_empty() {
            return Err(Error::Invariant(format!("stitched multi-tree is not good: {bad:?}")));
        }
        union.extend(norm.project_edges(&o.tree)?);
        for &l in &o.tree.labels {
            if let VertexOrigin::Original(v) = norm.origin[l] {
                source_copies[v] += 1;
            }
        }
    }
    let union_edges: Vec<usize> = union.into_iter().collect();
    let mut union_out = vec![0u64; src.vertex_count];
    for &e in &union_edges {
        union_out[src.edges[e].from] += 1;
    }
    for v in 0..src.vertex_count {
        if union_out[v] > source_copies[v] * src.degree_bound[v] as u64 {
            return Err(Error::Invariant(format!(
                "vertex {v} has out-degree {} in the union but only {} copies",
                union_out[v], source_copies[v]
            )));
        }
    }

    let tree = extract_tree(src, &union_edges);
    let degree_violations = (0..src.vertex_count)
        .filter(|&v| tree.out_degree[v] > 0)
        .map(|v| (v, tree.out_degree[v] as f64 / src.degree_bound[v] as f64))
        .collect();
    let uncovered: Vec<usize> = src.terminals.iter().copied().filter(|t| tree.covered.binary_search(t).is_err()).collect();

    let h_prime = st.height();
    let s = mgf_parameter(h_prime);
    let mut acc = ConcentrationAccumulator::new(norm.vertex_count(), s);
    outcomes.iter().for_each(|o| acc.push(&o.copies));
    let vertices: Vec<VertexMgf> = acc
        .finish()
        .into_iter()
        .filter(|c| c.max_copies > 0)
        .map(|c| VertexMgf {
            vertex: c.vertex,
            source: norm.source_vertex(c.vertex),
            mgf: c.mgf.mean,
            max_copies: c.max_copies,
        })
        .collect();
    let max_mgf = vertices.iter().map(|v| v.mgf).fold(1.0, f64::max);

    Ok(DstRunReport {
        schema_version: SCHEMA_VERSION,
        instance: params.instance.clone(),
        seed: params.seed,
        h,
        q,
        lp_cost: relax.lp_cost(),
        repetition_costs: outcomes.iter().map(|o| o.cost).collect(),
        union_cost: src.edge_cost_sum(&union_edges),
        union_edges,
        tree_edges: tree.edges.iter().map(|&e| (src.edges[e].from, src.edges[e].to)).collect(),
        tree_cost: tree.cost,
        coverage: Coverage { covered: tree.covered.len(), total: src.terminals.len() },
        uncovered,
        degree_violations,
        mgf_stats: MgfStats { h_prime, s, bound: 1.0 + 1.0 / h_prime.max(1) as f64, max_mgf, vertices },
    })
}
