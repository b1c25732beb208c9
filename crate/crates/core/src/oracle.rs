//! Exact solvers for desk-scale instances: branch-and-bound for DB-DST and
//! a subset dynamic program for DB-GST-T.

use serde::Serialize;
use thiserror::Error;

use crate::instances::{DirectedInstance, GroupTreeInstance, InstanceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub max_groups: usize,
    pub max_tree_vertices: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_vertices: 12, max_edges: 24, max_groups: 12, max_tree_vertices: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExactStatus {
    Optimal,
    Infeasible,
}

/// `edges` (original edge ids, DST) or `vertices` (GST) of an optimal
/// solution, both sorted; empty when infeasible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactResult {
    pub status: ExactStatus,
    pub cost: Option<u64>,
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
}

impl ExactResult {
    fn infeasible() -> Self {
        ExactResult { status: ExactStatus::Infeasible, cost: None, edges: Vec::new(), vertices: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the exact-solver limit {limit}")]
    TooLarge { what: &'static str, value: usize, limit: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

pub fn exact_dst(inst: &DirectedInstance) -> Result<ExactResult, OracleError> {
    exact_dst_with(inst, &OracleLimits::default())
}

/// Minimum-cost out-arborescence from the root covering every terminal with
/// out-degrees within bounds.
///
/// Vertices are visited in breadth-first order from the root and each one
/// picks its incoming edge or stays out of the tree (terminals must pick an
/// edge). A branch is cut when a degree bound would be exceeded, when its
/// tail is already out of the tree, when it closes a cycle, or when the cost
/// so far plus the cheapest incoming edge of every undecided terminal
/// reaches the incumbent.
pub fn exact_dst_with(inst: &DirectedInstance, limits: &OracleLimits) -> Result<ExactResult, OracleError> {
    inst.validate()?;
    if inst.vertex_count > limits.max_vertices {
        return Err(OracleError::TooLarge { what: "n", value: inst.vertex_count, limit: limits.max_vertices });
    }
    if inst.edges.len() > limits.max_edges {
        return Err(OracleError::TooLarge { what: "|E|", value: inst.edges.len(), limit: limits.max_edges });
    }
    let n = inst.vertex_count;
    let reach = inst.reachable_from_root();
    if inst.terminals.iter().any(|&t| !reach[t]) {
        return Ok(ExactResult::infeasible());
    }
    let mut in_edges = vec![Vec::new(); n];
    for (i, e) in inst.edges.iter().enumerate() {
        if reach[e.from] && e.to != inst.root {
            in_edges[e.to].push(i);
        }
    }
    for list in &mut in_edges {
        list.sort_by_key(|&i| (inst.edges[i].cost, i));
    }
    let is_terminal = inst.is_terminal_mask();
    let min_in: Vec<u64> = in_edges.iter().map(|l| l.first().map_or(0, |&i| inst.edges[i].cost)).collect();

    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[inst.root] = true;
    let mut queue = std::collections::VecDeque::from([inst.root]);
    let out = inst.out_edges();
    while let Some(u) = queue.pop_front() {
        if u != inst.root {
            order.push(u);
        }
        for &e in &out[u] {
            let v = inst.edges[e].to;
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }

    let mut s = DstSearch {
        inst,
        order: &order,
        in_edges: &in_edges,
        is_terminal: &is_terminal,
        min_in: &min_in,
        choice: vec![Choice::Undecided; n],
        out_degree: vec![0; n],
        pending_lb: inst.terminals.iter().map(|&t| min_in[t]).sum(),
        best: u64::MAX,
        best_choice: None,
    };
    s.choice[inst.root] = Choice::Root;
    s.search(0, 0);

    let Some(choice) = s.best_choice else { return Ok(ExactResult::infeasible()) };
    let mut parent_edge: Vec<Option<usize>> =
        choice.iter().map(|c| if let Choice::Edge(e) = c { Some(*e) } else { None }).collect();
    // Trim non-terminal leaves; only zero-cost edges can go.
    loop {
        let mut has_child = vec![false; n];
        for e in parent_edge.iter().flatten() {
            has_child[inst.edges[*e].from] = true;
        }
        let trim: Vec<usize> =
            (0..n).filter(|&v| parent_edge[v].is_some() && !has_child[v] && !is_terminal[v]).collect();
        if trim.is_empty() {
            break;
        }
        for v in trim {
            parent_edge[v] = None;
        }
    }
    let mut edges: Vec<usize> = parent_edge.into_iter().flatten().collect();
    edges.sort_unstable();
    let cost = inst.edge_cost_sum(&edges);
    let mut vertices: Vec<usize> = edges.iter().map(|&e| inst.edges[e].to).chain([inst.root]).collect();
    vertices.sort_unstable();
    Ok(ExactResult { status: ExactStatus::Optimal, cost: Some(cost), edges, vertices })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Choice {
    Undecided,
    Root,
    Out,
    Edge(usize),
}

struct DstSearch<'a> {
    inst: &'a DirectedInstance,
    order: &'a [usize],
    in_edges: &'a [Vec<usize>],
    is_terminal: &'a [bool],
    min_in: &'a [u64],
    choice: Vec<Choice>,
    out_degree: Vec<u32>,
    /// Σ of `min_in` over undecided terminals.
    pending_lb: u64,
    best: u64,
    best_choice: Option<Vec<Choice>>,
}

impl DstSearch<'_> {
    fn search(&mut self, pos: usize, cost: u64) {
        if cost + self.pending_lb >= self.best {
            return;
        }
        let Some(&v) = self.order.get(pos) else {
            if self.connected() {
                self.best = cost;
                self.best_choice = Some(self.choice.clone());
            }
            return;
        };
        let terminal = self.is_terminal[v];
        if terminal {
            self.pending_lb -= self.min_in[v];
        } else {
            self.choice[v] = Choice::Out;
            self.search(pos + 1, cost);
        }
        for &e in &self.in_edges[v] {
            let edge = self.inst.edges[e];
            let u = edge.from;
            if self.out_degree[u] >= self.inst.degree_bound[u] || self.choice[u] == Choice::Out || self.closes_cycle(u, v)
            {
                continue;
            }
            self.choice[v] = Choice::Edge(e);
            self.out_degree[u] += 1;
            self.search(pos + 1, cost + edge.cost);
            self.out_degree[u] -= 1;
        }
        if terminal {
            self.pending_lb += self.min_in[v];
        }
        self.choice[v] = Choice::Undecided;
    }

    fn closes_cycle(&self, mut u: usize, v: usize) -> bool {
        loop {
            if u == v {
                return true;
            }
            match self.choice[u] {
                Choice::Edge(e) => u = self.inst.edges[e].from,
                _ => return false,
            }
        }
    }

    /// Every chosen vertex hangs from the root through chosen edges.
    fn connected(&self) -> bool {
        self.order.iter().all(|&v| {
            let mut u = v;
            loop {
                match self.choice[u] {
                    Choice::Root => return true,
                    Choice::Edge(e) => u = self.inst.edges[e].from,
                    Choice::Out => return u == v,
                    Choice::Undecided => return false,
                }
            }
        })
    }
}

pub fn exact_gst(inst: &GroupTreeInstance) -> Result<ExactResult, OracleError> {
    exact_gst_with(inst, &OracleLimits::default())
}

const INF: u64 = u64::MAX;

/// Minimum-cost subtree containing the root and a member of every group,
/// where each vertex keeps at most `d_u` children.
///
/// `f_u[M]` is the cheapest subtree rooted at `u` covering at least the
/// groups in `M`. Children are merged in id order as a knapsack over the
/// number of children used, crediting each group to exactly one child.
pub fn exact_gst_with(inst: &GroupTreeInstance, limits: &OracleLimits) -> Result<ExactResult, OracleError> {
    inst.validate()?;
    let k = inst.k();
    if k > limits.max_groups {
        return Err(OracleError::TooLarge { what: "k", value: k, limit: limits.max_groups });
    }
    let n = inst.vertex_count();
    if n > limits.max_tree_vertices {
        return Err(OracleError::TooLarge { what: "n", value: n, limit: limits.max_tree_vertices });
    }
    let tree = inst.tree()?;
    let full = (1usize << k) - 1;
    let mut own = vec![0usize; n];
    for (t, g) in inst.groups.iter().enumerate() {
        for &o in g {
            own[o] |= 1 << t;
        }
    }

    let mut f: Vec<Vec<u64>> = vec![Vec::new(); n];
    // prefix[u][i][j][M] after merging the first i children of u.
    let mut prefix: Vec<Vec<Vec<Vec<u64>>>> = vec![Vec::new(); n];
    for &u in tree.preorder().iter().rev() {
        let kids = tree.children(u);
        let budget = (inst.degree_bound[u] as usize).min(kids.len());
        let mut g = vec![vec![INF; full + 1]; budget + 1];
        for (m, slot) in g[0].iter_mut().enumerate() {
            if m & !own[u] == 0 {
                *slot = inst.cost[u];
            }
        }
        let mut pre = vec![g.clone()];
        for &c in kids {
            let fc = &f[c];
            let mut next = g.clone();
            for j in 1..=budget {
                for m in 0..=full {
                    let mut best = next[j][m];
                    let mut sub = m;
                    loop {
                        let a = g[j - 1][m & !sub];
                        let b = fc[sub];
                        if a != INF && b != INF {
                            best = best.min(a + b);
                        }
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & m;
                    }
                    next[j][m] = best;
                }
            }
            g = next;
            pre.push(g.clone());
        }
        let mut fu = vec![INF; full + 1];
        for row in &g {
            for (m, &v) in row.iter().enumerate() {
                fu[m] = fu[m].min(v);
            }
        }
        f[u] = fu;
        prefix[u] = pre;
    }

    let root = tree.root();
    let cost = f[root][full];
    if cost == INF {
        return Ok(ExactResult::infeasible());
    }

    let mut vertices = Vec::new();
    let mut stack = vec![(root, full, cost)];
    while let Some((u, mask, value)) = stack.pop() {
        vertices.push(u);
        let pre = &prefix[u];
        let kids = tree.children(u);
        let mut j = (0..pre[0].len()).find(|&j| pre[kids.len()][j][mask] == value).expect("value is attained");
        let (mut m, mut val) = (mask, value);
        for i in (1..=kids.len()).rev() {
            if pre[i - 1][j][m] == val {
                continue;
            }
            let c = kids[i - 1];
            let mut sub = m;
            loop {
                let a = pre[i - 1][j - 1][m & !sub];
                let b = f[c][sub];
                if a != INF && b != INF && a + b == val {
                    break;
                }
                assert!(sub != 0, "a split attaining the value exists");
                sub = (sub - 1) & m;
            }
            stack.push((c, sub, f[c][sub]));
            val -= f[c][sub];
            m &= !sub;
            j -= 1;
        }
    }
    vertices.sort_unstable();
    Ok(ExactResult { status: ExactStatus::Optimal, cost: Some(cost), edges: Vec::new(), vertices })
}
