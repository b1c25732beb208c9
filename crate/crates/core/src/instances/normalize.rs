use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{DirectedInstance, Edge, InstanceError, MultiTree};
use crate::treekit::RootedTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexOrigin {
    Original(usize),
    /// The sink copy `t′` split off terminal `t`.
    TerminalCopy(usize),
    /// Internal vertex of the binary gadget replacing the out-star of `owner`.
    Gadget { owner: usize },
}

/// How a child's original degree contributes to its parent's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiKind {
    ConstOne,
    Identity,
}

impl PhiKind {
    pub fn apply(self, rho: u32) -> u32 {
        match self {
            PhiKind::ConstOne => 1,
            PhiKind::Identity => rho,
        }
    }
}

/// An instance in which every terminal is a sink with one in-edge and
/// every non-terminal has out-degree at most two.
///
/// Vertex ids `0..n` are the original vertices; terminal copies follow in
/// terminal order, then gadget vertices grouped by owner id.
#[derive(Debug, Clone)]
pub struct NormalizedInstance {
    pub graph: DirectedInstance,
    pub source: DirectedInstance,
    pub origin: Vec<VertexOrigin>,
    pub phi: Vec<PhiKind>,
    /// Original edge whose cost a normalized edge carries, if any.
    pub edge_origin: Vec<Option<usize>>,
    out: Vec<Vec<usize>>,
    is_terminal: Vec<bool>,
    lookup: HashMap<(usize, usize), usize>,
    terminal_copy: Vec<Option<usize>>,
    max_rho: Vec<u32>,
}

impl NormalizedInstance {
    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count
    }

    pub fn root(&self) -> usize {
        self.graph.root
    }

    pub fn terminals(&self) -> &[usize] {
        &self.graph.terminals
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.is_terminal[v]
    }

    pub fn degree_bound(&self, v: usize) -> u32 {
        self.graph.degree_bound[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.graph.edges[e]
    }

    /// Outgoing edge ids of `v` ordered by head id (at most two for
    /// non-terminals, none for terminals).
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.lookup.get(&(u, v)).copied()
    }

    pub fn phi(&self, v: usize, rho: u32) -> u32 {
        self.phi[v].apply(rho)
    }

    /// Largest original degree `v` can have in any tree: the number of
    /// non-gadget vertices reachable from `v` through gadget vertices only.
    pub fn max_rho(&self, v: usize) -> u32 {
        self.max_rho[v]
    }

    /// The vertex of the source instance a normalized vertex stands for;
    /// gadget vertices map to their owner.
    pub fn source_vertex(&self, v: usize) -> usize {
        match self.origin[v] {
            VertexOrigin::Original(u) | VertexOrigin::TerminalCopy(u) => u,
            VertexOrigin::Gadget { owner } => owner,
        }
    }

    pub fn terminal_copy(&self, t: usize) -> Option<usize> {
        self.terminal_copy[t]
    }

    /// Maps the edges of a multi-tree back to source edge ids, sorted and
    /// deduplicated.
    pub fn project_edges(&self, tree: &MultiTree) -> Result<Vec<usize>, InstanceError> {
        let mut ids = HashSet::new();
        for a in 0..tree.tree.len() {
            if let Some(p) = tree.tree.parent(a) {
                let (u, v) = (tree.labels[p], tree.labels[a]);
                let e = self.edge_id(u, v).ok_or(InstanceError::MissingEdge(u, v))?;
                if let Some(orig) = self.edge_origin[e] {
                    ids.insert(orig);
                }
            }
        }
        let mut ids: Vec<usize> = ids.into_iter().collect();
        ids.sort_unstable();
        Ok(ids)
    }

    /// Lifts an arborescence of the source instance, given by source edge
    /// ids, into the normalized graph. Split terminals keep their copy and
    /// gadget vertices appear exactly when they lead to a tree child.
    pub fn lift_tree(&self, source_edges: &[usize]) -> Result<MultiTree, InstanceError> {
        let n = self.source.vertex_count;
        let mut parent = vec![None; n];
        let mut children = vec![HashSet::new(); n];
        for &e in source_edges {
            let Edge { from, to, .. } = *self.source.edges.get(e).ok_or(InstanceError::IdOutOfRange {
                what: "edge",
                id: e,
                n: self.source.edges.len(),
            })?;
            if to == self.source.root || parent[to].replace(from).is_some() {
                return Err(InstanceError::NotAnArborescence);
            }
            children[from].insert(to);
        }
        for (t, copy) in self.terminal_copy.iter().enumerate() {
            if let (Some(c), Some(_)) = (copy, parent[t]) {
                children[t].insert(*c);
            }
        }

        let mut labels = vec![self.root()];
        let mut parents = vec![None];
        let mut stack = vec![(0usize, self.root())];
        while let Some((node, v)) = stack.pop() {
            let owner = self.source_vertex(v);
            for &e in self.out_edges(v).iter().rev() {
                let w = self.edge(e).to;
                let keep = match self.origin[w] {
                    VertexOrigin::Gadget { .. } => self.gadget_reaches(w, &children[owner]),
                    _ => children[owner].contains(&w),
                };
                if keep {
                    labels.push(w);
                    parents.push(Some(node));
                    stack.push((labels.len() - 1, w));
                }
            }
        }
        let reached: usize = children.iter().map(|c| c.len()).sum::<usize>() + 1;
        let lifted_sources = labels
            .iter()
            .filter(|&&v| !matches!(self.origin[v], VertexOrigin::Gadget { .. }))
            .count();
        if lifted_sources != reached {
            return Err(InstanceError::NotAnArborescence);
        }
        let tree = RootedTree::from_parents(parents).map_err(InstanceError::Tree)?;
        Ok(MultiTree { tree, labels })
    }

    fn gadget_reaches(&self, g: usize, targets: &HashSet<usize>) -> bool {
        self.out_edges(g).iter().any(|&e| {
            let w = self.edge(e).to;
            match self.origin[w] {
                VertexOrigin::Gadget { .. } => self.gadget_reaches(w, targets),
                _ => targets.contains(&w),
            }
        })
    }
}

/// Splits terminals that are not single-in-edge sinks and replaces every
/// out-star of size at least three at a non-terminal by a balanced binary
/// gadget over the out-neighbors sorted by id. Gadget-internal edges cost 0;
/// the edge entering each gadget leaf carries the original cost.
pub fn normalize(inst: &DirectedInstance) -> Result<NormalizedInstance, InstanceError> {
    inst.validate()?;
    let n = inst.vertex_count;
    let in_deg = inst.in_degrees();
    let src_out = inst.out_edges();

    let mut origin: Vec<VertexOrigin> = (0..n).map(VertexOrigin::Original).collect();
    let mut degree_bound = inst.degree_bound.clone();
    let mut terminal_copy = vec![None; n];
    let mut terminals = Vec::with_capacity(inst.k());
    // (tail, head, origin edge, cost) before binarization
    let mut arcs: Vec<(usize, usize, Option<usize>, u64)> =
        inst.edges.iter().enumerate().map(|(i, e)| (e.from, e.to, Some(i), e.cost)).collect();
    for &t in &inst.terminals {
        if in_deg[t] == 1 && src_out[t].is_empty() {
            terminals.push(t);
            continue;
        }
        let copy = origin.len();
        origin.push(VertexOrigin::TerminalCopy(t));
        degree_bound.push(0);
        degree_bound[t] += 1;
        terminal_copy[t] = Some(copy);
        arcs.push((t, copy, None, 0));
        terminals.push(copy);
    }
    let d_max = degree_bound.iter().copied().max().unwrap_or(1);
    let mut is_terminal = vec![false; origin.len()];
    for &t in &terminals {
        is_terminal[t] = true;
    }

    let mut by_tail: Vec<Vec<(usize, Option<usize>, u64)>> = vec![Vec::new(); origin.len()];
    for &(u, v, o, c) in &arcs {
        by_tail[u].push((v, o, c));
    }
    let mut edges: Vec<(Edge, Option<usize>)> = Vec::new();
    for (u, mut outs) in by_tail.into_iter().enumerate() {
        outs.sort_by_key(|&(v, _, _)| v);
        if outs.len() <= 2 || is_terminal[u] {
            edges.extend(outs.into_iter().map(|(v, o, c)| (Edge { from: u, to: v, cost: c }, o)));
            continue;
        }
        let half = outs.len().div_ceil(2);
        let (left, right) = outs.split_at(half);
        for part in [left, right] {
            attach(u, u, part, &mut origin, &mut degree_bound, d_max, &mut edges);
        }
    }
    is_terminal.resize(origin.len(), false);
    edges.sort_by_key(|(e, _)| (e.from, e.to));

    let vertex_count = origin.len();
    let phi = origin
        .iter()
        .map(|o| match o {
            VertexOrigin::Gadget { .. } => PhiKind::Identity,
            _ => PhiKind::ConstOne,
        })
        .collect();
    let graph = DirectedInstance {
        vertex_count,
        edges: edges.iter().map(|(e, _)| *e).collect(),
        root: inst.root,
        terminals,
        degree_bound,
    };
    graph.validate_structure()?;
    let mut out = vec![Vec::new(); vertex_count];
    let mut lookup = HashMap::with_capacity(graph.edges.len());
    for (i, e) in graph.edges.iter().enumerate() {
        out[e.from].push(i);
        lookup.insert((e.from, e.to), i);
    }
    let mut norm = NormalizedInstance {
        graph,
        source: inst.clone(),
        origin,
        phi,
        edge_origin: edges.iter().map(|(_, o)| *o).collect(),
        out,
        is_terminal,
        lookup,
        terminal_copy,
        max_rho: vec![0; vertex_count],
    };
    norm.max_rho = (0..vertex_count).map(|v| reach_count(&norm, v)).collect();
    Ok(norm)
}

fn reach_count(norm: &NormalizedInstance, v: usize) -> u32 {
    norm.out_edges(v)
        .iter()
        .map(|&e| {
            let w = norm.edge(e).to;
            match norm.phi[w] {
                PhiKind::Identity => reach_count(norm, w),
                PhiKind::ConstOne => 1,
            }
        })
        .sum()
}

/// Hangs the gadget for `part` below `parent`: a single neighbor becomes a
/// direct edge, otherwise a fresh gadget vertex splits the part in half.
fn attach(
    owner: usize,
    parent: usize,
    part: &[(usize, Option<usize>, u64)],
    origin: &mut Vec<VertexOrigin>,
    degree_bound: &mut Vec<u32>,
    d_max: u32,
    edges: &mut Vec<(Edge, Option<usize>)>,
) {
    if let [(v, o, c)] = part {
        edges.push((Edge { from: parent, to: *v, cost: *c }, *o));
        return;
    }
    let g = origin.len();
    origin.push(VertexOrigin::Gadget { owner });
    degree_bound.push(d_max);
    edges.push((Edge { from: parent, to: g, cost: 0 }, None));
    let half = part.len().div_ceil(2);
    let (left, right) = part.split_at(half);
    attach(owner, g, left, origin, degree_bound, d_max, edges);
    attach(owner, g, right, origin, degree_bound, d_max, edges);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: usize, edges: &[(usize, usize, u64)], terminals: &[usize], d: &[u32]) -> DirectedInstance {
        DirectedInstance {
            vertex_count: n,
            edges: edges.iter().map(|&(from, to, cost)| Edge { from, to, cost }).collect(),
            root: 0,
            terminals: terminals.to_vec(),
            degree_bound: d.to_vec(),
        }
    }

    #[test]
    fn star_of_three_gets_one_gadget_vertex() {
        let src = inst(4, &[(0, 1, 1), (0, 2, 2), (0, 3, 3)], &[1, 2, 3], &[3, 1, 1, 1]);
        let norm = normalize(&src).unwrap();
        assert_eq!(norm.vertex_count(), 5);
        assert_eq!(norm.origin[4], VertexOrigin::Gadget { owner: 0 });
        assert_eq!(norm.phi[4], PhiKind::Identity);
        assert_eq!(norm.degree_bound(4), 3);
        let e = |u, v| norm.edge(norm.edge_id(u, v).unwrap()).cost;
        assert_eq!((e(0, 4), e(4, 1), e(4, 2), e(0, 3)), (0, 1, 2, 3));
        assert_eq!(norm.graph.edges.iter().map(|e| e.cost).sum::<u64>(), 6);
        assert_eq!(norm.max_rho(0), 3);
        assert_eq!(norm.max_rho(4), 2);
    }

    #[test]
    fn terminal_with_out_edge_is_split() {
        let src = inst(3, &[(0, 1, 4), (1, 2, 6)], &[1, 2], &[1, 1, 1]);
        let norm = normalize(&src).unwrap();
        let copy = norm.terminal_copy(1).unwrap();
        assert_eq!(copy, 3);
        assert_eq!(norm.terminals(), &[3, 2]);
        assert!(!norm.is_terminal(1));
        assert!(norm.is_terminal(3));
        assert_eq!(norm.degree_bound(1), 2);
        assert_eq!(norm.degree_bound(3), 0);
        assert_eq!(norm.edge(norm.edge_id(1, 3).unwrap()).cost, 0);
        assert_eq!(norm.phi[3], PhiKind::ConstOne);
    }

    #[test]
    fn binary_instance_with_sink_terminals_is_unchanged() {
        let src = inst(3, &[(0, 1, 4), (0, 2, 6)], &[1, 2], &[2, 1, 1]);
        let norm = normalize(&src).unwrap();
        assert_eq!(norm.graph, src);
        assert!(norm.edge_origin.iter().enumerate().all(|(i, o)| *o == Some(i)));
    }

    #[test]
    fn lift_and_project_round_trip() {
        let src = inst(
            6,
            &[(0, 1, 1), (0, 2, 2), (0, 3, 3), (0, 4, 4), (3, 5, 5)],
            &[1, 2, 3, 5],
            &[4, 1, 1, 1, 1, 1],
        );
        let norm = normalize(&src).unwrap();
        let chosen = vec![0, 2, 4];
        let lifted = norm.lift_tree(&chosen).unwrap();
        assert_eq!(norm.project_edges(&lifted).unwrap(), chosen);
        assert!(lifted.check_good(&norm).is_empty(), "{:?}", lifted.check_good(&norm));
        assert_eq!(lifted.cost(&norm).unwrap(), 1 + 3 + 5);
    }
}
