use std::collections::HashMap;

use serde::Serialize;

use super::state::{base_item_agrees, degree_vectors_consistent, is_allowable_child_pair, BaseItem, State};
use super::StateError;
use crate::instances::{MultiTree, NormalizedInstance};
use crate::treekit::{find_balanced_separator, split_at, RootedTree, SubTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Content {
    Leaf(BaseItem),
    Internal { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateTreeNode {
    pub state: State,
    pub content: Content,
}

/// A full binary tree of states whose leaves carry an edge or a triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateTree {
    pub nodes: Vec<StateTreeNode>,
    pub root: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StateTreeViolation {
    /// The root state is not `(r, {r})`.
    RootState { node: usize },
    MalformedState { node: usize },
    LeafDisagrees { node: usize },
    /// Left root differs from the parent root, or the portal sets do not
    /// form an allowable child-pair.
    NotAllowable { node: usize },
    Inconsistent { node: usize },
    DepthExceeded { depth: usize, budget: usize },
    BadChildIndex { node: usize },
}

impl StateTree {
    /// Depth in edges.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((p, d)) = stack.pop() {
            best = best.max(d);
            if let Content::Internal { left, right } = self.nodes[p].content {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(p) = stack.pop() {
            match self.nodes[p].content {
                Content::Leaf(_) => out.push(p),
                Content::Internal { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    pub fn cost(&self, norm: &NormalizedInstance) -> u64 {
        self.leaves()
            .into_iter()
            .map(|p| match self.nodes[p].content {
                Content::Leaf(item) => item.cost(norm),
                Content::Internal { .. } => unreachable!("leaves() returns leaves"),
            })
            .sum()
    }

    /// Terminals appearing as a head in some leaf item, sorted.
    pub fn involved_terminals(&self, norm: &NormalizedInstance) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .leaves()
            .into_iter()
            .flat_map(|p| match self.nodes[p].content {
                Content::Leaf(item) => item.heads(norm),
                Content::Internal { .. } => Vec::new(),
            })
            .filter(|&v| norm.is_terminal(v))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Checks root state, leaf agreement, allowable child-pairs with consistent
/// degree vectors at every internal node, and depth at most `h`.
pub fn validate_state_tree(norm: &NormalizedInstance, tau: &StateTree, h: usize) -> Vec<StateTreeViolation> {
    let mut out = Vec::new();
    let len = tau.nodes.len();
    if tau.root >= len {
        return vec![StateTreeViolation::BadChildIndex { node: tau.root }];
    }
    for (i, node) in tau.nodes.iter().enumerate() {
        if let Content::Internal { left, right } = node.content {
            if left >= len || right >= len || left == i || right == i {
                out.push(StateTreeViolation::BadChildIndex { node: i });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let root = &tau.nodes[tau.root].state;
    if root.root != norm.root() || root.portals != [norm.root()] {
        out.push(StateTreeViolation::RootState { node: tau.root });
    }
    let mut visited = vec![false; len];
    let mut stack = vec![(tau.root, 0usize)];
    let mut depth = 0;
    while let Some((p, d)) = stack.pop() {
        if std::mem::replace(&mut visited[p], true) {
            out.push(StateTreeViolation::BadChildIndex { node: p });
            continue;
        }
        depth = depth.max(d);
        let node = &tau.nodes[p];
        if !node.state.is_well_formed(norm) {
            out.push(StateTreeViolation::MalformedState { node: p });
            continue;
        }
        match node.content {
            Content::Leaf(item) => {
                if !base_item_agrees(norm, item, &node.state) {
                    out.push(StateTreeViolation::LeafDisagrees { node: p });
                }
            }
            Content::Internal { left, right } => {
                let (l, r) = (&tau.nodes[left].state, &tau.nodes[right].state);
                if !is_allowable_child_pair(
                    (node.state.root, &node.state.portals),
                    (l.root, &l.portals),
                    (r.root, &r.portals),
                ) {
                    out.push(StateTreeViolation::NotAllowable { node: p });
                } else if !degree_vectors_consistent(&node.state, l, r) {
                    out.push(StateTreeViolation::Inconsistent { node: p });
                }
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
    }
    if depth > h {
        out.push(StateTreeViolation::DepthExceeded { depth, budget: h });
    }
    out
}

/// Recursively partitions a good multi-tree with distinct labels and
/// records the state of every piece. Each edge of the tree lands in exactly
/// one leaf, so the cost is preserved.
pub fn gen_state_tree(norm: &NormalizedInstance, tree: &MultiTree, h: usize) -> Result<StateTree, StateError> {
    let violations = tree.check_good(norm);
    if !violations.is_empty() {
        return Err(StateError::NotGood(violations));
    }
    let mut seen = vec![false; norm.vertex_count()];
    for &l in &tree.labels {
        if std::mem::replace(&mut seen[l], true) {
            return Err(StateError::RepeatedLabel(l));
        }
    }
    if tree.len() < 2 {
        return Err(StateError::TrivialTree);
    }
    let rho = tree.original_degree(norm)?;
    let whole = SubTree { tree: tree.tree.clone(), origin: (0..tree.len()).collect() };
    let mut gen = Generator { norm, tree, rho: &rho, h, nodes: Vec::new() };
    let root = gen.recurse(&whole, 0)?;
    Ok(StateTree { nodes: gen.nodes, root })
}

struct Generator<'a> {
    norm: &'a NormalizedInstance,
    tree: &'a MultiTree,
    rho: &'a [u32],
    h: usize,
    nodes: Vec<StateTreeNode>,
}

impl Generator<'_> {
    /// `piece.origin` maps local ids to node ids of the full tree.
    fn recurse(&mut self, piece: &SubTree, depth: usize) -> Result<usize, StateError> {
        if depth > self.h {
            return Err(StateError::DepthExceeded { budget: self.h });
        }
        let label = |local: usize| self.tree.labels[piece.origin[local]];
        let t = &piece.tree;
        let root_node = piece.origin[t.root()];
        let mut pairs = vec![(label(t.root()), self.rho[root_node])];
        for v in 0..t.len() {
            if t.is_leaf(v) && !self.norm.is_terminal(label(v)) {
                pairs.push((label(v), self.rho[piece.origin[v]]));
            }
        }
        let state = State::new(label(t.root()), pairs);

        let content = if t.is_one_level() {
            let r = label(t.root());
            let mut edges: Vec<usize> = t
                .children(t.root())
                .iter()
                .map(|&c| self.norm.edge_id(r, label(c)).expect("good tree edges exist"))
                .collect();
            edges.sort_unstable();
            match edges[..] {
                [e] => Content::Leaf(BaseItem::Edge(e)),
                [a, b] => Content::Leaf(BaseItem::Triple(a, b)),
                _ => unreachable!("one-level trees have one or two edges"),
            }
        } else {
            let v = find_balanced_separator(t)?;
            let (t1, t2) = split_at(t, v)?;
            let lift = |sub: SubTree| SubTree {
                origin: sub.origin.iter().map(|&i| piece.origin[i]).collect(),
                tree: sub.tree,
            };
            let left = self.recurse(&lift(t1), depth + 1)?;
            let right = self.recurse(&lift(t2), depth + 1)?;
            Content::Internal { left, right }
        };
        self.nodes.push(StateTreeNode { state, content });
        Ok(self.nodes.len() - 1)
    }
}

/// Joins the edges of all leaves bottom-up: at an internal node the copy of
/// the right root `r″` inside the left part is identified with the root of
/// the right part.
pub fn stitch_multi_tree(norm: &NormalizedInstance, tau: &StateTree, h: usize) -> Result<MultiTree, StateError> {
    let violations = validate_state_tree(norm, tau, h);
    if !violations.is_empty() {
        return Err(StateError::InvalidStateTree(violations));
    }
    let part = stitch(norm, tau, tau.root);
    let tree = RootedTree::from_parents(part.parent)?;
    Ok(MultiTree { tree, labels: part.labels })
}

struct Part {
    labels: Vec<usize>,
    parent: Vec<Option<usize>>,
    /// Portal vertex -> node index (`π_p`).
    pi: HashMap<usize, usize>,
}

fn stitch(norm: &NormalizedInstance, tau: &StateTree, p: usize) -> Part {
    let node = &tau.nodes[p];
    match node.content {
        Content::Leaf(item) => {
            let r = node.state.root;
            let mut labels = vec![r];
            let mut parent = vec![None];
            let mut pi = HashMap::from([(r, 0)]);
            for v in item.heads(norm) {
                labels.push(v);
                parent.push(Some(0));
                if node.state.contains(v) {
                    pi.insert(v, labels.len() - 1);
                }
            }
            Part { labels, parent, pi }
        }
        Content::Internal { left, right } => {
            let mut q = stitch(norm, tau, left);
            let o = stitch(norm, tau, right);
            let r2 = tau.nodes[right].state.root;
            let glue = q.pi[&r2];
            let o_root = o.pi[&r2];
            let mut map = vec![usize::MAX; o.labels.len()];
            map[o_root] = glue;
            for (i, &l) in o.labels.iter().enumerate() {
                if i != o_root {
                    map[i] = q.labels.len();
                    q.labels.push(l);
                    q.parent.push(None);
                }
            }
            for (i, par) in o.parent.iter().enumerate() {
                if i != o_root {
                    q.parent[map[i]] = par.map(|x| map[x]);
                }
            }
            for (v, i) in o.pi {
                q.pi.insert(v, map[i]);
            }
            q.pi.retain(|v, _| node.state.contains(*v));
            q
        }
    }
}
