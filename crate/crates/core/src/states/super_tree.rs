use std::collections::HashMap;
use std::fmt::Write as _;
use std::rc::Rc;

use super::state::{base_item_agrees, BaseItem, State};
use super::state_tree::{Content, StateTree, StateTreeNode};
use super::StateError;
use crate::instances::NormalizedInstance;

pub const DEFAULT_NODE_CAP: usize = 5_000_000;

pub type StateId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Super,
    State(StateId),
    Virtual,
    Base(BaseItem),
}

#[derive(Debug, Clone, Copy)]
pub struct SuperNode {
    pub kind: NodeKind,
    pub parent: Option<u32>,
    first_child: u32,
    child_count: u32,
    /// State level of the node itself (state nodes) or of its state parent
    /// (virtual and base nodes); the super node sits at level 0.
    pub level: u16,
}

/// The pruned tree of all candidate extended state trees of bounded depth.
///
/// Node 0 is the super node. Children of every node are stored contiguously
/// and ordered: base nodes by edge id, then virtual nodes by
/// `(r″, split mask, ρ_{r″})`.
#[derive(Debug, Clone)]
pub struct SuperTree {
    nodes: Vec<SuperNode>,
    states: Vec<State>,
    state_ids: HashMap<State, StateId>,
    cost: Vec<u64>,
    terminal_index: Vec<Vec<u32>>,
    h: usize,
    height: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KindCounts {
    pub state: usize,
    pub virtual_: usize,
    pub base: usize,
}

impl SuperTree {
    pub const ROOT: usize = 0;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &SuperNode {
        &self.nodes[i]
    }

    pub fn children(&self, i: usize) -> std::ops::Range<usize> {
        let n = &self.nodes[i];
        n.first_child as usize..(n.first_child + n.child_count) as usize
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id as usize]
    }

    pub fn node_state(&self, i: usize) -> Option<&State> {
        match self.nodes[i].kind {
            NodeKind::State(s) => Some(self.state(s)),
            _ => None,
        }
    }

    /// `c(o)` for base nodes, 0 elsewhere.
    pub fn cost(&self, i: usize) -> u64 {
        self.cost[i]
    }

    /// Base nodes involving the `i`-th terminal (in normalized terminal order).
    pub fn terminal_nodes(&self, i: usize) -> &[u32] {
        &self.terminal_index[i]
    }

    pub fn height_budget(&self) -> usize {
        self.h
    }

    /// Edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn kind_counts(&self) -> KindCounts {
        let mut c = KindCounts::default();
        for n in &self.nodes {
            match n.kind {
                NodeKind::State(_) => c.state += 1,
                NodeKind::Virtual => c.virtual_ += 1,
                NodeKind::Base(_) => c.base += 1,
                NodeKind::Super => {}
            }
        }
        c
    }

    /// Vertices involved in a base node: `tail(e_o)`, or `second(ξ_o)` and
    /// `third(ξ_o)`.
    pub fn involved(&self, norm: &NormalizedInstance, i: usize) -> Vec<usize> {
        match self.nodes[i].kind {
            NodeKind::Base(item) => item.heads(norm),
            _ => Vec::new(),
        }
    }

    /// Indented listing of every node with its kind, state and cost.
    pub fn dump(&self, norm: &NormalizedInstance) -> String {
        let mut s = String::new();
        let mut stack = vec![(Self::ROOT, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            let pad = "  ".repeat(depth);
            let _ = match self.nodes[i].kind {
                NodeKind::Super => writeln!(s, "{pad}#{i} SUPER"),
                NodeKind::State(sid) => writeln!(s, "{pad}#{i} STATE {}", self.state(sid)),
                NodeKind::Virtual => writeln!(s, "{pad}#{i} VIRTUAL"),
                NodeKind::Base(item) => {
                    let r = item.tail_vertex(norm);
                    let heads: Vec<String> = item.heads(norm).iter().map(|v| v.to_string()).collect();
                    writeln!(s, "{pad}#{i} BASE ({r} -> {}) cost {}", heads.join(", "), self.cost[i])
                }
            };
            for c in self.children(i).rev() {
                stack.push((c, depth + 1));
            }
        }
        s
    }

    /// Locates a good state tree inside the super-tree, returning the selected
    /// node ids (super node, one child per state, both children per virtual
    /// node) in increasing order.
    pub fn embed(&self, tau: &StateTree) -> Option<Vec<usize>> {
        let mut selected = vec![Self::ROOT];
        let root_state = *self.state_ids.get(&tau.nodes[tau.root].state)?;
        let start = self
            .children(Self::ROOT)
            .find(|&c| self.nodes[c].kind == NodeKind::State(root_state))?;
        self.embed_at(tau, tau.root, start, &mut selected)?;
        selected.sort_unstable();
        Some(selected)
    }

    fn embed_at(&self, tau: &StateTree, p: usize, node: usize, selected: &mut Vec<usize>) -> Option<()> {
        selected.push(node);
        match tau.nodes[p].content {
            Content::Leaf(item) => {
                let base = self.children(node).find(|&c| self.nodes[c].kind == NodeKind::Base(item))?;
                selected.push(base);
                Some(())
            }
            Content::Internal { left, right } => {
                let ls = *self.state_ids.get(&tau.nodes[left].state)?;
                let rs = *self.state_ids.get(&tau.nodes[right].state)?;
                let virt = self.children(node).find(|&c| {
                    let mut kids = self.children(c);
                    self.nodes[c].kind == NodeKind::Virtual
                        && kids.len() == 2
                        && self.nodes[kids.next().unwrap()].kind == NodeKind::State(ls)
                        && self.nodes[kids.next().unwrap()].kind == NodeKind::State(rs)
                })?;
                selected.push(virt);
                let first = self.nodes[virt].first_child as usize;
                self.embed_at(tau, left, first, selected)?;
                self.embed_at(tau, right, first + 1, selected)
            }
        }
    }

    /// Converts a selection (sorted node ids) into a state tree. The selection
    /// must contain the super node, exactly one child of the super node and
    /// of every selected state node, and both children of every selected
    /// virtual node.
    pub fn state_tree_of(&self, selected: &[usize]) -> Result<StateTree, StateError> {
        let is_sel = |i: usize| selected.binary_search(&i).is_ok();
        if !is_sel(Self::ROOT) {
            return Err(StateError::BadSelection { node: Self::ROOT });
        }
        let only_child = |i: usize| -> Result<usize, StateError> {
            let mut it = self.children(i).filter(|&c| is_sel(c));
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(StateError::BadSelection { node: i }),
            }
        };
        let mut nodes = Vec::new();
        let start = only_child(Self::ROOT)?;
        let root = self.collect_state(start, &only_child, &is_sel, &mut nodes)?;
        Ok(StateTree { nodes, root })
    }

    fn collect_state(
        &self,
        i: usize,
        only_child: &dyn Fn(usize) -> Result<usize, StateError>,
        is_sel: &dyn Fn(usize) -> bool,
        nodes: &mut Vec<StateTreeNode>,
    ) -> Result<usize, StateError> {
        let NodeKind::State(sid) = self.nodes[i].kind else {
            return Err(StateError::BadSelection { node: i });
        };
        let c = only_child(i)?;
        let content = match self.nodes[c].kind {
            NodeKind::Base(item) => Content::Leaf(item),
            NodeKind::Virtual => {
                let first = self.nodes[c].first_child as usize;
                if self.nodes[c].child_count != 2 || !is_sel(first) || !is_sel(first + 1) {
                    return Err(StateError::BadSelection { node: c });
                }
                let left = self.collect_state(first, only_child, is_sel, nodes)?;
                let right = self.collect_state(first + 1, only_child, is_sel, nodes)?;
                Content::Internal { left, right }
            }
            _ => return Err(StateError::BadSelection { node: c }),
        };
        nodes.push(StateTreeNode { state: self.state(sid).clone(), content });
        Ok(nodes.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ChildDesc {
    Base(BaseItem),
    Virtual(StateId, StateId),
}

/// Builds the super-tree for state levels `0..=h`, keeping only nodes that
/// lie on some complete extended state tree: a state node survives when it
/// has a base child or a virtual child whose two state children survive.
pub fn build_super_tree(norm: &NormalizedInstance, h: usize, node_cap: usize) -> Result<SuperTree, StateError> {
    if h > u16::MAX as usize - 1 {
        return Err(StateError::DepthExceeded { budget: h });
    }
    let mut b = Builder::new(norm, h);
    let r = norm.root();
    let mut top = Vec::new();
    for rho in 1..=norm.degree_bound(r).min(norm.max_rho(r)) {
        let sid = b.intern(State::new(r, [(r, rho)]));
        if !b.viable(sid, 0).is_empty() {
            top.push(sid);
        }
    }

    let total = 1 + top.iter().map(|&s| b.size(s, 0)).fold(0u64, u64::saturating_add);
    if total > node_cap as u64 {
        let mut per_level = vec![0u64; h + 1];
        for &s in &top {
            b.count_levels(s, 0, &mut per_level);
        }
        let mut acc = 1u64;
        let level = per_level
            .iter()
            .position(|&c| {
                acc = acc.saturating_add(c);
                acc > node_cap as u64
            })
            .unwrap_or(h);
        return Err(StateError::CapExceeded { cap: node_cap, total, level });
    }

    let mut nodes = Vec::with_capacity(total as usize);
    let mut cost = Vec::with_capacity(total as usize);
    nodes.push(SuperNode { kind: NodeKind::Super, parent: None, first_child: 1, child_count: 0, level: 0 });
    cost.push(0);
    let mut queue: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for &s in &top {
        nodes.push(SuperNode { kind: NodeKind::State(s), parent: Some(0), first_child: 0, child_count: 0, level: 0 });
        cost.push(0);
        queue.push_back(nodes.len() - 1);
    }
    nodes[0].child_count = top.len() as u32;
    let mut height = if top.is_empty() { 0 } else { 1 };
    let mut depth = vec![0usize; total as usize];
    for d in depth.iter_mut().skip(1).take(top.len()) {
        *d = 1;
    }

    while let Some(i) = queue.pop_front() {
        let level = nodes[i].level;
        let first = nodes.len();
        match nodes[i].kind {
            NodeKind::State(sid) => {
                let descs = b.viable(sid, level as usize);
                for d in descs.iter() {
                    let (kind, c) = match *d {
                        ChildDesc::Base(item) => (NodeKind::Base(item), item.cost(norm)),
                        ChildDesc::Virtual(..) => (NodeKind::Virtual, 0),
                    };
                    nodes.push(SuperNode { kind, parent: Some(i as u32), first_child: 0, child_count: 0, level });
                    cost.push(c);
                    if let ChildDesc::Virtual(..) = d {
                        queue.push_back(nodes.len() - 1);
                    }
                }
                nodes[i].child_count = descs.len() as u32;
            }
            NodeKind::Virtual => {
                let parent = nodes[i].parent.expect("virtual nodes have a parent") as usize;
                let NodeKind::State(psid) = nodes[parent].kind else { unreachable!("virtual parent is a state") };
                let k = i - nodes[parent].first_child as usize;
                let ChildDesc::Virtual(ls, rs) = b.viable(psid, level as usize)[k] else {
                    unreachable!("child order follows the descriptors")
                };
                for s in [ls, rs] {
                    nodes.push(SuperNode {
                        kind: NodeKind::State(s),
                        parent: Some(i as u32),
                        first_child: 0,
                        child_count: 0,
                        level: level + 1,
                    });
                    cost.push(0);
                    queue.push_back(nodes.len() - 1);
                }
                nodes[i].child_count = 2;
            }
            NodeKind::Super | NodeKind::Base(_) => unreachable!("never queued"),
        }
        nodes[i].first_child = first as u32;
        for c in first..nodes.len() {
            depth[c] = depth[i] + 1;
            height = height.max(depth[c]);
        }
    }
    debug_assert_eq!(nodes.len() as u64, total);

    let mut terminal_pos = vec![None; norm.vertex_count()];
    for (i, &t) in norm.terminals().iter().enumerate() {
        terminal_pos[t] = Some(i);
    }
    let mut terminal_index = vec![Vec::new(); norm.terminals().len()];
    for (i, n) in nodes.iter().enumerate() {
        if let NodeKind::Base(item) = n.kind {
            for v in item.heads(norm) {
                if let Some(t) = terminal_pos[v] {
                    terminal_index[t].push(i as u32);
                }
            }
        }
    }

    Ok(SuperTree {
        nodes,
        states: b.states,
        state_ids: b.ids,
        cost,
        terminal_index,
        h,
        height,
    })
}

struct Builder<'a> {
    norm: &'a NormalizedInstance,
    h: usize,
    states: Vec<State>,
    ids: HashMap<State, StateId>,
    viable: HashMap<(StateId, usize), Rc<[ChildDesc]>>,
    sizes: HashMap<(StateId, usize), u64>,
    /// `reach[u][v]`: a directed path from `u` to `v` exists.
    reach: Vec<Vec<bool>>,
    candidates: Vec<usize>,
}

impl<'a> Builder<'a> {
    fn new(norm: &'a NormalizedInstance, h: usize) -> Self {
        let n = norm.vertex_count();
        let mut reach = vec![vec![false; n]; n];
        for (u, row) in reach.iter_mut().enumerate() {
            let mut stack = vec![u];
            while let Some(x) = stack.pop() {
                for &e in norm.out_edges(x) {
                    let y = norm.edge(e).to;
                    if !row[y] {
                        row[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        let candidates = (0..n)
            .filter(|&v| !norm.is_terminal(v) && norm.degree_bound(v) >= 1 && norm.max_rho(v) >= 1)
            .collect();
        Builder {
            norm,
            h,
            states: Vec::new(),
            ids: HashMap::new(),
            viable: HashMap::new(),
            sizes: HashMap::new(),
            reach,
            candidates,
        }
    }

    fn intern(&mut self, s: State) -> StateId {
        if let Some(&id) = self.ids.get(&s) {
            return id;
        }
        let id = self.states.len() as StateId;
        self.ids.insert(s.clone(), id);
        self.states.push(s);
        id
    }

    /// Every non-root portal must be reachable from the root, which is
    /// necessary for any realizing sub-tree.
    fn reachable_portals(&self, root: usize, portals: &[usize]) -> bool {
        portals.iter().all(|&v| v == root || self.reach[root][v])
    }

    fn viable(&mut self, sid: StateId, level: usize) -> Rc<[ChildDesc]> {
        if let Some(v) = self.viable.get(&(sid, level)) {
            return v.clone();
        }
        let state = self.states[sid as usize].clone();
        let norm = self.norm;
        let mut out = Vec::new();

        let outs = norm.out_edges(state.root);
        for &e in outs {
            if base_item_agrees(norm, BaseItem::Edge(e), &state) {
                out.push(ChildDesc::Base(BaseItem::Edge(e)));
            }
        }
        if let [a, b] = *outs {
            let item = BaseItem::Triple(a.min(b), a.max(b));
            if base_item_agrees(norm, item, &state) {
                out.push(ChildDesc::Base(item));
            }
        }

        if level < self.h {
            let rest: Vec<(usize, u32)> = state.pairs().filter(|&(v, _)| v != state.root).collect();
            let root_pair = (state.root, state.degree_of(state.root).expect("root is a portal"));
            for ci in 0..self.candidates.len() {
                let r2 = self.candidates[ci];
                if state.contains(r2) || !self.reach[state.root][r2] {
                    continue;
                }
                let cap = norm.degree_bound(r2).min(norm.max_rho(r2));
                for mask in 0u64..(1u64 << rest.len()) {
                    let mut s1 = vec![root_pair];
                    let mut s2 = Vec::new();
                    for (j, &p) in rest.iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            s2.push(p);
                        } else {
                            s1.push(p);
                        }
                    }
                    let s1_portals: Vec<usize> = s1.iter().map(|p| p.0).chain([r2]).collect();
                    let s2_portals: Vec<usize> = s2.iter().map(|p| p.0).collect();
                    if !self.reachable_portals(state.root, &s1_portals) || !self.reachable_portals(r2, &s2_portals) {
                        continue;
                    }
                    for val in 1..=cap {
                        let left = self.intern(State::new(state.root, s1.iter().copied().chain([(r2, val)])));
                        let right = self.intern(State::new(r2, s2.iter().copied().chain([(r2, val)])));
                        if !self.viable(right, level + 1).is_empty() && !self.viable(left, level + 1).is_empty() {
                            out.push(ChildDesc::Virtual(left, right));
                        }
                    }
                }
            }
        }
        let rc: Rc<[ChildDesc]> = out.into();
        self.viable.insert((sid, level), rc.clone());
        rc
    }

    /// Size of the pruned subtree below a viable state node, saturating.
    fn size(&mut self, sid: StateId, level: usize) -> u64 {
        if let Some(&s) = self.sizes.get(&(sid, level)) {
            return s;
        }
        let descs = self.viable(sid, level);
        let mut total = 1u64;
        for d in descs.iter() {
            total = total.saturating_add(match *d {
                ChildDesc::Base(_) => 1,
                ChildDesc::Virtual(l, r) => {
                    1u64.saturating_add(self.size(l, level + 1)).saturating_add(self.size(r, level + 1))
                }
            });
        }
        self.sizes.insert((sid, level), total);
        total
    }

    /// Adds node counts per state level below a viable state node.
    fn count_levels(&mut self, sid: StateId, level: usize, acc: &mut [u64]) {
        let descs = self.viable(sid, level);
        acc[level] = acc[level].saturating_add(1 + descs.len() as u64);
        for d in descs.iter() {
            if let ChildDesc::Virtual(l, r) = *d {
                if acc.iter().sum::<u64>() > u64::MAX / 4 {
                    return;
                }
                self.count_levels(l, level + 1, acc);
                self.count_levels(r, level + 1, acc);
            }
        }
    }
}
