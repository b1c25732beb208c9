use std::fmt;

use serde::Serialize;

use super::StateError;
use crate::instances::NormalizedInstance;

/// `(r′, S, ρ)`: a sub-tree root, its portal set and the original degree of
/// every portal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct State {
    pub root: usize,
    /// Sorted, contains `root`.
    pub portals: Vec<usize>,
    /// `degrees[i]` belongs to `portals[i]`.
    pub degrees: Vec<u32>,
}

impl State {
    /// Builds a state from `(portal, degree)` pairs in any order.
    pub fn new(root: usize, pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut pairs: Vec<(usize, u32)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup_by_key(|p| p.0);
        State {
            root,
            portals: pairs.iter().map(|p| p.0).collect(),
            degrees: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn degree_of(&self, v: usize) -> Option<u32> {
        self.portals.binary_search(&v).ok().map(|i| self.degrees[i])
    }

    pub fn contains(&self, v: usize) -> bool {
        self.portals.binary_search(&v).is_ok()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.portals.iter().copied().zip(self.degrees.iter().copied())
    }

    /// `r′ ∈ S`, no portal is a terminal, and every degree is in `[1, d_v]`.
    pub fn is_well_formed(&self, norm: &NormalizedInstance) -> bool {
        self.portals.len() == self.degrees.len()
            && self.contains(self.root)
            && self.pairs().all(|(v, d)| {
                v < norm.vertex_count() && !norm.is_terminal(v) && d >= 1 && d <= norm.degree_bound(v)
            })
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {{", self.root)?;
        for (i, (v, d)) in self.pairs().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}:{d}")?;
        }
        write!(f, "}})")
    }
}

/// Content of a leaf state: one edge `(r′, v)` or two edges `(r′, v)`,
/// `(r′, v′)` given by normalized edge ids with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BaseItem {
    Edge(usize),
    Triple(usize, usize),
}

impl BaseItem {
    pub fn tail_vertex(&self, norm: &NormalizedInstance) -> usize {
        match *self {
            BaseItem::Edge(e) | BaseItem::Triple(e, _) => norm.edge(e).from,
        }
    }

    /// The vertices below `r′`: `tail(e)`, or `second(ξ)` and `third(ξ)`.
    pub fn heads(&self, norm: &NormalizedInstance) -> Vec<usize> {
        match *self {
            BaseItem::Edge(e) => vec![norm.edge(e).to],
            BaseItem::Triple(a, b) => vec![norm.edge(a).to, norm.edge(b).to],
        }
    }

    pub fn cost(&self, norm: &NormalizedInstance) -> u64 {
        match *self {
            BaseItem::Edge(e) => norm.edge(e).cost,
            BaseItem::Triple(a, b) => norm.edge(a).cost + norm.edge(b).cost,
        }
    }

    pub fn edges(&self) -> Vec<usize> {
        match *self {
            BaseItem::Edge(e) => vec![e],
            BaseItem::Triple(a, b) => vec![a, b],
        }
    }
}

/// `((r′, S1), (r″, S2))` is an allowable child-pair of `(r′, S)`:
/// the left root equals the parent root, `r″ ∉ S`, `S1 ∪ S2 = S ∪ {r″}` and
/// `S1 ∩ S2 = {r″}`. All portal slices must be sorted.
pub fn is_allowable_child_pair(
    parent: (usize, &[usize]),
    left: (usize, &[usize]),
    right: (usize, &[usize]),
) -> bool {
    let (r1, s) = parent;
    let (r1_left, s1) = left;
    let (r2, s2) = right;
    if r1_left != r1 || s.binary_search(&r2).is_ok() {
        return false;
    }
    let mut union: Vec<usize> = s1.iter().chain(s2).copied().collect();
    union.sort_unstable();
    union.dedup();
    let mut expected: Vec<usize> = s.iter().copied().chain(std::iter::once(r2)).collect();
    expected.sort_unstable();
    let intersection: Vec<usize> = s1.iter().copied().filter(|v| s2.binary_search(v).is_ok()).collect();
    union == expected && intersection == [r2]
}

/// `ρ¹`, `ρ²` agree with `ρ` outside `r″ = right.root` and agree with each
/// other at `r″`.
pub fn degree_vectors_consistent(parent: &State, left: &State, right: &State) -> bool {
    let r2 = right.root;
    let outside_agrees =
        |child: &State| child.pairs().filter(|&(v, _)| v != r2).all(|(v, d)| parent.degree_of(v) == Some(d));
    outside_agrees(left)
        && outside_agrees(right)
        && left.degree_of(r2).is_some()
        && left.degree_of(r2) == right.degree_of(r2)
}

/// `φ_v(ρ_v)` when `v` is a portal, 1 when `v` is a terminal.
fn contribution(norm: &NormalizedInstance, state: &State, v: usize) -> Option<u32> {
    if norm.is_terminal(v) {
        Some(1)
    } else {
        state.degree_of(v).map(|d| norm.phi(v, d))
    }
}

fn portal_set_matches(norm: &NormalizedInstance, state: &State, vertices: &[usize]) -> bool {
    let mut expected: Vec<usize> = vertices.iter().copied().filter(|&v| !norm.is_terminal(v)).collect();
    expected.sort_unstable();
    expected.dedup();
    expected == state.portals
}

/// `ρ_{r′} = (φ_v(ρ_v) or 1)` for edge `(r′, v)`; requires `{r′, v} \ K = S`.
pub fn edge_agrees(norm: &NormalizedInstance, edge: usize, state: &State) -> Result<bool, StateError> {
    let e = norm.edge(edge);
    if e.from != state.root || !portal_set_matches(norm, state, &[e.from, e.to]) {
        return Err(StateError::AgreementPrecondition);
    }
    let want = contribution(norm, state, e.to).ok_or(StateError::AgreementPrecondition)?;
    Ok(state.degree_of(state.root) == Some(want))
}

/// `ρ_{r′} = (φ_v(ρ_v) or 1) + (φ_{v′}(ρ_{v′}) or 1)`; requires
/// `{r′, v, v′} \ K = S`.
pub fn triple_agrees(norm: &NormalizedInstance, e1: usize, e2: usize, state: &State) -> Result<bool, StateError> {
    let (a, b) = (norm.edge(e1), norm.edge(e2));
    if e1 == e2
        || a.from != state.root
        || b.from != state.root
        || !portal_set_matches(norm, state, &[a.from, a.to, b.to])
    {
        return Err(StateError::AgreementPrecondition);
    }
    let x = contribution(norm, state, a.to).ok_or(StateError::AgreementPrecondition)?;
    let y = contribution(norm, state, b.to).ok_or(StateError::AgreementPrecondition)?;
    Ok(state.degree_of(state.root) == Some(x + y))
}

/// Agreement of a base item, `false` when the precondition fails.
pub fn base_item_agrees(norm: &NormalizedInstance, item: BaseItem, state: &State) -> bool {
    match item {
        BaseItem::Edge(e) => edge_agrees(norm, e, state).unwrap_or(false),
        BaseItem::Triple(a, b) => triple_agrees(norm, a, b, state).unwrap_or(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{normalize, DirectedInstance, Edge};

    /// r=0 -> w=1 -> {2, 3}, r -> 4; terminals 2, 3, 4; plus a star at 5
    /// so a gadget vertex exists.
    fn sample() -> NormalizedInstance {
        let edges = [(0, 1, 1), (1, 2, 1), (1, 3, 1), (0, 4, 1), (0, 5, 1), (5, 2, 1), (5, 3, 1), (5, 4, 1)];
        normalize(&DirectedInstance {
            vertex_count: 6,
            edges: edges.iter().map(|&(from, to, cost)| Edge { from, to, cost }).collect(),
            root: 0,
            terminals: vec![2, 3, 4],
            degree_bound: vec![3, 2, 1, 1, 1, 3],
        })
        .unwrap()
    }

    #[test]
    fn allowable_pairs() {
        let (r, w) = (0, 1);
        assert!(is_allowable_child_pair((r, &[r]), (r, &[r, w]), (w, &[w])));
        assert!(!is_allowable_child_pair((r, &[r, w]), (r, &[r, w]), (w, &[w])));
        assert!(!is_allowable_child_pair((r, &[r, 2]), (r, &[r, 1, 2]), (1, &[1, 2])));
        assert!(!is_allowable_child_pair((r, &[r]), (w, &[w]), (r, &[r, w])));
    }

    #[test]
    fn consistency() {
        let parent = State::new(0, [(0, 2)]);
        let left = State::new(0, [(0, 2), (1, 1)]);
        let right = State::new(1, [(1, 1)]);
        assert!(degree_vectors_consistent(&parent, &left, &right));
        let right2 = State::new(1, [(1, 2)]);
        assert!(!degree_vectors_consistent(&parent, &left, &right2));
        let left_bad_root = State::new(0, [(0, 1), (1, 1)]);
        assert!(!degree_vectors_consistent(&parent, &left_bad_root, &right));
    }

    #[test]
    fn edge_to_terminal_counts_one() {
        let norm = sample();
        let c = norm.terminal_copy(4).unwrap();
        let e = norm.edge_id(4, c).unwrap();
        assert_eq!(edge_agrees(&norm, e, &State::new(4, [(4, 1)])), Ok(true));
        assert_eq!(edge_agrees(&norm, e, &State::new(4, [(4, 2)])), Ok(false));
        assert_eq!(
            edge_agrees(&norm, e, &State::new(4, [(4, 1), (1, 1)])),
            Err(StateError::AgreementPrecondition)
        );
    }

    #[test]
    fn triple_sums_child_degrees() {
        let norm = sample();
        let (a, b) = (norm.edge_id(1, 2).unwrap(), norm.edge_id(1, 3).unwrap());
        assert_eq!(triple_agrees(&norm, a, b, &State::new(1, [(1, 2), (2, 1), (3, 1)])), Ok(true));
        assert_eq!(triple_agrees(&norm, a, b, &State::new(1, [(1, 1), (2, 1), (3, 1)])), Ok(false));
        assert_eq!(triple_agrees(&norm, a, b, &State::new(1, [(1, 2)])), Err(StateError::AgreementPrecondition));
    }

    #[test]
    fn gadget_child_passes_its_degree() {
        let norm = sample();
        let g = (0..norm.vertex_count())
            .find(|&v| matches!(norm.origin[v], crate::instances::VertexOrigin::Gadget { owner: 5 }))
            .unwrap();
        let e = norm.edge_id(5, g).unwrap();
        assert_eq!(edge_agrees(&norm, e, &State::new(5, [(5, 2), (g, 2)])), Ok(true));
        assert_eq!(edge_agrees(&norm, e, &State::new(5, [(5, 1), (g, 2)])), Ok(false));
    }
}
