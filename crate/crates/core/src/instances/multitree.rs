use serde::Serialize;

use super::{InstanceError, NormalizedInstance};
use crate::treekit::RootedTree;

/// A tree whose nodes are labeled copies of graph vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiTree {
    pub tree: RootedTree,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GoodnessViolation {
    RootLabel { found: usize },
    MissingEdge { from: usize, to: usize },
    NonTerminalLeaf { node: usize, label: usize },
    DegreeExceeded { node: usize, label: usize, rho: u32, bound: u32 },
    UnknownLabel { node: usize, label: usize },
}

impl MultiTree {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `ρ_a = Σ φ_b(ρ_b)` over children `b`, with leaves at 0.
    pub fn original_degree(&self, norm: &NormalizedInstance) -> Result<Vec<u32>, InstanceError> {
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= norm.vertex_count()) {
            return Err(InstanceError::IdOutOfRange { what: "label", id: bad, n: norm.vertex_count() });
        }
        let mut rho = vec![0u32; self.len()];
        for a in self.tree.preorder().into_iter().rev() {
            if let Some(p) = self.tree.parent(a) {
                rho[p] += norm.phi(self.labels[a], rho[a]);
            }
        }
        Ok(rho)
    }

    /// Sum of edge costs; every edge must exist in the normalized graph.
    pub fn cost(&self, norm: &NormalizedInstance) -> Result<u64, InstanceError> {
        let mut total = 0;
        for a in 0..self.len() {
            if let Some(p) = self.tree.parent(a) {
                let (u, v) = (self.labels[p], self.labels[a]);
                let e = norm.edge_id(u, v).ok_or(InstanceError::MissingEdge(u, v))?;
                total += norm.edge(e).cost;
            }
        }
        Ok(total)
    }

    /// Rooted at a copy of the root, leaves are terminal copies, every edge
    /// is a graph edge and every original degree is within its bound.
    pub fn check_good(&self, norm: &NormalizedInstance) -> Vec<GoodnessViolation> {
        let mut out = Vec::new();
        for (node, &label) in self.labels.iter().enumerate() {
            if label >= norm.vertex_count() {
                out.push(GoodnessViolation::UnknownLabel { node, label });
            }
        }
        if !out.is_empty() {
            return out;
        }
        let root_label = self.labels[self.tree.root()];
        if root_label != norm.root() {
            out.push(GoodnessViolation::RootLabel { found: root_label });
        }
        for a in 0..self.len() {
            if let Some(p) = self.tree.parent(a) {
                let (from, to) = (self.labels[p], self.labels[a]);
                if norm.edge_id(from, to).is_none() {
                    out.push(GoodnessViolation::MissingEdge { from, to });
                }
            }
            if self.tree.is_leaf(a) && !norm.is_terminal(self.labels[a]) {
                out.push(GoodnessViolation::NonTerminalLeaf { node: a, label: self.labels[a] });
            }
        }
        let rho = self.original_degree(norm).expect("labels checked above");
        for (node, &r) in rho.iter().enumerate() {
            let label = self.labels[node];
            let bound = norm.degree_bound(label);
            if r > bound {
                out.push(GoodnessViolation::DegreeExceeded { node, label, rho: r, bound });
            }
        }
        out
    }

    pub fn sorted_labels(&self) -> Vec<usize> {
        let mut l = self.labels.clone();
        l.sort_unstable();
        l
    }

    /// Normalized terminals with at least one copy in the tree.
    pub fn covered_terminals(&self, norm: &NormalizedInstance) -> Vec<usize> {
        let mut t: Vec<usize> = self.labels.iter().copied().filter(|&v| norm.is_terminal(v)).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    /// Number of copies of each vertex label.
    pub fn copy_counts(&self, vertex_count: usize) -> Vec<u32> {
        let mut c = vec![0; vertex_count];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// A string that is equal for two trees exactly when they are isomorphic
    /// as rooted labeled trees.
    pub fn canonical_form(&self) -> String {
        fn enc(t: &MultiTree, a: usize) -> String {
            let mut kids: Vec<String> = t.tree.children(a).iter().map(|&c| enc(t, c)).collect();
            kids.sort();
            format!("{}({})", t.labels[a], kids.join(","))
        }
        enc(self, self.tree.root())
    }
}
