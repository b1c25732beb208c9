use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::InstanceError;
use crate::treekit::RootedTree;

/// A rooted tree with vertex costs, groups of vertices to connect, and
/// per-vertex bounds on the number of chosen children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTreeInstance {
    pub parent: Vec<Option<usize>>,
    pub cost: Vec<u64>,
    pub groups: Vec<Vec<usize>>,
    pub degree_bound: Vec<u32>,
    pub synthetic_leaf: Vec<bool>,
}

impl GroupTreeInstance {
    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn tree(&self) -> Result<RootedTree, InstanceError> {
        RootedTree::from_parents(self.parent.clone()).map_err(InstanceError::Tree)
    }

    pub fn root(&self) -> Result<usize, InstanceError> {
        Ok(self.tree()?.root())
    }

    fn check_lengths(&self) -> Result<(), InstanceError> {
        let n = self.vertex_count();
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        for (what, len) in [
            ("cost", self.cost.len()),
            ("degree_bound", self.degree_bound.len()),
            ("synthetic_leaf", self.synthetic_leaf.len()),
        ] {
            if len != n {
                return Err(InstanceError::LengthMismatch { what, expected: n, found: len });
            }
        }
        if let Some(v) = self.degree_bound.iter().position(|&d| d == 0) {
            return Err(InstanceError::ZeroDegreeBound(v));
        }
        for g in &self.groups {
            for &v in g {
                if v >= n {
                    return Err(InstanceError::IdOutOfRange { what: "group member", id: v, n });
                }
            }
        }
        Ok(())
    }

    /// Checks the invariants a preprocessed instance must satisfy: members
    /// are leaves, groups are non-empty and pairwise disjoint.
    pub fn validate(&self) -> Result<(), InstanceError> {
        self.check_lengths()?;
        let tree = self.tree()?;
        if self.groups.is_empty() {
            return Err(InstanceError::NoTerminals);
        }
        let mut owner = vec![None::<usize>; self.vertex_count()];
        for (t, g) in self.groups.iter().enumerate() {
            if g.is_empty() {
                return Err(InstanceError::EmptyGroup(t));
            }
            for &v in g {
                if !tree.is_leaf(v) {
                    return Err(InstanceError::GroupMemberNotLeaf { group: t, vertex: v });
                }
                if owner[v].is_some() {
                    return Err(InstanceError::OverlappingGroups { vertex: v });
                }
                owner[v] = Some(t);
            }
        }
        for v in 0..self.vertex_count() {
            if self.synthetic_leaf[v] && (self.cost[v] != 0 || !tree.is_leaf(v)) {
                return Err(InstanceError::BadSyntheticLeaf(v));
            }
        }
        Ok(())
    }

    /// Group index of every vertex, if any. Meaningful after `validate`.
    pub fn group_of(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.vertex_count()];
        for (t, g) in self.groups.iter().enumerate() {
            for &v in g {
                owner[v] = Some(t);
            }
        }
        owner
    }

    /// Number of synthetic leaves hanging directly below each vertex.
    pub fn synthetic_children(&self) -> Vec<u32> {
        let mut count = vec![0; self.vertex_count()];
        for (v, p) in self.parent.iter().enumerate() {
            if let (Some(p), true) = (p, self.synthetic_leaf[v]) {
                count[*p] += 1;
            }
        }
        count
    }

    pub fn vertex_cost_sum(&self, vertices: &[usize]) -> u64 {
        vertices.iter().map(|&v| self.cost[v]).sum()
    }
}

/// Moves optional edge costs onto child vertices and replaces every
/// membership of an internal or multiply-grouped vertex with a fresh
/// zero-cost leaf below it, raising that vertex's degree bound by one per
/// new leaf.
///
/// Synthetic leaves are numbered after the existing vertices, in group order
/// and, within a group, in member order.
pub fn preprocess_gst(
    inst: &GroupTreeInstance,
    edge_costs: Option<&[u64]>,
) -> Result<GroupTreeInstance, InstanceError> {
    inst.check_lengths()?;
    let tree = inst.tree()?;
    let n = inst.vertex_count();
    let mut out = inst.clone();
    if let Some(ec) = edge_costs {
        if ec.len() != n {
            return Err(InstanceError::LengthMismatch { what: "edge_costs", expected: n, found: ec.len() });
        }
        for v in 0..n {
            if inst.parent[v].is_some() {
                out.cost[v] += ec[v];
            }
        }
    }
    let groups: Vec<BTreeSet<usize>> = inst.groups.iter().map(|g| g.iter().copied().collect()).collect();
    let mut memberships = vec![0usize; n];
    for g in &groups {
        for &v in g {
            memberships[v] += 1;
        }
    }
    out.groups = Vec::with_capacity(groups.len());
    for (t, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(InstanceError::EmptyGroup(t));
        }
        let mut members = Vec::with_capacity(g.len());
        for &v in g {
            if inst.synthetic_leaf[v] || (tree.is_leaf(v) && memberships[v] == 1) {
                members.push(v);
                continue;
            }
            let leaf = out.parent.len();
            out.parent.push(Some(v));
            out.cost.push(0);
            out.degree_bound.push(1);
            out.synthetic_leaf.push(true);
            out.degree_bound[v] += 1;
            members.push(leaf);
        }
        out.groups.push(members);
    }
    Ok(out)
}
