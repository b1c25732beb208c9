use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::InstanceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub cost: u64,
}

/// Directed graph with edge costs, a root, a terminal set and per-vertex
/// out-degree bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedInstance {
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    pub root: usize,
    /// Terminals in input order.
    pub terminals: Vec<usize>,
    pub degree_bound: Vec<u32>,
}

impl DirectedInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        self.validate_structure()?;
        if let Some(v) = self.degree_bound.iter().position(|&d| d == 0) {
            return Err(InstanceError::ZeroDegreeBound(v));
        }
        Ok(())
    }

    /// Everything except the positivity of degree bounds, which normalized
    /// graphs relax for terminal copies.
    pub(crate) fn validate_structure(&self) -> Result<(), InstanceError> {
        let n = self.vertex_count;
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        if self.degree_bound.len() != n {
            return Err(InstanceError::LengthMismatch {
                what: "degree_bound",
                expected: n,
                found: self.degree_bound.len(),
            });
        }
        let in_range = |what: &'static str, id: usize| {
            if id < n {
                Ok(())
            } else {
                Err(InstanceError::IdOutOfRange { what, id, n })
            }
        };
        in_range("root", self.root)?;
        let mut seen = HashSet::new();
        for e in &self.edges {
            in_range("edge tail", e.from)?;
            in_range("edge head", e.to)?;
            if e.from == e.to {
                return Err(InstanceError::SelfLoop(e.from));
            }
            if !seen.insert((e.from, e.to)) {
                return Err(InstanceError::DuplicateEdge(e.from, e.to));
            }
        }
        if self.terminals.is_empty() {
            return Err(InstanceError::NoTerminals);
        }
        let mut terms = HashSet::new();
        for &t in &self.terminals {
            in_range("terminal", t)?;
            if t == self.root {
                return Err(InstanceError::RootIsTerminal(t));
            }
            if !terms.insert(t) {
                return Err(InstanceError::DuplicateTerminal(t));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.terminals.len()
    }

    pub fn d_max(&self) -> u32 {
        self.degree_bound.iter().copied().max().unwrap_or(0)
    }

    pub fn is_terminal_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertex_count];
        for &t in &self.terminals {
            mask[t] = true;
        }
        mask
    }

    /// Outgoing edge ids per vertex, ordered by head id.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from].push(i);
        }
        for list in &mut out {
            list.sort_by_key(|&i| self.edges[i].to);
        }
        out
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for e in &self.edges {
            deg[e.to] += 1;
        }
        deg
    }

    pub fn edge_lookup(&self) -> HashMap<(usize, usize), usize> {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.from, e.to), i))
            .collect()
    }

    /// Vertices reachable from the root along directed edges.
    pub fn reachable_from_root(&self) -> Vec<bool> {
        let out = self.out_edges();
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(u) = stack.pop() {
            for &e in &out[u] {
                let v = self.edges[e].to;
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn edge_cost_sum(&self, edge_ids: &[usize]) -> u64 {
        edge_ids.iter().map(|&e| self.edges[e].cost).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> DirectedInstance {
        DirectedInstance {
            vertex_count: 2,
            edges: vec![Edge { from: 0, to: 1, cost: 5 }],
            root: 0,
            terminals: vec![1],
            degree_bound: vec![1, 1],
        }
    }

    #[test]
    fn single_edge_is_valid() {
        assert_eq!(single_edge().validate(), Ok(()));
    }

    #[test]
    fn invariant_violations_are_reported() {
        let mut inst = single_edge();
        inst.terminals = vec![0];
        assert_eq!(inst.validate(), Err(InstanceError::RootIsTerminal(0)));

        let mut inst = single_edge();
        inst.edges.push(Edge { from: 0, to: 1, cost: 1 });
        assert_eq!(inst.validate(), Err(InstanceError::DuplicateEdge(0, 1)));

        let mut inst = single_edge();
        inst.edges.push(Edge { from: 1, to: 1, cost: 1 });
        assert_eq!(inst.validate(), Err(InstanceError::SelfLoop(1)));

        let mut inst = single_edge();
        inst.degree_bound[0] = 0;
        assert_eq!(inst.validate(), Err(InstanceError::ZeroDegreeBound(0)));

        let mut inst = single_edge();
        inst.terminals = vec![2];
        assert!(matches!(inst.validate(), Err(InstanceError::IdOutOfRange { id: 2, .. })));
    }
}
