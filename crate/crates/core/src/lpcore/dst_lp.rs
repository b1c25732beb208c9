use super::model::{LpModel, Relation, RowTag};
use crate::states::{NodeKind, SuperTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DstLpOptions {
    /// Emit the capacity row of every node whose subtree meets `𝐎_t`.
    /// By default only rows that are not implied by the others are kept: at
    /// the super node, and at virtual nodes where `𝐎_t` meets the subtrees
    /// of both children.
    pub full_capacity_rows: bool,
}

/// The DST relaxation over a super-tree; variable `i` belongs to node `i`.
#[derive(Debug, Clone)]
pub struct DstLp {
    pub model: LpModel,
    /// Terminal positions (normalized terminal order) with no base node.
    pub uncoverable: Vec<usize>,
}

impl DstLp {
    pub fn is_trivially_infeasible(&self) -> bool {
        !self.uncoverable.is_empty()
    }
}

pub fn build_dst_lp(st: &SuperTree, k: usize) -> DstLp {
    build_dst_lp_with(st, k, DstLpOptions::default())
}

/// Capacity rows are justified bottom-up: a state node's row is the sum of
/// its children's rows through the choice equality, a base node's row is
/// `x_o ≤ x_o`, and a virtual node whose `𝐎_t` mass sits under one child
/// inherits that child's row through the copy equality.
pub fn build_dst_lp_with(st: &SuperTree, k: usize, opts: DstLpOptions) -> DstLp {
    let n = st.len();
    let mut model = LpModel::unit_box(n);
    for (i, c) in model.objective.iter_mut().enumerate() {
        *c = st.cost(i) as f64;
    }

    for p in 0..n {
        match st.node(p).kind {
            NodeKind::Super | NodeKind::State(_) => {
                let mut row: Vec<(usize, f64)> = st.children(p).map(|q| (q, 1.0)).collect();
                row.push((p, -1.0));
                model.add_row(row, Relation::Eq, 0.0, RowTag::DstChoice);
            }
            NodeKind::Virtual => {
                for q in st.children(p) {
                    model.add_row(vec![(q, 1.0), (p, -1.0)], Relation::Eq, 0.0, RowTag::DstVirtual);
                }
            }
            NodeKind::Base(_) => {}
        }
    }

    // below[t]: base nodes of terminal t in the current subtree, in id order.
    let mut is_base_of = vec![Vec::new(); n];
    for t in 0..k {
        for &o in st.terminal_nodes(t) {
            is_base_of[o as usize].push(t);
        }
    }
    // Children have larger ids than parents, so a reverse sweep sees every
    // subtree before its root.
    let mut below: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); n];
    for p in (0..n).rev() {
        let mut merged: Vec<(usize, Vec<usize>)> = is_base_of[p].iter().map(|&t| (t, vec![p])).collect();
        let mut sources: Vec<usize> = vec![0; k];
        for q in st.children(p) {
            for (t, nodes) in std::mem::take(&mut below[q]) {
                sources[t] += 1;
                match merged.iter_mut().find(|e| e.0 == t) {
                    Some(e) => e.1.extend(nodes),
                    None => merged.push((t, nodes)),
                }
            }
        }
        merged.sort_by_key(|e| e.0);
        let emit = |t: usize| match st.node(p).kind {
            _ if opts.full_capacity_rows => true,
            NodeKind::Super => true,
            NodeKind::Virtual => sources[t] >= 2,
            _ => false,
        };
        for (t, nodes) in &merged {
            if emit(*t) && !(nodes.len() == 1 && nodes[0] == p) {
                let mut row: Vec<(usize, f64)> = nodes.iter().map(|&o| (o, 1.0)).collect();
                row.sort_unstable_by_key(|e| e.0);
                row.push((p, -1.0));
                model.add_row(row, Relation::Le, 0.0, RowTag::DstCapacity);
            }
        }
        below[p] = merged;
    }

    let mut uncoverable = Vec::new();
    for t in 0..k {
        let row: Vec<(usize, f64)> = st.terminal_nodes(t).iter().map(|&o| (o as usize, 1.0)).collect();
        if row.is_empty() {
            uncoverable.push(t);
        }
        model.add_row(row, Relation::Eq, 1.0, RowTag::DstCover);
    }
    DstLp { model, uncoverable }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{normalize, DirectedInstance, Edge};
    use crate::lpcore::{solve_lp, LpStatus};
    use crate::states::{build_super_tree, DEFAULT_NODE_CAP};

    fn super_tree(n: usize, edges: &[(usize, usize, u64)], terms: &[usize], d: &[u32], h: usize) -> SuperTree {
        let norm = normalize(&DirectedInstance {
            vertex_count: n,
            edges: edges.iter().map(|&(from, to, cost)| Edge { from, to, cost }).collect(),
            root: 0,
            terminals: terms.to_vec(),
            degree_bound: d.to_vec(),
        })
        .unwrap();
        build_super_tree(&norm, h, DEFAULT_NODE_CAP).unwrap()
    }

    #[test]
    fn single_edge_lp_is_forced() {
        let st = super_tree(2, &[(0, 1, 7)], &[1], &[1, 1], 2);
        let lp = build_dst_lp(&st, 1);
        assert_eq!(lp.model.num_vars, 3);
        let sol = solve_lp(&lp.model).unwrap();
        assert_eq!(sol.x, vec![1.0, 1.0, 1.0]);
        assert_eq!(sol.objective, 7.0);
    }

    #[test]
    fn unreachable_terminal_is_flagged() {
        let st = super_tree(3, &[(0, 1, 1)], &[1, 2], &[2, 1, 1], 2);
        let lp = build_dst_lp(&st, 2);
        assert!(lp.is_trivially_infeasible());
        assert_eq!(solve_lp(&lp.model).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn reduced_and_full_capacity_rows_agree() {
        let edges = [(0, 1, 3), (0, 2, 4), (1, 3, 1), (1, 4, 2), (2, 3, 5), (2, 4, 1), (1, 2, 1)];
        let st = super_tree(5, &edges, &[3, 4], &[2, 2, 2, 1, 1], 3);
        let reduced = build_dst_lp(&st, 2);
        let full = build_dst_lp_with(&st, 2, DstLpOptions { full_capacity_rows: true });
        assert!(reduced.model.count(RowTag::DstCapacity) <= full.model.count(RowTag::DstCapacity));
        let a = solve_lp(&reduced.model).unwrap();
        let b = solve_lp(&full.model).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-7, "{} vs {}", a.objective, b.objective);
        assert!(full.model.max_violation(&a.x) < 1e-9);
    }
}
