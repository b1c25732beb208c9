use super::model::{LpModel, LpSolution, Relation, RowTag};
use super::solve::{solve_lp_with, SolveOptions};
use super::LpError;
use crate::instances::{GroupTreeInstance, InstanceError};
use crate::treekit::RootedTree;

/// The GST relaxation; variable `u` belongs to tree vertex `u`.
#[derive(Debug, Clone)]
pub struct GstLp {
    pub model: LpModel,
    pub tree: RootedTree,
}

/// Builds the LP with one variable per vertex.
///
/// A group-capacity row at `u` is implied by the row at `v` whenever all of
/// `O_t ∩ Λ*_u` lies below a single child `v` (through `x_v ≤ x_u`), so
/// rows are kept only at the root and at vertices where the group's members
/// come from at least two children.
pub fn build_gst_lp(inst: &GroupTreeInstance) -> Result<GstLp, InstanceError> {
    inst.validate()?;
    let tree = inst.tree()?;
    let keep = vec![true; tree.len()];
    let model = build_restricted(inst, &tree, &keep).0;
    Ok(GstLp { model, tree })
}

/// Vertices with at least one group member in their subtree. Every other
/// vertex can be set to 0 in an optimal solution without breaking a
/// constraint, since costs are non-negative.
pub fn relevant_vertices(inst: &GroupTreeInstance, tree: &RootedTree) -> Vec<bool> {
    let mut rel = vec![false; tree.len()];
    for g in &inst.groups {
        for &o in g {
            let mut v = Some(o);
            while let Some(u) = v {
                if rel[u] {
                    break;
                }
                rel[u] = true;
                v = tree.parent(u);
            }
        }
    }
    rel
}

/// Solves the LP over the relevant vertices only and extends the answer by
/// zeros; the objective and feasibility carry over to the full model.
pub fn solve_gst_lp(inst: &GroupTreeInstance, opts: &SolveOptions) -> Result<(GstLp, LpSolution), LpError> {
    let full = build_gst_lp(inst).map_err(|e| LpError::Malformed(e.to_string()))?;
    let keep = relevant_vertices(inst, &full.tree);
    let (small, index) = build_restricted(inst, &full.tree, &keep);
    let sol = solve_lp_with(&small, opts)?;
    if !sol.is_optimal() {
        return Ok((full, LpSolution::infeasible(inst.vertex_count())));
    }
    let mut x = vec![0.0; inst.vertex_count()];
    for (v, &i) in index.iter().enumerate() {
        if let Some(i) = i {
            x[v] = sol.x[i];
        }
    }
    let violation = full.model.max_violation(&x);
    if violation > super::EPS_FEAS {
        return Err(LpError::Inaccurate { violation });
    }
    let objective = full.model.objective_value(&x);
    Ok((full, LpSolution { status: sol.status, x, objective }))
}

fn build_restricted(inst: &GroupTreeInstance, tree: &RootedTree, keep: &[bool]) -> (LpModel, Vec<Option<usize>>) {
    let mut index = vec![None; tree.len()];
    let mut count = 0;
    for v in 0..tree.len() {
        if keep[v] {
            index[v] = Some(count);
            count += 1;
        }
    }
    let mut model = LpModel::unit_box(count);
    for v in 0..tree.len() {
        if let Some(i) = index[v] {
            model.objective[i] = inst.cost[v] as f64;
        }
    }

    for v in tree.preorder() {
        if let (Some(iv), Some(p)) = (index[v], tree.parent(v)) {
            let ip = index[p].expect("ancestors of kept vertices are kept");
            model.add_row(vec![(iv, 1.0), (ip, -1.0)], Relation::Le, 0.0, RowTag::GstMonotone);
        }
    }

    for g in &inst.groups {
        let row = g.iter().filter_map(|&o| index[o].map(|i| (i, 1.0))).collect();
        model.add_row(row, Relation::Eq, 1.0, RowTag::GstGroup);
    }

    let root = tree.root();
    let order = tree.preorder();
    for g in &inst.groups {
        let mut member = vec![false; tree.len()];
        for &o in g {
            member[o] = true;
        }
        // below[u]: members of this group in Λ*_u.
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); tree.len()];
        for &u in order.iter().rev() {
            if !keep[u] {
                continue;
            }
            let mut acc = if member[u] { vec![u] } else { Vec::new() };
            let mut sources = 0;
            for &c in tree.children(u) {
                if !below[c].is_empty() {
                    sources += 1;
                    acc.append(&mut below[c]);
                }
            }
            if (u == root || sources >= 2) && !acc.is_empty() && !(acc.len() == 1 && acc[0] == u) {
                let iu = index[u].expect("kept");
                let mut row: Vec<(usize, f64)> = acc.iter().map(|&o| (index[o].expect("kept"), 1.0)).collect();
                row.sort_unstable_by_key(|e| e.0);
                row.push((iu, -1.0));
                model.add_row(row, Relation::Le, 0.0, RowTag::GstCapacity);
            }
            below[u] = acc;
        }
    }

    for &u in &order {
        let Some(iu) = index[u] else { continue };
        let kids: Vec<(usize, f64)> = tree.children(u).iter().filter_map(|&c| index[c].map(|i| (i, 1.0))).collect();
        let d = inst.degree_bound[u] as f64;
        // With every child at most x_u the row only binds when there are more children than d_u.
        if kids.len() as f64 > d {
            let mut row = kids;
            row.push((iu, -d));
            model.add_row(row, Relation::Le, 0.0, RowTag::GstDegree);
        }
    }
    (model, index)
}
