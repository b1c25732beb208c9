//! Independent re-checks of solver output against the instance.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dst_round::DstRunReport;
use crate::gst_round::GstRunReport;
use crate::instances::{DirectedInstance, GroupTreeInstance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Issue {
    UnknownEdge { from: usize, to: usize },
    UnknownVertex(usize),
    UnknownEdgeId(usize),
    MissingRoot,
    EdgeIntoRoot { from: usize },
    SecondParent { vertex: usize },
    Detached { vertex: usize },
    NotASubtree { vertex: usize },
    CostMismatch { what: &'static str, reported: f64, actual: f64 },
    CoverageMismatch { what: &'static str },
    DegreeMismatch { vertex: usize, reported: Option<f64>, actual: Option<f64> },
    TreeAboveUnion { tree: u64, union: u64 },
    RepetitionCount { expected: usize, found: usize },
}

/// Cost, coverage and degree ratios of a verified arborescence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSummary {
    pub cost: u64,
    pub covered: Vec<usize>,
    pub uncovered: Vec<usize>,
    pub degree_ratio: BTreeMap<usize, f64>,
}

/// Checks that `edges` form an arborescence rooted at the root of `src`
/// using only graph edges.
pub fn check_dst_tree(src: &DirectedInstance, edges: &[(usize, usize)]) -> Result<TreeSummary, Vec<Issue>> {
    let lookup = src.edge_lookup();
    let n = src.vertex_count;
    let mut issues = Vec::new();
    let mut parent = vec![None; n];
    let mut cost = 0;
    let mut out = vec![0u32; n];
    for &(from, to) in edges {
        let Some(&e) = lookup.get(&(from, to)) else {
            issues.push(Issue::UnknownEdge { from, to });
            continue;
        };
        cost += src.edges[e].cost;
        out[from] += 1;
        if to == src.root {
            issues.push(Issue::EdgeIntoRoot { from });
        } else if parent[to].replace(from).is_some() {
            issues.push(Issue::SecondParent { vertex: to });
        }
    }
    if !issues.is_empty() {
        return Err(issues);
    }
    // Every vertex with a parent must reach the root by parent links.
    for v in 0..n {
        let mut u = v;
        let mut steps = 0;
        while let Some(p) = parent[u] {
            u = p;
            steps += 1;
            if steps > n {
                break;
            }
        }
        if parent[v].is_some() && u != src.root {
            issues.push(Issue::Detached { vertex: v });
        }
    }
    if !issues.is_empty() {
        return Err(issues);
    }
    let (covered, uncovered) = src.terminals.iter().partition(|&&t| parent[t].is_some());
    let degree_ratio = (0..n)
        .filter(|&v| out[v] > 0)
        .map(|v| (v, f64::from(out[v]) / f64::from(src.degree_bound[v])))
        .collect();
    Ok(TreeSummary { cost, covered, uncovered, degree_ratio })
}

fn ratios_agree(reported: &BTreeMap<usize, f64>, actual: &BTreeMap<usize, f64>, issues: &mut Vec<Issue>) {
    let keys: std::collections::BTreeSet<usize> = reported.keys().chain(actual.keys()).copied().collect();
    for v in keys {
        let (r, a) = (reported.get(&v).copied(), actual.get(&v).copied());
        let same = matches!((r, a), (Some(r), Some(a)) if (r - a).abs() <= 1e-9 * a.max(1.0));
        if !same {
            issues.push(Issue::DegreeMismatch { vertex: v, reported: r, actual: a });
        }
    }
}

/// Re-derives the extracted tree, its cost, coverage and degree ratios, and
/// the union cost of a DST report.
pub fn verify_dst_report(src: &DirectedInstance, report: &DstRunReport) -> Vec<Issue> {
    let summary = match check_dst_tree(src, &report.tree_edges) {
        Ok(s) => s,
        Err(issues) => return issues,
    };
    let mut issues = Vec::new();
    if summary.cost != report.tree_cost {
        issues.push(Issue::CostMismatch { what: "tree", reported: report.tree_cost as f64, actual: summary.cost as f64 });
    }
    match report.union_edges.iter().find(|&&e| e >= src.edges.len()) {
        Some(&e) => issues.push(Issue::UnknownEdgeId(e)),
        None => {
            let union = src.edge_cost_sum(&report.union_edges);
            if union != report.union_cost {
                issues.push(Issue::CostMismatch { what: "union", reported: report.union_cost as f64, actual: union as f64 });
            }
        }
    }
    if report.tree_cost > report.union_cost {
        issues.push(Issue::TreeAboveUnion { tree: report.tree_cost, union: report.union_cost });
    }
    if summary.covered.len() != report.coverage.covered
        || report.coverage.total != src.terminals.len()
        || summary.uncovered != report.uncovered
    {
        issues.push(Issue::CoverageMismatch { what: "terminals" });
    }
    if report.repetition_costs.len() != report.q {
        issues.push(Issue::RepetitionCount { expected: report.q, found: report.repetition_costs.len() });
    }
    ratios_agree(&report.degree_violations, &summary.degree_ratio, &mut issues);
    issues
}

/// Checks that `vertices` contain the root and the parent of every member.
pub fn check_gst_subtree(inst: &GroupTreeInstance, vertices: &[usize]) -> Vec<Issue> {
    let n = inst.vertex_count();
    let mut member = vec![false; n];
    let mut issues = Vec::new();
    for &v in vertices {
        match member.get_mut(v) {
            Some(m) => *m = true,
            None => issues.push(Issue::UnknownVertex(v)),
        }
    }
    for &v in vertices.iter().filter(|&&v| v < n) {
        let ok = match inst.parent[v] {
            Some(p) => member[p],
            None => true,
        };
        if !ok {
            issues.push(Issue::NotASubtree { vertex: v });
        }
    }
    if !vertices.is_empty() && !vertices.iter().any(|&v| v < n && inst.parent[v].is_none()) {
        issues.push(Issue::MissingRoot);
    }
    issues
}

/// Re-derives connectivity, costs, coverage and child-count ratios of a
/// GST report.
pub fn verify_gst_report(inst: &GroupTreeInstance, report: &GstRunReport) -> Vec<Issue> {
    let mut issues = check_gst_subtree(inst, &report.union_vertices);
    for rep in &report.repetition_vertices {
        issues.extend(check_gst_subtree(inst, rep));
    }
    if !issues.is_empty() {
        return issues;
    }
    if report.repetition_vertices.len() != report.m || report.repetition_costs.len() != report.m {
        issues.push(Issue::RepetitionCount { expected: report.m, found: report.repetition_vertices.len() });
    }
    for (rep, &c) in report.repetition_vertices.iter().zip(&report.repetition_costs) {
        let actual = inst.vertex_cost_sum(rep);
        if actual != c {
            issues.push(Issue::CostMismatch { what: "repetition", reported: c as f64, actual: actual as f64 });
        }
    }
    let mut union: Vec<usize> = report.repetition_vertices.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    if union != report.union_vertices {
        issues.push(Issue::CoverageMismatch { what: "union of repetitions" });
    }
    let union_cost = inst.vertex_cost_sum(&report.union_vertices);
    if union_cost != report.union_cost {
        issues.push(Issue::CostMismatch { what: "union", reported: report.union_cost as f64, actual: union_cost as f64 });
    }
    let mut member = vec![false; inst.vertex_count()];
    report.union_vertices.iter().for_each(|&v| member[v] = true);
    let coverage: Vec<bool> = inst.groups.iter().map(|g| g.iter().any(|&o| member[o])).collect();
    if coverage != report.coverage {
        issues.push(Issue::CoverageMismatch { what: "groups" });
    }
    let synthetic = inst.synthetic_children();
    let mut kids = vec![0u32; inst.vertex_count()];
    for &v in &report.union_vertices {
        if let (Some(p), false) = (inst.parent[v], inst.synthetic_leaf[v]) {
            kids[p] += 1;
        }
    }
    let actual = (0..inst.vertex_count())
        .filter(|&u| kids[u] > 0)
        .map(|u| (u, f64::from(kids[u]) / f64::from(inst.degree_bound[u].saturating_sub(synthetic[u]).max(1))))
        .collect();
    ratios_agree(&report.degree_violations, &actual, &mut issues);
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Edge;

    fn diamond() -> DirectedInstance {
        DirectedInstance {
            vertex_count: 4,
            edges: vec![
                Edge { from: 0, to: 1, cost: 1 },
                Edge { from: 0, to: 2, cost: 2 },
                Edge { from: 1, to: 3, cost: 3 },
                Edge { from: 2, to: 3, cost: 4 },
            ],
            root: 0,
            terminals: vec![2, 3],
            degree_bound: vec![1, 1, 1, 1],
        }
    }

    #[test]
    fn accepts_an_arborescence() {
        let s = check_dst_tree(&diamond(), &[(0, 1), (1, 3)]).unwrap();
        assert_eq!(s.cost, 4);
        assert_eq!(s.covered, vec![3]);
        assert_eq!(s.uncovered, vec![2]);
        assert_eq!(s.degree_ratio, BTreeMap::from([(0, 1.0), (1, 1.0)]));
    }

    #[test]
    fn rejects_bad_edge_sets() {
        let d = diamond();
        assert_eq!(check_dst_tree(&d, &[(1, 2)]).unwrap_err(), vec![Issue::UnknownEdge { from: 1, to: 2 }]);
        assert_eq!(
            check_dst_tree(&d, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap_err(),
            vec![Issue::SecondParent { vertex: 3 }]
        );
        assert_eq!(check_dst_tree(&d, &[(1, 3)]).unwrap_err(), vec![Issue::Detached { vertex: 3 }]);
    }

    #[test]
    fn gst_subtree_connectivity() {
        let inst = GroupTreeInstance {
            parent: vec![None, Some(0), Some(1)],
            cost: vec![1, 1, 1],
            groups: vec![vec![2]],
            degree_bound: vec![1; 3],
            synthetic_leaf: vec![false; 3],
        };
        assert!(check_gst_subtree(&inst, &[0, 1, 2]).is_empty());
        assert_eq!(check_gst_subtree(&inst, &[0, 2]), vec![Issue::NotASubtree { vertex: 2 }]);
        assert_eq!(check_gst_subtree(&inst, &[0, 7]), vec![Issue::UnknownVertex(7)]);
    }
}
