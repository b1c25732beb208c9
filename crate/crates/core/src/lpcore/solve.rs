use std::time::Duration;

use highs::{HighsModelStatus, RowProblem, Sense};
use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

use super::model::{LpModel, LpSolution, LpStatus, Relation};
use super::{LpError, EPS_FEAS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Dual simplex from HiGHS, single-threaded with tightened tolerances.
    #[default]
    Highs,
    /// Sparse revised simplex from the pure-Rust `microlp` crate.
    Sparse,
    /// Dense two-phase tableau simplex with Bland's rule. Only suitable for
    /// small models; used to cross-check the sparse backend.
    DenseBland,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub backend: Backend,
    pub time_limit: Option<Duration>,
    pub max_pivots: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { backend: Backend::Highs, time_limit: None, max_pivots: 200_000 }
    }
}

pub fn solve_lp(model: &LpModel) -> Result<LpSolution, LpError> {
    solve_lp_with(model, &SolveOptions::default())
}

/// Solves `model` and checks every constraint of an optimal answer against
/// `EPS_FEAS` in a pass that does not trust the backend.
pub fn solve_lp_with(model: &LpModel, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    model.validate()?;
    let mut sol = match opts.backend {
        Backend::Highs => solve_highs(model, opts.time_limit)?,
        Backend::Sparse => solve_sparse(model, opts.time_limit)?,
        Backend::DenseBland => DenseSimplex::new(model).solve(opts.max_pivots)?,
    };
    if sol.is_optimal() {
        for (j, v) in sol.x.iter_mut().enumerate() {
            // Snap backend noise onto the box; larger excursions still fail below.
            if (*v - model.lower[j]).abs() <= EPS_FEAS {
                *v = model.lower[j];
            } else if (*v - model.upper[j]).abs() <= EPS_FEAS {
                *v = model.upper[j];
            }
        }
        let violation = model.max_violation(&sol.x);
        if violation > EPS_FEAS {
            return Err(LpError::Inaccurate { violation });
        }
        sol.objective = model.objective_value(&sol.x);
    }
    Ok(sol)
}

fn solve_highs(model: &LpModel, time_limit: Option<Duration>) -> Result<LpSolution, LpError> {
    if model.num_vars == 0 {
        let feasible = model.max_violation(&[]) <= EPS_FEAS;
        return Ok(if feasible {
            LpSolution { status: LpStatus::Optimal, x: Vec::new(), objective: 0.0 }
        } else {
            LpSolution::infeasible(0)
        });
    }
    let mut p = RowProblem::default();
    let cols: Vec<_> = (0..model.num_vars).map(|j| p.add_column(model.objective[j], model.lower[j]..=model.upper[j])).collect();
    for r in &model.rows {
        let coeffs: Vec<_> = r.coeffs.iter().map(|&(j, c)| (cols[j], c)).collect();
        match r.relation {
            Relation::Le => p.add_row(..=r.rhs, coeffs),
            Relation::Eq => p.add_row(r.rhs..=r.rhs, coeffs),
            Relation::Ge => p.add_row(r.rhs.., coeffs),
        }
    }
    let mut m = p.optimise(Sense::Minimise);
    m.make_quiet();
    m.set_option("threads", 1);
    m.set_option("solver", "simplex");
    m.set_option("primal_feasibility_tolerance", 1e-10);
    m.set_option("dual_feasibility_tolerance", 1e-10);
    if let Some(t) = time_limit {
        m.set_option("time_limit", t.as_secs_f64());
    }
    let solved = m.solve();
    match solved.status() {
        HighsModelStatus::Optimal => {
            let x = solved.get_solution().columns().to_vec();
            Ok(LpSolution { status: LpStatus::Optimal, objective: model.objective_value(&x), x })
        }
        HighsModelStatus::Infeasible => Ok(LpSolution::infeasible(model.num_vars)),
        HighsModelStatus::Unbounded => Err(LpError::Unbounded),
        HighsModelStatus::ReachedTimeLimit | HighsModelStatus::ReachedIterationLimit => Err(LpError::IterationLimit),
        other => Err(LpError::Backend(format!("HiGHS status {other:?}"))),
    }
}

fn solve_sparse(model: &LpModel, time_limit: Option<Duration>) -> Result<LpSolution, LpError> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> =
        (0..model.num_vars).map(|j| p.add_var(model.objective[j], (model.lower[j], model.upper[j]))).collect();
    for r in &model.rows {
        let op = match r.relation {
            Relation::Le => ComparisonOp::Le,
            Relation::Eq => ComparisonOp::Eq,
            Relation::Ge => ComparisonOp::Ge,
        };
        p.add_constraint(r.coeffs.iter().map(|&(j, c)| (vars[j], c)).collect::<Vec<_>>().as_slice(), op, r.rhs);
    }
    if let Some(t) = time_limit {
        p.set_time_limit(t);
    }
    match p.solve() {
        Ok(SolveOutcome::Solution(s)) => {
            let x: Vec<f64> = vars.iter().map(|&v| s.var_value_raw(v)).collect();
            Ok(LpSolution { status: LpStatus::Optimal, objective: model.objective_value(&x), x })
        }
        Ok(SolveOutcome::Interrupted(_)) => Err(LpError::IterationLimit),
        Err(microlp::Error::Infeasible) => Ok(LpSolution::infeasible(model.num_vars)),
        Err(microlp::Error::Unbounded) => Err(LpError::Unbounded),
        Err(e) => Err(LpError::Backend(e.to_string())),
    }
}

const PIVOT_EPS: f64 = 1e-11;

/// Tableau over `y = x - lower` in standard form `A y + s = b, y, s ≥ 0`,
/// with `b ≥ 0` after row negation and one artificial column per row.
struct DenseSimplex {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    structural: usize,
    artificial_start: usize,
    cost: Vec<f64>,
    shift: Vec<f64>,
}

impl DenseSimplex {
    fn new(model: &LpModel) -> Self {
        let n = model.num_vars;
        let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::new();
        for r in &model.rows {
            let shift: f64 = r.coeffs.iter().map(|&(j, c)| c * model.lower[j]).sum();
            rows.push((r.coeffs.clone(), r.relation, r.rhs - shift));
        }
        for j in 0..n {
            if model.upper[j].is_finite() {
                rows.push((vec![(j, 1.0)], Relation::Le, model.upper[j] - model.lower[j]));
            }
        }
        let m = rows.len();
        let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificial_start = n + slack_count;
        let cols = artificial_start + m;
        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut slack = n;
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            for &(j, c) in coeffs {
                t[i][j] += c;
            }
            match rel {
                Relation::Le => {
                    t[i][slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    t[i][slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            t[i][cols] = *rhs;
            if *rhs < 0.0 {
                t[i].iter_mut().for_each(|v| *v = -*v);
            }
            t[i][artificial_start + i] = 1.0;
        }
        let mut cost = vec![0.0; cols];
        cost[..n].copy_from_slice(&model.objective);
        DenseSimplex {
            t,
            basis: (artificial_start..cols).collect(),
            cols,
            structural: n,
            artificial_start,
            cost,
            shift: model.lower.clone(),
        }
    }

    fn solve(mut self, max_pivots: usize) -> Result<LpSolution, LpError> {
        let mut pivots = 0;
        let phase1: Vec<f64> = (0..self.cols).map(|j| if j >= self.artificial_start { 1.0 } else { 0.0 }).collect();
        self.optimize(&phase1, self.cols, &mut pivots, max_pivots)?;
        let infeasibility: f64 = self.basis.iter().zip(&self.t).map(|(&b, row)| phase1[b] * row[self.cols]).sum();
        if infeasibility > 1e-9 {
            return Ok(LpSolution::infeasible(self.structural));
        }
        self.drive_out_artificials();
        let cost = self.cost.clone();
        self.optimize(&cost, self.artificial_start, &mut pivots, max_pivots)?;
        let mut x = self.shift.clone();
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                x[b] += self.t[i][self.cols];
            }
        }
        let objective = self.cost[..self.structural].iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { status: LpStatus::Optimal, x, objective })
    }

    /// Bland's rule: entering column is the lowest index with negative
    /// reduced cost; ties in the ratio test go to the lowest basic index.
    fn optimize(&mut self, c: &[f64], allowed: usize, pivots: &mut usize, max: usize) -> Result<(), LpError> {
        loop {
            let entering = (0..allowed).find(|&j| {
                !self.basis.contains(&j) && {
                    let reduced: f64 =
                        c[j] - self.basis.iter().zip(&self.t).map(|(&b, row)| c[b] * row[j]).sum::<f64>();
                    reduced < -1e-10
                }
            });
            let Some(q) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[q] > PIVOT_EPS {
                    let ratio = row[self.cols] / row[q];
                    leave = match leave {
                        Some((l, best))
                            if best < ratio - 1e-12
                                || ((best - ratio).abs() <= 1e-12 && self.basis[l] < self.basis[i]) =>
                        {
                            Some((l, best))
                        }
                        _ => Some((i, ratio)),
                    };
                }
            }
            let Some((p, _)) = leave else { return Err(LpError::Unbounded) };
            *pivots += 1;
            if *pivots > max {
                return Err(LpError::IterationLimit);
            }
            self.pivot(p, q);
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let inv = 1.0 / self.t[p][q];
        self.t[p].iter_mut().for_each(|v| *v *= inv);
        let prow = self.t[p].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != p && row[q] != 0.0 {
                let f = row[q];
                row.iter_mut().zip(&prow).for_each(|(v, pv)| *v -= f * pv);
            }
        }
        self.basis[p] = q;
    }

    /// Zero-level artificials left in the basis are pivoted out when a
    /// non-artificial column is available; otherwise the row is redundant
    /// and is removed.
    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= self.artificial_start {
                match (0..self.artificial_start).find(|&j| self.t[i][j].abs() > 1e-9) {
                    Some(q) => self.pivot(i, q),
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::RowTag;

    fn all(model: &LpModel) -> [LpSolution; 3] {
        let with = |backend| solve_lp_with(model, &SolveOptions { backend, ..Default::default() }).unwrap();
        [with(Backend::Highs), with(Backend::Sparse), with(Backend::DenseBland)]
    }

    #[test]
    fn forced_variable() {
        let mut m = LpModel::unit_box(1);
        m.objective[0] = 1.0;
        m.add_row(vec![(0, 1.0)], Relation::Ge, 1.0, RowTag::Generic);
        for s in all(&m) {
            assert!(s.is_optimal());
            assert_eq!(s.x, vec![1.0]);
            assert_eq!(s.objective, 1.0);
        }
    }

    #[test]
    fn empty_polytope_is_infeasible() {
        let mut m = LpModel::unit_box(1);
        m.add_row(vec![(0, 1.0)], Relation::Ge, 2.0, RowTag::Generic);
        for s in all(&m) {
            assert_eq!(s.status, LpStatus::Infeasible);
        }
    }

    #[test]
    fn small_mixed_program() {
        // min -x - 2y  s.t. x + y ≤ 1.5, x - y + z = 0.5; optimum at y = 1, x = 0.5, z = 1
        let mut m = LpModel::unit_box(3);
        m.objective = vec![-1.0, -2.0, 0.0];
        m.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.5, RowTag::Generic);
        m.add_row(vec![(0, 1.0), (1, -1.0), (2, 1.0)], Relation::Eq, 0.5, RowTag::Generic);
        for s in all(&m) {
            assert!((s.objective + 2.5).abs() < 1e-9, "{}", s.objective);
        }
    }

    #[test]
    fn non_zero_lower_bounds_and_redundant_rows() {
        let mut m = LpModel::unit_box(2);
        m.lower = vec![0.25, 0.0];
        m.objective = vec![1.0, 1.0];
        m.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0, RowTag::Generic);
        m.add_row(vec![(0, 2.0), (1, 2.0)], Relation::Eq, 2.0, RowTag::Generic);
        for s in all(&m) {
            assert!((s.objective - 1.0).abs() < 1e-12);
            assert!(s.x[0] >= 0.25);
        }
    }

    #[test]
    fn dense_pivot_limit_is_an_error() {
        let mut m = LpModel::unit_box(2);
        m.objective = vec![-1.0, -1.0];
        m.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.5, RowTag::Generic);
        let opts = SolveOptions { backend: Backend::DenseBland, max_pivots: 0, ..Default::default() };
        assert_eq!(solve_lp_with(&m, &opts), Err(LpError::IterationLimit));
    }
}
