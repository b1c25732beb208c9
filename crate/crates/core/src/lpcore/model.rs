use serde::Serialize;

use super::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Which constraint family a row belongs to; used for counting and naming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RowTag {
    Generic,
    /// Children of a state node (or the super node) sum to the node.
    DstChoice,
    /// Each child of a virtual node equals the virtual node.
    DstVirtual,
    /// Descendant base nodes of one terminal sum to at most the node.
    DstCapacity,
    /// Base nodes of one terminal sum to one.
    DstCover,
    GstMonotone,
    GstGroup,
    GstCapacity,
    GstDegree,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub tag: RowTag,
}

/// Minimize `objective · x` subject to sparse rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpModel {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub fn infeasible(num_vars: usize) -> Self {
        LpSolution { status: LpStatus::Infeasible, x: vec![0.0; num_vars], objective: f64::INFINITY }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LpModel {
    /// `n` variables in `[0, 1]` with zero objective.
    pub fn unit_box(n: usize) -> Self {
        LpModel { num_vars: n, objective: vec![0.0; n], rows: Vec::new(), lower: vec![0.0; n], upper: vec![1.0; n] }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64, tag: RowTag) {
        self.rows.push(Row { coeffs, relation, rhs, tag });
    }

    pub fn count(&self, tag: RowTag) -> usize {
        self.rows.iter().filter(|r| r.tag == tag).count()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars;
        if self.objective.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed("vector lengths differ from num_vars".into()));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() || self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(LpError::Malformed(format!("non-finite data for variable {j}")));
            }
            if self.lower[j] > self.upper[j] {
                return Err(LpError::Malformed(format!("variable {j} has lower bound above upper bound")));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() || r.coeffs.iter().any(|&(j, c)| j >= n || !c.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} has a bad index or coefficient")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
            let v = match r.relation {
                Relation::Le => lhs - r.rhs,
                Relation::Ge => r.rhs - lhs,
                Relation::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Fixed-column MPS text, readable by external solvers.
    pub fn to_mps(&self, name: &str) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "NAME          {name}");
        let _ = writeln!(s, "ROWS");
        let _ = writeln!(s, " N  OBJ");
        for (i, r) in self.rows.iter().enumerate() {
            let t = match r.relation {
                Relation::Le => 'L',
                Relation::Eq => 'E',
                Relation::Ge => 'G',
            };
            let _ = writeln!(s, " {t}  R{i}");
        }
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.num_vars];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, c) in &r.coeffs {
                cols[j].push((i, c));
            }
        }
        let _ = writeln!(s, "COLUMNS");
        for (j, col) in cols.iter().enumerate() {
            if self.objective[j] != 0.0 {
                let _ = writeln!(s, "    X{j:<8}  {:<8}  {}", "OBJ", self.objective[j]);
            }
            for &(i, c) in col {
                let _ = writeln!(s, "    X{j:<8}  R{i:<7}  {c}");
            }
        }
        let _ = writeln!(s, "RHS");
        for (i, r) in self.rows.iter().enumerate() {
            if r.rhs != 0.0 {
                let _ = writeln!(s, "    RHS       R{i:<7}  {}", r.rhs);
            }
        }
        let _ = writeln!(s, "BOUNDS");
        for j in 0..self.num_vars {
            if self.lower[j] != 0.0 {
                let _ = writeln!(s, " LO BND       X{j:<8}  {}", self.lower[j]);
            }
            if self.upper[j].is_finite() {
                let _ = writeln!(s, " UP BND       X{j:<8}  {}", self.upper[j]);
            }
        }
        let _ = writeln!(s, "ENDATA");
        s
    }
}
