use crate::error::{Error, Result};

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// A sparse linear row `sum coeffs (relation) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub tag: String,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, a)| a * x[i]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Convex mixed-binary QP with a diagonal quadratic objective:
///
/// ```text
/// minimize  sum_i quad_diag[i] x_i^2 + lin_cost[i] x_i
/// ```
///
/// Variables `0..n_cont` are continuous, `n_cont..n_cont + n_bin` binary.
#[derive(Debug, Clone, PartialEq)]
pub struct MiqpModel {
    pub n_cont: usize,
    pub n_bin: usize,
    pub quad_diag: Vec<f64>,
    pub lin_cost: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounds: Vec<(f64, f64)>,
    pub names: Vec<String>,
}

impl MiqpModel {
    /// Zero objective, no rows, continuous variables free, binaries in [0, 1].
    pub fn new(n_cont: usize, n_bin: usize) -> Self {
        let n = n_cont + n_bin;
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n_cont];
        bounds.resize(n, (0.0, 1.0));
        let names = (0..n)
            .map(|i| {
                if i < n_cont {
                    format!("x{i}")
                } else {
                    format!("b{}", i - n_cont)
                }
            })
            .collect();
        Self {
            n_cont,
            n_bin,
            quad_diag: vec![0.0; n],
            lin_cost: vec![0.0; n],
            rows: Vec::new(),
            bounds,
            names,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_cont + self.n_bin
    }

    pub fn is_binary(&self, i: usize) -> bool {
        i >= self.n_cont && i < self.n_vars()
    }

    pub fn binary_range(&self) -> std::ops::Range<usize> {
        self.n_cont..self.n_vars()
    }

    pub fn add_row(
        &mut self,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
        tag: impl Into<String>,
    ) {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
            tag: tag.into(),
        });
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, &v)| self.quad_diag[i] * v * v + self.lin_cost[i] * v)
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        for (name, len) in [
            ("quad_diag", self.quad_diag.len()),
            ("lin_cost", self.lin_cost.len()),
            ("bounds", self.bounds.len()),
            ("names", self.names.len()),
        ] {
            if len != n {
                return Err(Error::Model(format!(
                    "{name} has {len} entries, expected {n}"
                )));
            }
        }
        for i in 0..n {
            let q = self.quad_diag[i];
            if !(q.is_finite() && q >= 0.0) {
                return Err(Error::Model(format!(
                    "quad_diag[{i}] = {q} must be finite and >= 0"
                )));
            }
            if !self.lin_cost[i].is_finite() {
                return Err(Error::Model(format!("lin_cost[{i}] is not finite")));
            }
            let (l, u) = self.bounds[i];
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::Model(format!(
                    "bounds[{i}] = ({l}, {u}) are invalid"
                )));
            }
            if self.is_binary(i) && (l < 0.0 || u > 1.0) {
                return Err(Error::Model(format!(
                    "binary variable {i} has bounds ({l}, {u}) outside [0, 1]"
                )));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Model(format!(
                    "row {r} ({}) has a non-finite rhs",
                    row.tag
                )));
            }
            for &(i, a) in &row.coeffs {
                if i >= n || !a.is_finite() {
                    return Err(Error::Model(format!(
                        "row {r} ({}) has a bad entry ({i}, {a})",
                        row.tag
                    )));
                }
            }
        }
        Ok(())
    }

    /// Tags of rows violated by more than `tol`, bounds and integrality
    /// included (reported as `bound:<name>` and `integrality:<name>`).
    pub fn violations(&self, x: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &v) in x.iter().enumerate() {
            let (l, u) = self.bounds[i];
            if v < l - tol || v > u + tol {
                out.push(format!("bound:{}", self.names[i]));
            }
            if self.is_binary(i) && v != 0.0 && v != 1.0 {
                out.push(format!("integrality:{}", self.names[i]));
            }
        }
        for row in &self.rows {
            if row.violation(x) > tol {
                out.push(row.tag.clone());
            }
        }
        out
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.n_vars() && self.violations(x, tol).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_counts() {
        let m = MiqpModel::new(2, 3);
        assert_eq!(m.n_vars(), 5);
        assert!(!m.is_binary(1) && m.is_binary(2) && m.is_binary(4));
        assert_eq!(m.bounds[3], (0.0, 1.0));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn validation_errors() {
        let mut m = MiqpModel::new(1, 1);
        m.quad_diag[0] = -1.0;
        assert!(m.validate().is_err());
        let mut m = MiqpModel::new(1, 1);
        m.bounds[1] = (0.0, 2.0);
        assert!(m.validate().is_err());
        let mut m = MiqpModel::new(1, 0);
        m.add_row(vec![(3, 1.0)], Relation::Le, 0.0, "bad");
        assert!(m.validate().is_err());
    }

    #[test]
    fn violation_report() {
        let mut m = MiqpModel::new(1, 1);
        m.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 2.0, "cover");
        m.add_row(vec![(0, 1.0)], Relation::Eq, 1.0, "pin");
        assert!(m.is_feasible(&[1.0, 1.0], 1e-9));
        let v = m.violations(&[1.0, 0.5], 1e-9);
        assert_eq!(v, vec!["integrality:b0".to_string(), "cover".to_string()]);
        assert!((m.rows[1].violation(&[1.5, 0.0]) - 0.5).abs() < 1e-15);
    }
}
