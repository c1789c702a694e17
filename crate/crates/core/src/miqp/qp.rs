//! Dense convex QP with a diagonal Hessian and sparse linear rows.
//!
//! ```text
//!     minimize    sum_i quad_i x_i^2 + lin_i x_i
//!     subject to  rows (<=, >=, =),  lower <= x <= upper
//! ```
//!
//! Fixed variables are substituted out first and rows left without free
//! variables are checked directly. Singleton rows become bounds. What remains
//! goes to a Goldfarb-Idnani dual active-set method; zero-curvature variables
//! get a tiny proximal curvature so the Hessian is positive definite.

use super::model::{Relation, Row};
use crate::error::{Error, Result};

/// Curvature given to variables whose quadratic cost is zero.
const CURVATURE: f64 = 1e-9;
/// Constraint violation accepted by the active-set method, relative to
/// `1 + |rhs|`.
const FEAS_TOL: f64 = 1e-11;
/// Violation, relative to `1 + |rhs|`, below which a constraint that
/// cannot be added is ignored instead of proving infeasibility.
const ROUNDOFF_TOL: f64 = 1e-9;
/// Relative size under which a step component counts as zero.
const DEP_TOL: f64 = 1e-12;
/// Width below which a variable is treated as fixed.
const FIXED_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpOptions {
    /// Feasibility tolerance used by the presolve.
    pub tol: f64,
    /// Active-set iteration limit, raised to `50 (n + m) + 100` when smaller.
    pub max_iter: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

/// Borrowed problem data.
#[derive(Debug, Clone, Copy)]
pub struct QpProblem<'a> {
    pub quad: &'a [f64],
    pub lin: &'a [f64],
    pub rows: &'a [Row],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

/// Unscaled KKT residuals of the reduced problem at the returned point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    /// `max_k |u_k s_k|` over the active constraints.
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub kkt: KktResiduals,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QpOutcome {
    Optimal(QpSolution),
    Infeasible,
}

pub fn solve_qp(p: &QpProblem<'_>, opts: &QpOptions) -> Result<QpOutcome> {
    let n = p.quad.len();
    debug_assert!(p.lin.len() == n && p.lower.len() == n && p.upper.len() == n);

    let mut lo = p.lower.to_vec();
    let mut up = p.upper.to_vec();
    for i in 0..n {
        if lo[i] > up[i] + opts.tol {
            return Ok(QpOutcome::Infeasible);
        }
        up[i] = up[i].max(lo[i]);
    }

    // Substitute fixed variables and turn single-variable rows into bounds,
    // repeating while bounds keep collapsing.
    let fixed = |lo: &[f64], up: &[f64], i: usize| up[i] - lo[i] <= FIXED_WIDTH;
    let (ineq_full, eq_full) = loop {
        let mut ineq = SparseRows::default();
        let mut eq = SparseRows::default();
        let mut newly_fixed = false;
        for row in p.rows {
            let mut fixed_part = 0.0;
            let mut coeffs = Vec::with_capacity(row.coeffs.len());
            for &(i, a) in &row.coeffs {
                if fixed(&lo, &up, i) {
                    fixed_part += a * lo[i];
                } else if a != 0.0 {
                    coeffs.push((i, a));
                }
            }
            let rhs = row.rhs - fixed_part;
            let tol = opts.tol * (1.0 + row.rhs.abs());
            if coeffs.is_empty() {
                let ok = match row.relation {
                    Relation::Le => 0.0 <= rhs + tol,
                    Relation::Ge => 0.0 >= rhs - tol,
                    Relation::Eq => rhs.abs() <= tol,
                };
                if !ok {
                    return Ok(QpOutcome::Infeasible);
                }
                continue;
            }
            if let [(i, a)] = coeffs[..] {
                let v = rhs / a;
                let (tighten_up, tighten_lo) = match row.relation {
                    Relation::Eq => (true, true),
                    Relation::Le => (a > 0.0, a < 0.0),
                    Relation::Ge => (a < 0.0, a > 0.0),
                };
                if tighten_up {
                    up[i] = up[i].min(v);
                }
                if tighten_lo {
                    lo[i] = lo[i].max(v);
                }
                if lo[i] > up[i] + tol / a.abs() {
                    return Ok(QpOutcome::Infeasible);
                }
                if up[i] - lo[i] <= FIXED_WIDTH {
                    let mid = 0.5 * (lo[i] + up[i]);
                    lo[i] = mid;
                    up[i] = mid;
                    newly_fixed = true;
                }
                continue;
            }
            match row.relation {
                Relation::Le => ineq.push(coeffs, rhs),
                Relation::Ge => ineq.push(coeffs.into_iter().map(|(j, a)| (j, -a)).collect(), -rhs),
                Relation::Eq => eq.push(coeffs, rhs),
            }
        }
        if !newly_fixed {
            break (ineq, eq);
        }
    };

    let mut free_of = vec![usize::MAX; n];
    let mut free_vars = Vec::new();
    let mut x = vec![0.0; n];
    for i in 0..n {
        if fixed(&lo, &up, i) {
            x[i] = lo[i];
        } else {
            free_of[i] = free_vars.len();
            free_vars.push(i);
        }
    }
    let remap = |rows: SparseRows| SparseRows {
        coeffs: rows
            .coeffs
            .into_iter()
            .map(|r| r.into_iter().map(|(i, a)| (free_of[i], a)).collect())
            .collect(),
        rhs: rows.rhs,
    };
    let ineq = remap(ineq_full);
    let eq = remap(eq_full);

    let lower: Vec<f64> = free_vars.iter().map(|&i| lo[i]).collect();
    let upper: Vec<f64> = free_vars.iter().map(|&i| up[i]).collect();
    if activity_infeasible(&ineq, &eq, &lower, &upper, opts.tol) {
        return Ok(QpOutcome::Infeasible);
    }

    let fixed_obj: f64 = (0..n)
        .filter(|&i| free_of[i] == usize::MAX)
        .map(|i| p.quad[i] * x[i] * x[i] + p.lin[i] * x[i])
        .sum();

    if free_vars.is_empty() {
        return Ok(QpOutcome::Optimal(QpSolution {
            x,
            objective: fixed_obj,
            kkt: KktResiduals::default(),
            iterations: 0,
        }));
    }

    let h: Vec<f64> = free_vars.iter().map(|&i| 2.0 * p.quad[i]).collect();
    let c: Vec<f64> = free_vars.iter().map(|&i| p.lin[i]).collect();
    let gi = DualActiveSet::new(&h, &c, &ineq, &eq, &lower, &upper);
    match gi.solve(opts.max_iter.max(50 * (gi.n + gi.rhs.len()) + 100)) {
        GiResult::Optimal(sol) => {
            for (k, &i) in free_vars.iter().enumerate() {
                x[i] = sol.x[k].clamp(lo[i], up[i]);
            }
            let objective = (0..n)
                .map(|i| p.quad[i] * x[i] * x[i] + p.lin[i] * x[i])
                .sum();
            Ok(QpOutcome::Optimal(QpSolution {
                x,
                objective,
                kkt: sol.kkt,
                iterations: sol.iterations,
            }))
        }
        GiResult::Infeasible => Ok(QpOutcome::Infeasible),
        GiResult::Stalled => Err(Error::Solver(format!(
            "active-set iteration limit reached ({} free variables, {} constraints)",
            gi.n,
            gi.rhs.len()
        ))),
    }
}

#[derive(Debug, Clone, Default)]
struct SparseRows {
    coeffs: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

impl SparseRows {
    fn push(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.coeffs.push(coeffs);
        self.rhs.push(rhs);
    }
}

/// True when some row cannot be satisfied by any point within the bounds.
fn activity_infeasible(
    ineq: &SparseRows,
    eq: &SparseRows,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> bool {
    let range = |row: &[(usize, f64)]| {
        let (mut lo, mut hi) = (0.0, 0.0);
        for &(i, a) in row {
            if a > 0.0 {
                lo += a * lower[i];
                hi += a * upper[i];
            } else {
                lo += a * upper[i];
                hi += a * lower[i];
            }
        }
        (lo, hi)
    };
    for (row, &rhs) in ineq.coeffs.iter().zip(&ineq.rhs) {
        let (lo, _) = range(row);
        if lo > rhs + tol * (1.0 + rhs.abs()) {
            return true;
        }
    }
    for (row, &rhs) in eq.coeffs.iter().zip(&eq.rhs) {
        let (lo, hi) = range(row);
        let tol = tol * (1.0 + rhs.abs());
        if lo > rhs + tol || hi < rhs - tol {
            return true;
        }
    }
    false
}

enum GiResult {
    Optimal(GiSolution),
    Infeasible,
    Stalled,
}

struct GiSolution {
    x: Vec<f64>,
    kkt: KktResiduals,
    iterations: usize,
}

/// Dual active-set method of Goldfarb and Idnani for
/// `min 1/2 x'Hx + c'x  s.t.  n_i'x >= b_i`, with `H` diagonal and positive.
///
/// The factorisation is kept as `J = L^{-T} Q'` with `J' N_A = [R; 0]`,
/// updated by Givens rotations as constraints enter and leave.
struct DualActiveSet<'a> {
    n: usize,
    h_true: &'a [f64],
    h: Vec<f64>,
    c: &'a [f64],
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    norms: Vec<f64>,
    /// For the two halves of a split equality, the index of the other half.
    twin: Vec<Option<usize>>,
}

impl<'a> DualActiveSet<'a> {
    fn new(
        h: &'a [f64],
        c: &'a [f64],
        ineq: &SparseRows,
        eq: &SparseRows,
        lower: &[f64],
        upper: &[f64],
    ) -> Self {
        let n = h.len();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut twin = Vec::new();
        for (r, &b) in ineq.coeffs.iter().zip(&ineq.rhs) {
            rows.push(r.iter().map(|&(i, a)| (i, -a)).collect());
            rhs.push(-b);
            twin.push(None);
        }
        for (r, &b) in eq.coeffs.iter().zip(&eq.rhs) {
            rows.push(r.clone());
            rhs.push(b);
            rows.push(r.iter().map(|&(i, a)| (i, -a)).collect());
            rhs.push(-b);
            let k = twin.len();
            twin.extend([Some(k + 1), Some(k)]);
        }
        for i in 0..n {
            if lower[i].is_finite() {
                rows.push(vec![(i, 1.0)]);
                rhs.push(lower[i]);
                twin.push(None);
            }
            if upper[i].is_finite() {
                rows.push(vec![(i, -1.0)]);
                rhs.push(-upper[i]);
                twin.push(None);
            }
        }
        let norms = rows
            .iter()
            .map(|r: &Vec<(usize, f64)>| r.iter().map(|(_, a)| a * a).sum::<f64>().sqrt())
            .collect();
        Self {
            n,
            h_true: h,
            h: h.iter().map(|&v| v.max(CURVATURE)).collect(),
            c,
            rows,
            rhs,
            norms,
            twin,
        }
    }

    fn slack(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(k, a)| a * x[k]).sum::<f64>() - self.rhs[i]
    }

    fn solve(&self, max_iter: usize) -> GiResult {
        let n = self.n;
        let m = self.rhs.len();
        // Column-major J: column k occupies jm[k * n..(k + 1) * n].
        let mut jm = vec![0.0; n * n];
        for i in 0..n {
            jm[i * n + i] = 1.0 / self.h[i].sqrt();
        }
        let mut x: Vec<f64>;
        // R by columns; column k holds rows 0..=k.
        let mut rcols: Vec<Vec<f64>> = Vec::new();
        let mut active: Vec<usize> = Vec::new();
        let mut u: Vec<f64> = Vec::new();
        let mut in_active = vec![false; m];
        let mut skipped = vec![false; m];
        let mut iterations = 0;
        let mut d = vec![0.0; n];
        let mut z = vec![0.0; n];

        loop {
            x = self.active_point(&jm, &rcols, &active).0;
            let mut pick = None;
            let mut worst = 0.0;
            for i in 0..m {
                if in_active[i] || skipped[i] || self.twin[i].is_some_and(|k| in_active[k]) {
                    continue;
                }
                let s = self.slack(i, &x);
                if s < -FEAS_TOL * (1.0 + self.rhs[i].abs()) {
                    let v = s / self.norms[i];
                    if v < worst {
                        worst = v;
                        pick = Some(i);
                    }
                }
            }
            let Some(p) = pick else {
                return GiResult::Optimal(self.finish(&jm, &rcols, &active, iterations));
            };
            let mut u_p = 0.0;

            loop {
                iterations += 1;
                if iterations > max_iter {
                    return GiResult::Stalled;
                }
                let q = active.len();
                for (k, dk) in d.iter_mut().enumerate() {
                    let col = &jm[k * n..(k + 1) * n];
                    *dk = self.rows[p].iter().map(|&(i, a)| col[i] * a).sum();
                }
                z.iter_mut().for_each(|v| *v = 0.0);
                for k in q..n {
                    if d[k] != 0.0 {
                        let col = &jm[k * n..(k + 1) * n];
                        for i in 0..n {
                            z[i] += col[i] * d[k];
                        }
                    }
                }
                let r = upper_solve(&rcols, &d[..q]);

                let r_max = r.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                let mut t1 = f64::INFINITY;
                let mut drop_at = None;
                for k in 0..q {
                    if r[k] > DEP_TOL * r_max {
                        let ratio = u[k] / r[k];
                        if ratio < t1 {
                            t1 = ratio;
                            drop_at = Some(k);
                        }
                    }
                }
                let d2: f64 = d[q..].iter().map(|v| v * v).sum();
                let d_all: f64 = d2 + d[..q].iter().map(|v| v * v).sum::<f64>();
                let s_p = self.slack(p, &x);
                let t2 = if d2 > DEP_TOL * DEP_TOL * d_all {
                    -s_p / d2
                } else {
                    f64::INFINITY
                };
                let t = t1.min(t2);
                if t == f64::INFINITY {
                    // A violation at round-off level from a dependent
                    // constraint is not evidence of infeasibility.
                    if s_p >= -ROUNDOFF_TOL * (1.0 + self.rhs[p].abs()) * self.norms[p].max(1.0) {
                        skipped[p] = true;
                        break;
                    }
                    return GiResult::Infeasible;
                }

                if t2.is_finite() {
                    for i in 0..n {
                        x[i] += t * z[i];
                    }
                }
                for k in 0..q {
                    u[k] -= t * r[k];
                }
                u_p += t;

                if t2 <= t1 {
                    // Rotate d so that only its first q + 1 entries survive.
                    for k in (q + 1..n).rev() {
                        if d[k] == 0.0 {
                            continue;
                        }
                        let (cs, sn, hyp) = givens(d[k - 1], d[k]);
                        d[k - 1] = hyp;
                        d[k] = 0.0;
                        rotate_columns(&mut jm, n, k - 1, k, cs, sn);
                    }
                    rcols.push(d[..=q].to_vec());
                    active.push(p);
                    u.push(u_p);
                    in_active[p] = true;
                    break;
                }

                let l = drop_at.expect("partial step without a blocking constraint");
                in_active[active[l]] = false;
                active.remove(l);
                u.remove(l);
                rcols.remove(l);
                for k in l..rcols.len() {
                    let (cs, sn, hyp) = givens(rcols[k][k], rcols[k][k + 1]);
                    rcols[k][k] = hyp;
                    rcols[k].truncate(k + 1);
                    for col in rcols.iter_mut().skip(k + 1) {
                        let (a, b) = (col[k], col[k + 1]);
                        col[k] = cs * a + sn * b;
                        col[k + 1] = -sn * a + cs * b;
                    }
                    rotate_columns(&mut jm, n, k, k + 1, cs, sn);
                }
            }
        }
    }

    /// Minimiser over the active constraints taken as equalities, and its
    /// multipliers, from `J' N_A = [R; 0]`:
    /// `x = J1 R^{-T} b_A - J2 J2' c` and `u = R^{-1} (R^{-T} b_A + J1' c)`.
    fn active_point(
        &self,
        jm: &[f64],
        rcols: &[Vec<f64>],
        active: &[usize],
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let q = active.len();
        let b: Vec<f64> = active.iter().map(|&i| self.rhs[i]).collect();
        let w = lower_solve_transposed(rcols, &b);
        let mut x = vec![0.0; n];
        for k in 0..q {
            let col = &jm[k * n..(k + 1) * n];
            for i in 0..n {
                x[i] += col[i] * w[k];
            }
        }
        let jtc: Vec<f64> = (0..n)
            .map(|k| {
                let col = &jm[k * n..(k + 1) * n];
                (0..n).map(|i| col[i] * self.c[i]).sum()
            })
            .collect();
        for k in q..n {
            let col = &jm[k * n..(k + 1) * n];
            for i in 0..n {
                x[i] -= col[i] * jtc[k];
            }
        }
        let rhs_u: Vec<f64> = (0..q).map(|k| w[k] + jtc[k]).collect();
        (x, upper_solve(rcols, &rhs_u))
    }

    fn finish(
        &self,
        jm: &[f64],
        rcols: &[Vec<f64>],
        active: &[usize],
        iterations: usize,
    ) -> GiSolution {
        let n = self.n;
        let (x, u) = self.active_point(jm, rcols, active);
        let primal = (0..self.rhs.len())
            .map(|i| (-self.slack(i, &x)).max(0.0))
            .fold(0.0, f64::max);
        let mut grad: Vec<f64> = (0..n).map(|i| self.h_true[i] * x[i] + self.c[i]).collect();
        let mut complementarity = 0.0_f64;
        for (k, &i) in active.iter().enumerate() {
            for &(j, a) in &self.rows[i] {
                grad[j] -= u[k] * a;
            }
            complementarity = complementarity.max((u[k] * self.slack(i, &x)).abs());
        }
        GiSolution {
            kkt: KktResiduals {
                stationarity: grad.iter().fold(0.0, |a, v| a.max(v.abs())),
                primal,
                complementarity,
            },
            x,
            iterations,
        }
    }
}

fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    let h = a.hypot(b);
    if h == 0.0 {
        (1.0, 0.0, 0.0)
    } else {
        (a / h, b / h, h)
    }
}

/// `(J_a, J_b) <- (c J_a + s J_b, -s J_a + c J_b)` on columns `a`, `b`.
fn rotate_columns(jm: &mut [f64], n: usize, a: usize, b: usize, cs: f64, sn: f64) {
    for i in 0..n {
        let (x, y) = (jm[a * n + i], jm[b * n + i]);
        jm[a * n + i] = cs * x + sn * y;
        jm[b * n + i] = -sn * x + cs * y;
    }
}

/// Solves `R r = d` for upper-triangular `R` stored by columns.
fn upper_solve(rcols: &[Vec<f64>], d: &[f64]) -> Vec<f64> {
    let q = d.len();
    let mut r = d.to_vec();
    for i in (0..q).rev() {
        let mut v = r[i];
        for k in i + 1..q {
            v -= rcols[k][i] * r[k];
        }
        r[i] = v / rcols[i][i];
    }
    r
}

/// Solves `R' w = b` for upper-triangular `R` stored by columns.
fn lower_solve_transposed(rcols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let q = b.len();
    let mut w = vec![0.0; q];
    for k in 0..q {
        let col = &rcols[k];
        let v: f64 = (0..k).map(|i| col[i] * w[i]).sum();
        w[k] = (b[k] - v) / col[k];
    }
    w
}
