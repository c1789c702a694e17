//! The violation function `eps_{N,beta}(k)` and binomial-tail helpers.
//!
//! Every sum is accumulated in the log domain. With `N` in the thousands and
//! `beta` around `1e-6` the individual terms routinely under- or overflow
//! `f64`, so nothing here ever materialises a binomial coefficient directly.

use crate::error::{Error, Result};

/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_TOL: f64 = 1e-10;

/// Parameters of `eps_{N,beta}(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsParams {
    n_scenarios: usize,
    beta: f64,
    k: usize,
}

impl EpsParams {
    pub fn new(n_scenarios: usize, beta: f64, k: usize) -> Result<Self> {
        if n_scenarios == 0 {
            return Err(Error::param("n_scenarios", "must be positive"));
        }
        check_open_unit("beta", beta)?;
        if k > n_scenarios {
            return Err(Error::param(
                "k",
                format!("{k} exceeds the number of scenarios {n_scenarios}"),
            ));
        }
        Ok(Self {
            n_scenarios,
            beta,
            k,
        })
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("{value} is not in (0, 1)")))
    }
}

/// Natural logs of binomial coefficients `C(n, k)` for `n <= max_n`.
///
/// Stores compensated partial sums of `ln i`; coefficients with a short side
/// (`min(k, n - k)` small) are instead summed term by term, which keeps the
/// relative error near one ulp where the factorial difference would cancel.
#[derive(Debug, Clone)]
pub struct LogBinomialTable {
    ln_fact: Vec<f64>,
}

const SHORT_SIDE: usize = 24;

impl LogBinomialTable {
    pub fn new(max_n: usize) -> Self {
        let mut ln_fact = Vec::with_capacity(max_n + 1);
        ln_fact.push(0.0);
        // Neumaier summation.
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        for i in 1..=max_n {
            let x = (i as f64).ln();
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            ln_fact.push(sum + comp);
        }
        Self { ln_fact }
    }

    pub fn max_n(&self) -> usize {
        self.ln_fact.len() - 1
    }

    /// `ln C(n, k)`. Panics when `n > max_n` or `k > n`.
    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        assert!(k <= n, "ln_choose: k = {k} > n = {n}");
        assert!(n <= self.max_n(), "ln_choose: n = {n} beyond table");
        let short = k.min(n - k);
        if short == 0 {
            return 0.0;
        }
        if short <= SHORT_SIDE {
            return ln_choose_direct(n, short);
        }
        self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k]
    }
}

/// `ln C(n, k)` as `sum_{i=1..k} ln((n - k + i) / i)`.
fn ln_choose_direct(n: usize, k: usize) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// `ln(sum_i exp(x_i))`, `-inf` for an empty iterator.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Sign function of the defining polynomial for `t(k)`, in the log domain.
///
/// Positive strictly left of the unique root in `(0, 1)`, negative right of
/// it.
struct RootEquation {
    ln_beta_over_n: f64,
    /// `ln C(m, k)` for `m = k..N-1`.
    sum_coeffs: Vec<f64>,
    ln_lead: f64,
    lead_power: f64,
    scratch: Vec<f64>,
}

impl RootEquation {
    fn new(p: &EpsParams) -> Self {
        let (n, k) = (p.n_scenarios, p.k);
        let table = LogBinomialTable::new(n);
        let sum_coeffs: Vec<f64> = (k..n).map(|m| table.ln_choose(m, k)).collect();

        // Hockey stick: sum_{m=k}^{N-1} C(m, k) = C(N, k + 1).
        debug_assert!({
            let lhs = log_sum_exp(&sum_coeffs);
            let rhs = table.ln_choose(n, k + 1);
            (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0)
        });

        Self {
            ln_beta_over_n: p.beta.ln() - (n as f64).ln(),
            scratch: Vec::with_capacity(sum_coeffs.len()),
            sum_coeffs,
            ln_lead: table.ln_choose(n, k),
            lead_power: (n - k) as f64,
        }
    }

    /// Log-domain residual `ln(lhs) - ln(rhs)` at `t` in `(0, 1]`.
    fn log_residual(&mut self, t: f64) -> f64 {
        let ln_t = t.ln();
        self.scratch.clear();
        self.scratch.extend(
            self.sum_coeffs
                .iter()
                .enumerate()
                .map(|(power, c)| c + power as f64 * ln_t),
        );
        let lhs = self.ln_beta_over_n + log_sum_exp(&self.scratch);
        let rhs = self.ln_lead + self.lead_power * ln_t;
        lhs - rhs
    }
}

/// Bracket `[lo, hi]` of width at most [`BISECTION_TOL`] around `t(k)`.
fn bracket_root(p: &EpsParams) -> (f64, f64) {
    let mut eq = RootEquation::new(p);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if eq.log_residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// The violation function `eps_{N,beta}(k)`.
///
/// Returns `1` for `k = N`. Otherwise returns `1 - t` where `t` is the lower
/// end of a bisection bracket of width `1e-10` around the root, so the value
/// errs on the conservative side by at most that width.
pub fn eps_n_beta(p: EpsParams) -> f64 {
    if p.k == p.n_scenarios {
        return 1.0;
    }
    let (lo, _) = bracket_root(&p);
    (1.0 - lo).clamp(0.0, 1.0)
}

/// Log-domain residual of the root equation at `t`; exposed for residual
/// checks in tests and diagnostics.
pub fn eps_root_log_residual(p: EpsParams, t: f64) -> f64 {
    RootEquation::new(&p).log_residual(t)
}

/// `ln sum_{m=0}^{j-1} C(n, m) eps^m (1 - eps)^(n - m)`, the log of the
/// binomial CDF at `j - 1`.
pub fn binom_tail_log(n: usize, j: usize, eps: f64) -> Result<f64> {
    if j == 0 || j > n {
        return Err(Error::param("j", format!("{j} is not in [1, {n}]")));
    }
    check_open_unit("eps", eps)?;
    let ln_keep = (-eps).ln_1p();
    if j == 1 {
        return Ok(n as f64 * ln_keep);
    }
    let ln_eps = eps.ln();
    let mut terms = Vec::with_capacity(j);
    let mut ln_c = 0.0;
    for m in 0..j {
        if m > 0 {
            ln_c += ((n - m + 1) as f64 / m as f64).ln();
        }
        terms.push(ln_c + m as f64 * ln_eps + (n - m) as f64 * ln_keep);
    }
    Ok(log_sum_exp(&terms))
}

/// Smallest `eps` with `binom_tail_log(n, q, eps) <= ln(beta)`, to within
/// [`BISECTION_TOL`] and rounded up.
pub fn apriori_eps(n: usize, q: usize, beta: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::param("q", "must be positive"));
    }
    if n < q {
        return Err(Error::param("n", format!("{n} is smaller than q = {q}")));
    }
    check_open_unit("beta", beta)?;
    let ln_beta = beta.ln();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if binom_tail_log(n, q, mid)? <= ln_beta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.min(1.0 - f64::EPSILON))
}
