//! Data-set sizing: one-shot sizes, the incremental thresholds and the
//! incremental driver that stops collecting data as soon as the observed
//! complexity allows it.

use crate::certmath::{
    binom_tail_log, check_open_unit, eps_n_beta, log_sum_exp, EpsParams, LogBinomialTable,
};
use crate::error::{Error, Result};
use crate::scenario::{reduce, Decision, DominanceSummary, ScenarioSet};

/// Target risk `eps_bar` with confidence `1 - beta` for `q` constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizingSpec {
    q: usize,
    eps_bar: f64,
    beta: f64,
}

impl SizingSpec {
    pub fn new(q: usize, eps_bar: f64, beta: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("q", "must be positive"));
        }
        check_open_unit("eps_bar", eps_bar)?;
        check_open_unit("beta", beta)?;
        Ok(Self { q, eps_bar, beta })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn eps_bar(&self) -> f64 {
        self.eps_bar
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Smallest `m >= start` for which `pred` holds; `pred` must be monotone
/// (false, ..., false, true, ...).
fn smallest_satisfying(start: usize, mut pred: impl FnMut(usize) -> bool) -> usize {
    if pred(start) {
        return start;
    }
    let mut lo = start; // fails
    let mut step = start.max(1);
    let mut hi = start + step;
    while !pred(hi) {
        lo = hi;
        step *= 2;
        hi = hi.checked_add(step).expect("size search overflowed usize");
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn one_shot_size_raw(q: usize, eps_bar: f64, beta: f64) -> usize {
    let ln_beta = beta.ln();
    smallest_satisfying(q, |m| {
        binom_tail_log(m, q, eps_bar).expect("validated by SizingSpec") <= ln_beta
    })
}

/// Smallest `M >= q` whose binomial tail with `q` terms at `eps_bar` is at
/// most `beta`.
pub fn one_shot_size(spec: &SizingSpec) -> usize {
    one_shot_size_raw(spec.q, spec.eps_bar, spec.beta)
}

/// Smallest `M >= q` with `eps_{M,beta}(q) <= eps_bar`. Never smaller than
/// [`one_shot_size`].
pub fn eps_based_size(spec: &SizingSpec) -> usize {
    smallest_satisfying(spec.q, |m| {
        let p = EpsParams::new(m, spec.beta, spec.q).expect("validated by SizingSpec");
        eps_n_beta(p) <= spec.eps_bar
    })
}

/// Thresholds of the incremental procedure, one entry per `j = 0..=q`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementalSchedule {
    pub m_bar: Vec<usize>,
    pub beta_j: Vec<f64>,
    pub n_j: Vec<usize>,
}

impl IncrementalSchedule {
    pub fn q(&self) -> usize {
        self.n_j.len() - 1
    }

    /// Largest number of scenarios the procedure can ever request.
    pub fn max_rows(&self) -> usize {
        self.n_j.iter().copied().max().unwrap_or(0)
    }
}

pub fn incremental_schedule(spec: &SizingSpec) -> IncrementalSchedule {
    let q = spec.q;
    let mut m_bar = Vec::with_capacity(q + 1);
    for j in 1..=q {
        m_bar.push(one_shot_size_raw(j, spec.eps_bar, spec.beta));
    }
    m_bar.insert(0, m_bar[0]);

    let ln_keep = (-spec.eps_bar).ln_1p();
    let mut table = LogBinomialTable::new(4 * m_bar[q] + 16);
    let mut beta_j = Vec::with_capacity(q + 1);
    let mut n_j = Vec::with_capacity(q + 1);
    for (j, &mb) in m_bar.iter().enumerate() {
        let bj = spec.beta / ((q + 1) as f64 * (mb + 1) as f64);
        let terms: Vec<f64> = (j..=mb)
            .map(|m| table.ln_choose(m, j) + (m - j) as f64 * ln_keep)
            .collect();
        let lhs = bj.ln() + log_sum_exp(&terms);

        let mut n = mb + 1;
        loop {
            if n > table.max_n() {
                table = LogBinomialTable::new(2 * table.max_n());
            }
            let rhs = table.ln_choose(n, j) + (n - j) as f64 * ln_keep;
            if lhs >= rhs {
                break;
            }
            n += 1;
        }
        beta_j.push(bj);
        n_j.push(n);
    }
    IncrementalSchedule { m_bar, beta_j, n_j }
}

/// Supplier of fresh scenario rows (`b(delta)` vectors), pulled one at a
/// time. Rows must be independent of everything issued before.
pub trait ScenarioSource {
    /// `None` once the source is exhausted.
    fn pull(&mut self) -> Option<Vec<f64>>;
}

/// Replays the rows of a scenario set in order.
#[derive(Debug, Clone)]
pub struct SetSource<'a> {
    set: &'a ScenarioSet,
    cursor: usize,
}

impl<'a> SetSource<'a> {
    pub fn new(set: &'a ScenarioSet) -> Self {
        Self { set, cursor: 0 }
    }

    pub fn issued(&self) -> usize {
        self.cursor
    }
}

impl ScenarioSource for SetSource<'_> {
    fn pull(&mut self) -> Option<Vec<f64>> {
        if self.cursor >= self.set.n() {
            return None;
        }
        self.cursor += 1;
        Some(self.set.row(self.cursor - 1).to_vec())
    }
}

/// Adapts a closure into an unbounded source.
pub struct FnSource<F>(pub F);

impl<F: FnMut() -> Vec<f64>> ScenarioSource for FnSource<F> {
    fn pull(&mut self) -> Option<Vec<f64>> {
        Some((self.0)())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub decision: Decision,
    pub objective: f64,
}

/// Solves the problem with only the `q` reduced constraints `g(x) <= xi`.
pub trait ReducedSolver {
    fn solve(&mut self, xi: &[f64]) -> Result<ReducedSolution>;
}

/// Solver for the reduction itself: returns `g = xi` with objective
/// `-sum(xi)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct XiSolver;

impl ReducedSolver for XiSolver {
    fn solve(&mut self, xi: &[f64]) -> Result<ReducedSolution> {
        Ok(ReducedSolution {
            decision: Decision::new(xi.to_vec())?,
            objective: -xi.iter().sum::<f64>(),
        })
    }
}

impl<S: ReducedSolver + ?Sized> ReducedSolver for &mut S {
    fn solve(&mut self, xi: &[f64]) -> Result<ReducedSolution> {
        (**self).solve(xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationRecord {
    pub j: usize,
    pub n_j: usize,
    pub sigma: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementalOutcome {
    pub decision: Decision,
    pub objective: f64,
    pub n_used: usize,
    pub j_stop: usize,
    pub summary: DominanceSummary,
    pub trace: Vec<IterationRecord>,
    /// All rows collected, in order.
    pub data: ScenarioSet,
}

/// Runs the incremental procedure with a freshly computed schedule.
pub fn run_incremental(
    spec: &SizingSpec,
    source: &mut dyn ScenarioSource,
    solver: &mut dyn ReducedSolver,
) -> Result<IncrementalOutcome> {
    run_incremental_with_schedule(&incremental_schedule(spec), source, solver)
}

/// Collects `N_j` rows, stops at the first `j` with `varsigma_{N_j} <= j`,
/// and solves the reduced problem once at that point.
pub fn run_incremental_with_schedule(
    schedule: &IncrementalSchedule,
    source: &mut dyn ScenarioSource,
    solver: &mut dyn ReducedSolver,
) -> Result<IncrementalOutcome> {
    let q = schedule.q();
    let mut values: Vec<f64> = Vec::new();
    let mut collected = 0;
    let mut trace = Vec::new();
    for j in 0..=q {
        let target = schedule.n_j[j];
        while collected < target {
            let row = source.pull().ok_or(Error::DataInsufficient {
                needed: target,
                available: collected,
            })?;
            if row.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: row.len(),
                });
            }
            values.extend_from_slice(&row);
            collected += 1;
        }
        let data = ScenarioSet::from_flat(q, values.clone())?;
        let summary = reduce(&data);
        trace.push(IterationRecord {
            j,
            n_j: collected,
            sigma: summary.distinct_count,
        });
        if summary.distinct_count <= j {
            let sol = solver.solve(&summary.xi_star)?;
            if sol.decision.q() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: sol.decision.q(),
                });
            }
            if let Some(l) = sol
                .decision
                .g_values()
                .iter()
                .zip(&summary.xi_star)
                .position(|(g, xi)| g > xi)
            {
                return Err(Error::Contract(format!(
                    "reduced solver returned an infeasible decision at constraint {l}"
                )));
            }
            return Ok(IncrementalOutcome {
                decision: sol.decision,
                objective: sol.objective,
                n_used: collected,
                j_stop: j,
                summary,
                trace,
                data,
            });
        }
    }
    unreachable!("complexity never exceeds q")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(q: usize, eps: f64, beta: f64) -> SizingSpec {
        SizingSpec::new(q, eps, beta).unwrap()
    }

    #[test]
    fn one_shot_known_values() {
        assert_eq!(one_shot_size(&spec(24, 0.1, 1e-6)), 533);
        assert_eq!(one_shot_size(&spec(1, 0.1, 1e-6)), 132);
        assert_eq!(one_shot_size(&spec(1, 0.5, 0.5)), 1);
    }

    #[test]
    fn one_shot_single_constraint_closed_form() {
        for eps in [0.01, 0.05, 0.1, 0.2, 0.37, 0.5, 0.9] {
            for beta in [1e-9, 1e-6, 1e-3, 0.05, 0.5] {
                let expected = (f64::ln(beta) / f64::ln(1.0 - eps)).ceil().max(1.0) as usize;
                assert_eq!(
                    one_shot_size(&spec(1, eps, beta)),
                    expected,
                    "eps={eps} beta={beta}"
                );
            }
        }
    }

    #[test]
    fn eps_based_matches_linear_scan() {
        let s = spec(1, 0.99, 0.5);
        let scan = (1..=200)
            .find(|&m| eps_n_beta(EpsParams::new(m, 0.5, 1).unwrap()) <= 0.99)
            .unwrap();
        assert_eq!(eps_based_size(&s), scan);
    }

    #[test]
    fn eps_based_never_smaller() {
        for q in [1, 3, 10] {
            for eps in [0.05, 0.2, 0.5] {
                let s = spec(q, eps, 1e-4);
                assert!(eps_based_size(&s) >= one_shot_size(&s));
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(SizingSpec::new(0, 0.1, 0.1).is_err());
        assert!(SizingSpec::new(1, 0.0, 0.1).is_err());
        assert!(SizingSpec::new(1, 0.1, 1.0).is_err());
    }

    #[test]
    fn schedule_invariants() {
        let sch = incremental_schedule(&spec(24, 0.1, 1e-6));
        assert_eq!(sch.m_bar.len(), 25);
        assert_eq!(sch.m_bar[0], sch.m_bar[1]);
        assert_eq!(sch.m_bar[24], 533);
        for j in 0..=24 {
            assert!(sch.n_j[j] > sch.m_bar[j]);
            if j > 0 {
                assert!(sch.n_j[j] >= sch.n_j[j - 1]);
            }
            let expected = 1e-6 / (25.0 * (sch.m_bar[j] + 1) as f64);
            assert!((sch.beta_j[j] - expected).abs() <= 1e-18);
        }
    }

    #[test]
    fn schedule_single_constraint() {
        let sch = incremental_schedule(&spec(1, 0.1, 1e-6));
        assert_eq!(sch.m_bar, vec![132, 132]);
        assert_eq!(sch.q(), 1);
    }

    struct Recorder(Vec<Vec<f64>>);

    impl ReducedSolver for Recorder {
        fn solve(&mut self, xi: &[f64]) -> Result<ReducedSolution> {
            self.0.push(xi.to_vec());
            XiSolver.solve(xi)
        }
    }

    #[test]
    fn single_constraint_stops_at_first_stage() {
        let sch = incremental_schedule(&spec(1, 0.1, 1e-6));
        let mut k = 0.0_f64;
        let mut src = FnSource(|| {
            k += 1.0;
            vec![(k * 0.7).sin()]
        });
        let mut solver = Recorder(Vec::new());
        let out = run_incremental_with_schedule(&sch, &mut src, &mut solver).unwrap();
        assert_eq!(out.j_stop, 1);
        assert_eq!(out.n_used, sch.n_j[1]);
        assert_eq!(out.trace.len(), 2);
        assert_eq!(out.trace[0].sigma, 1);
        assert_eq!(solver.0.len(), 1);
    }

    #[test]
    fn exhausted_source_reports_need() {
        let set = ScenarioSet::from_flat(1, vec![1.0; 10]).unwrap();
        let mut src = SetSource::new(&set);
        let err = run_incremental(&spec(1, 0.1, 1e-6), &mut src, &mut XiSolver).unwrap_err();
        match err {
            Error::DataInsufficient { needed, available } => {
                assert_eq!(available, 10);
                assert!(needed > 10);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_solver_is_rejected() {
        struct Greedy;
        impl ReducedSolver for Greedy {
            fn solve(&mut self, xi: &[f64]) -> Result<ReducedSolution> {
                let g = xi.iter().map(|v| v + 1.0).collect();
                Ok(ReducedSolution {
                    decision: Decision::new(g)?,
                    objective: 0.0,
                })
            }
        }
        let mut src = FnSource(|| vec![0.0]);
        let err = run_incremental(&spec(1, 0.5, 0.5), &mut src, &mut Greedy).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
