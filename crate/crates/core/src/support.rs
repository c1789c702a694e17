//! Greedy irreducible support lists.
//!
//! Scenarios are removed one at a time in index order; a removal is kept
//! whenever the re-solved problem returns the same solution as with all
//! scenarios in place. The surviving list is irreducible with respect to the
//! order used but not necessarily minimal, so its length is an upper bound
//! on the smallest support-list size.

use crate::error::Error;
use crate::scenario::ScenarioSet;

/// A full solution record as returned by a [`SolveOracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub continuous: Vec<f64>,
    pub binaries: Vec<u8>,
    pub objective: f64,
}

/// Solves the scenario program restricted to a list of scenario indices.
/// Identical index lists must yield identical records.
pub trait SolveOracle {
    fn solve(&mut self, indices: &[usize]) -> Result<SolutionRecord, Error>;
}

impl<F> SolveOracle for F
where
    F: FnMut(&[usize]) -> Result<SolutionRecord, Error>,
{
    fn solve(&mut self, indices: &[usize]) -> Result<SolutionRecord, Error> {
        self(indices)
    }
}

/// Tolerances for deciding that two solutions coincide. Binaries are always
/// compared exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualityTol {
    /// Max-norm on the continuous part.
    pub continuous: f64,
    /// Relative tolerance on the objective.
    pub objective_rel: f64,
}

impl Default for EqualityTol {
    fn default() -> Self {
        Self {
            continuous: 1e-6,
            objective_rel: 1e-6,
        }
    }
}

impl EqualityTol {
    pub fn with_continuous(continuous: f64) -> Self {
        Self {
            continuous,
            ..Self::default()
        }
    }

    pub fn same(&self, a: &SolutionRecord, b: &SolutionRecord) -> bool {
        if a.binaries != b.binaries || a.continuous.len() != b.continuous.len() {
            return false;
        }
        let cont_ok = a
            .continuous
            .iter()
            .zip(&b.continuous)
            .all(|(x, y)| (x - y).abs() <= self.continuous);
        let scale = a.objective.abs().max(b.objective.abs()).max(1.0);
        cont_ok && (a.objective - b.objective).abs() <= self.objective_rel * scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportResult {
    /// Surviving scenario indices, ascending.
    pub kept_indices: Vec<usize>,
    pub s_star: usize,
    /// Oracle invocations: the full solve plus one per removal attempt.
    pub solve_count: usize,
}

#[derive(Debug, thiserror::Error)]
#[error("greedy reduction aborted at scenario {at} after {solve_count} solves: {source}")]
pub struct GreedyAborted {
    pub at: usize,
    pub kept_so_far: Vec<usize>,
    pub solve_count: usize,
    #[source]
    pub source: Error,
}

pub fn greedy_support(
    n: usize,
    oracle: &mut dyn SolveOracle,
    tol: EqualityTol,
) -> Result<SupportResult, GreedyAborted> {
    let mut current: Vec<usize> = (0..n).collect();
    let reference = oracle.solve(&current).map_err(|source| GreedyAborted {
        at: 0,
        kept_so_far: current.clone(),
        solve_count: 1,
        source,
    })?;
    let mut solve_count = 1;
    let mut trial = Vec::with_capacity(n);
    for l in 0..n {
        trial.clear();
        trial.extend(current.iter().copied().filter(|&i| i != l));
        solve_count += 1;
        let sol = oracle.solve(&trial).map_err(|source| GreedyAborted {
            at: l,
            kept_so_far: current.clone(),
            solve_count,
            source,
        })?;
        if tol.same(&sol, &reference) {
            std::mem::swap(&mut current, &mut trial);
        }
    }
    Ok(SupportResult {
        s_star: current.len(),
        kept_indices: current,
        solve_count,
    })
}

/// `sigma - s_star`; non-negative whenever both come from the same problem
/// and data and the greedy list is no longer than the dominant-index list.
pub fn complexity_gap(s_star: usize, sigma: usize) -> i64 {
    sigma as i64 - s_star as i64
}

/// Oracle for the reduction problem itself: the solution on a sub-list is
/// its column-wise minimum, and `+inf` everywhere on the empty list.
pub fn reduction_oracle(
    set: &ScenarioSet,
) -> impl FnMut(&[usize]) -> Result<SolutionRecord, Error> + '_ {
    move |indices: &[usize]| {
        if indices.is_empty() {
            return Ok(SolutionRecord {
                continuous: vec![f64::INFINITY; set.q()],
                binaries: Vec::new(),
                objective: f64::NEG_INFINITY,
            });
        }
        let sub = set.subset(indices)?;
        let xi = crate::scenario::reduce(&sub).xi_star;
        Ok(SolutionRecord {
            objective: -xi.iter().sum::<f64>(),
            continuous: xi,
            binaries: Vec::new(),
        })
    }
}
