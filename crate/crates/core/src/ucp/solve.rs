use std::collections::HashMap;

use super::build::{build_miqp, UcSolution};
use super::demand::DemandData;
use super::unit::UcInstance;
use crate::error::{Error, Result};
use crate::miqp::{solve_bb_with, BbOptions, MiqpModel, SolveOutcome, SolveStatus};
use crate::scenario::Decision;
use crate::sizing::{ReducedSolution, ReducedSolver};
use crate::support::{SolutionRecord, SolveOracle};

/// Demand tightening (GW) applied before solving, so that a solution's total
/// generation exceeds every training demand by more than solver round-off.
pub const DEFAULT_BACKOFF: f64 = 1e-6;

/// Result of one unit-commitment solve.
#[derive(Debug, Clone, PartialEq)]
pub struct UcSolve {
    pub solution: UcSolution,
    pub outcome: SolveOutcome,
}

/// Solves unit-commitment instances by branch-and-bound and caches results
/// by reduced right-hand side.
#[derive(Debug, Clone)]
pub struct UcSolver {
    inst: UcInstance,
    opts: BbOptions,
    backoff: f64,
    cache: HashMap<Vec<u64>, UcSolve>,
    last: Option<UcSolve>,
}

impl UcSolver {
    pub fn new(inst: UcInstance) -> Self {
        Self {
            inst,
            opts: BbOptions::default(),
            backoff: DEFAULT_BACKOFF,
            cache: HashMap::new(),
            last: None,
        }
    }

    pub fn with_options(mut self, opts: BbOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn with_backoff(mut self, backoff: f64) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn instance(&self) -> &UcInstance {
        &self.inst
    }

    /// Most recent solve.
    pub fn last(&self) -> Option<&UcSolve> {
        self.last.as_ref()
    }

    /// Number of distinct right-hand sides solved so far.
    pub fn solves(&self) -> usize {
        self.cache.len()
    }

    /// The model handed to the solver for `xi`, backoff included.
    pub fn model(&self, xi: &[f64]) -> Result<MiqpModel> {
        let shifted: Vec<f64> = xi.iter().map(|v| v - self.backoff).collect();
        build_miqp(&self.inst, &shifted)
    }

    pub fn solve_xi(&mut self, xi: &[f64]) -> Result<UcSolve> {
        let key: Vec<u64> = xi.iter().map(|v| v.to_bits()).collect();
        if let Some(hit) = self.cache.get(&key) {
            self.last = Some(hit.clone());
            return Ok(hit.clone());
        }
        let model = self.model(xi)?;
        let outcome = solve_bb_with(&model, &self.opts)?;
        let x = match (outcome.status, &outcome.assignment) {
            (SolveStatus::Optimal, Some(x)) => x,
            (SolveStatus::Infeasible, _) => return Err(Error::Infeasible),
            _ => {
                return Err(Error::Solver(format!(
                    "node limit of {} reached before optimality was proven",
                    self.opts.node_limit
                )))
            }
        };
        let solution = UcSolution::from_assignment(&self.inst, x)?;
        let res = UcSolve { solution, outcome };
        self.cache.insert(key, res.clone());
        self.last = Some(res.clone());
        Ok(res)
    }
}

impl ReducedSolver for UcSolver {
    /// Decision `g_t = -sum_j P[j][t]`.
    fn solve(&mut self, xi: &[f64]) -> Result<ReducedSolution> {
        let res = self.solve_xi(xi)?;
        Ok(ReducedSolution {
            decision: Decision::new(res.solution.generation().iter().map(|g| -g).collect())?,
            objective: res.solution.objective,
        })
    }
}

/// Support-list oracle over a fixed demand data set: solves the program
/// restricted to the listed days.
pub struct UcSupportOracle<'a> {
    solver: &'a mut UcSolver,
    demand: &'a DemandData,
}

impl<'a> UcSupportOracle<'a> {
    pub fn new(solver: &'a mut UcSolver, demand: &'a DemandData) -> Self {
        Self { solver, demand }
    }
}

impl SolveOracle for UcSupportOracle<'_> {
    fn solve(&mut self, indices: &[usize]) -> Result<SolutionRecord> {
        let nt = self.demand.horizon();
        let mut xi = vec![f64::INFINITY; nt];
        for &i in indices {
            for (x, &d) in xi.iter_mut().zip(self.demand.row(i)) {
                *x = x.min(-d);
            }
        }
        let res = self.solver.solve_xi(&xi)?;
        let s = &res.solution;
        let mut binaries = Vec::new();
        for j in 0..s.power.len() {
            for z in &s.zone_on[j] {
                binaries.extend_from_slice(z);
            }
        }
        for j in 0..s.power.len() {
            binaries.extend_from_slice(&s.startup[j]);
        }
        for j in 0..s.power.len() {
            binaries.extend_from_slice(&s.shutdown[j]);
        }
        Ok(SolutionRecord {
            continuous: s.power.concat(),
            binaries,
            objective: s.objective,
        })
    }
}
