//! Unit commitment as an additively-uncertain scenario program.
//!
//! Sign convention: the demand constraint `sum_j P[j][t] >= demand[t]` is
//! written as `g_t(x) <= b_t` with `g_t = -sum_j P[j][t]` and
//! `b_t = -demand[t]`. Every certificate downstream works on these negated
//! values, so the dominant scenario of slot `t` is the day with the highest
//! demand in that slot, and `xi*_t = -max_i demand[i][t]`.

mod build;
mod demand;
mod solve;
mod unit;

pub use build::{
    build_miqp, check_feasible, uc_objective, UcSolution, VarLayout, Violation, FEAS_TOL,
};
pub use demand::{
    daily_shape, synth_demand, to_additive, ColumnStats, DemandData, SynthParams, SynthStream,
};
pub use solve::{UcSolve, UcSolver, UcSupportOracle, DEFAULT_BACKOFF};
pub use unit::{GenUnit, UcInstance};
