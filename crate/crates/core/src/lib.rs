//! Distribution-free risk certificates for scenario programs whose
//! uncertainty enters additively on the right-hand side, `g(x) <= b(delta)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`certmath`]: the violation function `eps_{N,beta}(k)` and binomial tails.
//! * [`scenario`]: scenario sets, the columnwise reduction `xi*`, the
//!   complexity `varsigma_N` and empirical risk evaluation.
//! * [`sizing`]: one-shot and incremental data-set sizing.
//! * [`support`]: greedy irreducible support lists.
//! * [`miqp`]: a desk-scale mixed-binary QP model, branch-and-bound solver and
//!   LP-format export.
//! * [`ucp`]: the unit-commitment instance built on top of all of the above.

pub mod certmath;
pub mod error;
pub mod miqp;
pub mod scenario;
pub mod sizing;
pub mod support;
pub mod ucp;

pub use certmath::{apriori_eps, binom_tail_log, eps_n_beta, EpsParams, LogBinomialTable};
pub use error::{Error, Result};
pub use scenario::{
    a_posteriori_certificate, a_priori_certificate, dominance_check, empirical_risk, reduce,
    violates, CertificateKind, CertificateReport, Decision, DominanceSummary, ScenarioSet,
    TieBreak,
};
pub use sizing::{
    eps_based_size, incremental_schedule, one_shot_size, run_incremental, IncrementalOutcome,
    IncrementalSchedule, ReducedSolution, ReducedSolver, ScenarioSource, SizingSpec,
};
