//! Convex mixed-binary QPs: model, branch-and-bound, enumeration oracle and
//! LP-format export.

mod bb;
mod enumerate;
mod lp;
mod model;
mod qp;

pub use bb::{solve_bb, solve_bb_with, BbOptions, SolveOutcome, SolveStatus};
pub use enumerate::{solve_enum, ENUM_CAP};
pub use lp::export_lp;
pub use model::{MiqpModel, Relation, Row};
pub use qp::{solve_qp, KktResiduals, QpOptions, QpOutcome, QpProblem, QpSolution};
