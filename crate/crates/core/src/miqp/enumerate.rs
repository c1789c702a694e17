use super::bb::{SolveOutcome, SolveStatus};
use super::model::MiqpModel;
use super::qp::{solve_qp, QpOptions, QpOutcome, QpProblem};
use crate::error::{Error, Result};

/// Largest binary count accepted by [`solve_enum`].
pub const ENUM_CAP: usize = 24;

/// Relative objective difference under which two fixings count as tied.
const TIE_REL: f64 = 1e-9;

/// Solves the continuous QP for every binary fixing, in lexicographic order
/// with the first binary most significant, and keeps the best. On exact ties
/// the earlier fixing wins and `tie` is set.
pub fn solve_enum(m: &MiqpModel) -> Result<SolveOutcome> {
    m.validate()?;
    if m.n_bin > ENUM_CAP {
        return Err(Error::EnumerationCap {
            n_bin: m.n_bin,
            cap: ENUM_CAP,
        });
    }
    let opts = QpOptions::default();
    let (mut lower, mut upper): (Vec<f64>, Vec<f64>) = m.bounds.iter().copied().unzip();
    let (base_lower, base_upper) = (lower.clone(), upper.clone());
    let nb = m.n_bin;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut tie = false;
    let total = 1usize << nb;
    for mask in 0..total {
        for k in 0..nb {
            let i = m.n_cont + k;
            let v = ((mask >> (nb - 1 - k)) & 1) as f64;
            // A fixing outside the model's own binary bounds is infeasible.
            if v < base_lower[i] || v > base_upper[i] {
                lower[i] = 1.0;
                upper[i] = 0.0;
            } else {
                lower[i] = v;
                upper[i] = v;
            }
        }
        let p = QpProblem {
            quad: &m.quad_diag,
            lin: &m.lin_cost,
            rows: &m.rows,
            lower: &lower,
            upper: &upper,
        };
        let QpOutcome::Optimal(sol) = solve_qp(&p, &opts)? else {
            continue;
        };
        let mut x = sol.x;
        for k in 0..nb {
            x[m.n_cont + k] = lower[m.n_cont + k];
        }
        let obj = m.objective(&x);
        match &best {
            None => best = Some((x, obj)),
            Some((_, b)) => {
                let scale = b.abs().max(1.0);
                if obj < b - TIE_REL * scale {
                    best = Some((x, obj));
                    tie = false;
                } else if (obj - b).abs() <= TIE_REL * scale {
                    tie = true;
                }
            }
        }
    }
    Ok(match best {
        Some((x, obj)) => SolveOutcome {
            status: SolveStatus::Optimal,
            assignment: Some(x),
            objective: obj,
            nodes_explored: total,
            best_bound: obj,
            tie,
        },
        None => SolveOutcome::infeasible(total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miqp::model::Relation;

    #[test]
    fn three_binaries_by_hand() {
        // costs (3, -2, -4), constraint b0 + b1 + b2 >= 1, b1 + b2 <= 1
        // feasible fixings: 001 -> -4, 010 -> -2, 100 -> 3, 101 -> -1, 110 -> 1
        let mut m = MiqpModel::new(0, 3);
        m.lin_cost = vec![3.0, -2.0, -4.0];
        m.add_row(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Ge, 1.0, "any");
        m.add_row(vec![(1, 1.0), (2, 1.0)], Relation::Le, 1.0, "pair");
        let out = solve_enum(&m).unwrap();
        assert_eq!(out.binaries(&m).unwrap(), vec![0, 0, 1]);
        assert_eq!(out.objective, -4.0);
        assert_eq!(out.nodes_explored, 8);
        assert!(!out.tie);
    }

    #[test]
    fn ties_keep_lexicographic_first() {
        let mut m = MiqpModel::new(0, 2);
        m.lin_cost = vec![-1.0, -1.0];
        m.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0, "one");
        let out = solve_enum(&m).unwrap();
        assert_eq!(out.binaries(&m).unwrap(), vec![0, 1]);
        assert!(out.tie);
    }

    #[test]
    fn zero_binaries_matches_qp() {
        let mut m = MiqpModel::new(2, 0);
        m.quad_diag = vec![1.0, 1.0];
        m.add_row(vec![(0, 1.0), (1, 2.0)], Relation::Ge, 1.0, "h");
        let out = solve_enum(&m).unwrap();
        let x = out.assignment.unwrap();
        assert!((x[0] - 0.2).abs() < 1e-8 && (x[1] - 0.4).abs() < 1e-8);
        assert_eq!(out.nodes_explored, 1);
    }

    #[test]
    fn cap_is_enforced() {
        let m = MiqpModel::new(0, ENUM_CAP + 1);
        let err = solve_enum(&m).unwrap_err();
        assert!(err.to_string().contains("24"), "{err}");
    }
}
