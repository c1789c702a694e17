mod common;

use proptest::prelude::*;
use rand::Rng;
use scert_core::scenario::a_posteriori_from_summary;
use scert_core::{
    a_posteriori_certificate, a_priori_certificate, dominance_check, empirical_risk, eps_n_beta,
    reduce, violates, Decision, EpsParams, ScenarioSet,
};

/// Small integer entries so ties are common.
fn tied_set() -> impl Strategy<Value = ScenarioSet> {
    (1usize..25, 1usize..7).prop_flat_map(|(n, q)| {
        prop::collection::vec(0i32..6, n * q).prop_map(move |v| {
            ScenarioSet::from_flat(q, v.into_iter().map(f64::from).collect()).unwrap()
        })
    })
}

fn distinct_set() -> impl Strategy<Value = ScenarioSet> {
    (1usize..25, 1usize..7, any::<u64>())
        .prop_map(|(n, q, seed)| common::distinct_set(&mut common::rng(seed), n, q))
}

fn permute(s: &ScenarioSet, perm: &[usize]) -> ScenarioSet {
    s.subset(perm).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_is_the_column_minimum_with_smallest_index(s in tied_set()) {
        let r = reduce(&s);
        for l in 0..s.q() {
            let col: Vec<f64> = s.rows().map(|row| row[l]).collect();
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(r.xi_star[l], min);
            prop_assert_eq!(r.indices[l], col.iter().position(|&v| v == min).unwrap());
            prop_assert_eq!(s.get(r.indices[l], l), r.xi_star[l]);
        }
        prop_assert!(r.distinct_count >= 1 && r.distinct_count <= s.q().min(s.n()));
        prop_assert_eq!(r.distinct_count, r.distinct_indices().len());
    }

    #[test]
    fn permutation_keeps_xi_star(s in tied_set(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..s.n()).collect();
        let mut rng = common::rng(seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(reduce(&permute(&s, &perm)).xi_star, reduce(&s).xi_star);
    }

    #[test]
    fn permutation_keeps_complexity_with_unique_minima(s in distinct_set(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..s.n()).collect();
        let mut rng = common::rng(seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let (a, b) = (reduce(&s), reduce(&permute(&s, &perm)));
        prop_assert_eq!(a.distinct_count, b.distinct_count);
        for l in 0..s.q() {
            prop_assert_eq!(perm[b.indices[l]], a.indices[l]);
        }
    }

    #[test]
    fn removing_a_non_dominant_row_keeps_xi_star(s in tied_set()) {
        let r = reduce(&s);
        for i in 0..s.n() {
            if r.indices.contains(&i) {
                continue;
            }
            let rest: Vec<usize> = (0..s.n()).filter(|&k| k != i).collect();
            prop_assert_eq!(reduce(&s.subset(&rest).unwrap()).xi_star, r.xi_star.clone());
        }
    }

    #[test]
    fn feasible_decisions_are_dominated(train in tied_set(), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let r = reduce(&train);
        let q = train.q();
        // A feasible decision: g <= xi* with some slots strictly inside.
        let g: Vec<f64> = r.xi_star.iter().map(|x| x - rng.random_range(0..3) as f64 * 0.5).collect();
        let d = Decision::new(g).unwrap();
        let probe: Vec<f64> = (0..40 * q).map(|_| rng.random_range(-3..8) as f64 * 0.5).collect();
        let probe = ScenarioSet::from_flat(q, probe).unwrap();
        prop_assert!(dominance_check(&d, &r, &probe).unwrap());
        for row in probe.rows() {
            if violates(&d, row).unwrap() {
                prop_assert!(violates(&Decision::from_summary(&r), row).unwrap());
            }
        }
        prop_assert!(
            empirical_risk(&d, &probe).unwrap() <= empirical_risk(&Decision::from_summary(&r), &probe).unwrap()
        );
        for row in train.rows() {
            prop_assert!(!violates(&Decision::from_summary(&r), row).unwrap());
        }
    }

    #[test]
    fn a_priori_not_above_a_posteriori_at_q(n in 1usize..300, q in 1usize..20, beta_exp in 1i32..8) {
        prop_assume!(n >= q);
        let beta = 10f64.powi(-beta_exp);
        let prior = a_priori_certificate(n, q, beta).unwrap().epsilon;
        let post = eps_n_beta(EpsParams::new(n, beta, q).unwrap());
        prop_assert!(prior <= post + 1e-9, "{} > {}", prior, post);
    }
}

#[test]
fn certificate_of_the_three_by_two_example() {
    let s = ScenarioSet::from_rows(&[[1.0, 5.0], [2.0, 0.0], [3.0, 3.0]]).unwrap();
    let c = a_posteriori_certificate(&s, 0.05).unwrap();
    assert_eq!(c.complexity_used, Some(2));
    assert_eq!(c.epsilon, eps_n_beta(EpsParams::new(3, 0.05, 2).unwrap()));
}

#[test]
fn single_scenario_certificate_is_one() {
    let s = ScenarioSet::from_rows(&[[4.2]]).unwrap();
    assert_eq!(a_posteriori_certificate(&s, 0.3).unwrap().epsilon, 1.0);
}

#[test]
fn shared_dominant_scenario_tightens_the_certificate() {
    let mut r = common::rng(3);
    let (n, q, beta) = (1000, 24, 1e-6);
    let mut values: Vec<f64> = (0..n * q).map(|_| r.random_range(0.0..1.0)).collect();
    // Scenario 17 takes the minimum of the first three columns.
    for l in 0..3 {
        values[17 * q + l] = -1.0;
    }
    let s = ScenarioSet::from_flat(q, values).unwrap();
    let summary = reduce(&s);
    assert!(summary.distinct_count < q);
    let eps = a_posteriori_from_summary(n, &summary, beta)
        .unwrap()
        .epsilon;
    assert!(eps < eps_n_beta(EpsParams::new(n, beta, q).unwrap()));
}

#[test]
fn risk_examples() {
    let s = ScenarioSet::from_rows(&[[1.0, 2.0], [0.5, 3.0], [2.0, -1.0]]).unwrap();
    let xi = Decision::from_summary(&reduce(&s));
    assert_eq!(empirical_risk(&xi, &s).unwrap(), 0.0);
    let above: Vec<f64> = s.column_max().iter().map(|v| v + 1.0).collect();
    assert_eq!(
        empirical_risk(&Decision::new(above).unwrap(), &s).unwrap(),
        1.0
    );
}
