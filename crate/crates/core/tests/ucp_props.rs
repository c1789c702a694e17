mod common;

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use scert_core::miqp::SolveStatus;
use scert_core::ucp::{
    build_miqp, check_feasible, synth_demand, to_additive, SynthParams, UcInstance, UcSolution,
    UcSolver, FEAS_TOL,
};
use scert_core::{violates, Decision, Error};

/// A schedule with consistent switching, then a few random corruptions.
fn random_schedule(r: &mut ChaCha8Rng, inst: &UcInstance) -> UcSolution {
    let nt = inst.horizon;
    let mut sol = UcSolution {
        power: Vec::new(),
        zone_on: Vec::new(),
        startup: Vec::new(),
        shutdown: Vec::new(),
        objective: 0.0,
    };
    for unit in &inst.units {
        let on: Vec<u8> = (0..nt).map(|_| r.random_bool(0.7) as u8).collect();
        let mut zones = vec![vec![0u8; nt]; unit.zones.len()];
        let mut power = vec![0.0; nt];
        for t in 0..nt {
            if on[t] == 1 {
                let z = r.random_range(0..unit.zones.len());
                zones[z][t] = 1;
                let (lo, hi) = unit.zones[z];
                power[t] = if r.random_bool(0.2) {
                    hi
                } else {
                    r.random_range(lo..=hi)
                };
            }
        }
        let prev = |t: usize| on[(t + nt - 1) % nt];
        sol.startup.push(
            (0..nt)
                .map(|t| (on[t] == 1 && prev(t) == 0) as u8)
                .collect(),
        );
        sol.shutdown.push(
            (0..nt)
                .map(|t| (on[t] == 0 && prev(t) == 1) as u8)
                .collect(),
        );
        sol.zone_on.push(zones);
        sol.power.push(power);
    }
    for _ in 0..r.random_range(0..3) {
        let j = r.random_range(0..inst.n_units());
        let t = r.random_range(0..nt);
        match r.random_range(0..5) {
            0 => sol.startup[j][t] ^= 1,
            1 => sol.shutdown[j][t] ^= 1,
            2 => {
                let z = r.random_range(0..inst.units[j].zones.len());
                sol.zone_on[j][z][t] ^= 1;
            }
            3 => sol.power[j][t] += r.random_range(-2.0..2.0),
            _ => sol.power[j][t] = r.random_range(-0.5..inst.units[j].p_max() + 0.5),
        }
    }
    sol
}

/// `(family, unit, t)` from a row tag such as `minup_j2_t5_k1`.
fn tag_key(tag: &str, names: &[String], inst: &UcInstance) -> (String, Option<usize>, usize) {
    if let Some(name) = tag.strip_prefix("bound:") {
        let i = names.iter().position(|n| n == name).unwrap();
        return ("domain".into(), Some(i / inst.horizon), i % inst.horizon);
    }
    let family = tag.split('_').next().unwrap().to_string();
    let mut unit = None;
    let mut time = 0;
    for part in tag.split('_').skip(1) {
        if let Some(j) = part.strip_prefix('j').and_then(|j| j.parse::<usize>().ok()) {
            unit = Some(j - 1);
        } else if let Some(t) = part.strip_prefix('t').and_then(|t| t.parse().ok()) {
            time = t;
        }
    }
    (family, unit, time)
}

#[test]
fn rows_and_checker_agree_on_random_schedules() {
    let mut r = common::rng(21);
    let (mut feasible, mut infeasible) = (0, 0);
    for trial in 0..10_000 {
        let horizon = r.random_range(2..=4);
        let inst = common::random_instance(&mut r, 2, horizon, 2);
        let sol = random_schedule(&mut r, &inst);
        let cap = inst.capacity();
        let xi: Vec<f64> = (0..horizon)
            .map(|_| -r.random_range(0.0..0.8) * cap)
            .collect();
        let m = build_miqp(&inst, &xi).unwrap();
        let x = sol.to_assignment(&inst);
        let from_rows: BTreeSet<_> = m
            .violations(&x, FEAS_TOL)
            .iter()
            .map(|tag| tag_key(tag, &m.names, &inst))
            .collect();
        let from_check: BTreeSet<_> = check_feasible(&inst, &sol, &xi)
            .into_iter()
            .map(|v| (v.family.to_string(), v.unit, v.time))
            .collect();
        assert_eq!(from_rows, from_check, "trial {trial}: {inst:?}\n{sol:?}");
        if from_check.is_empty() {
            feasible += 1;
        } else {
            infeasible += 1;
        }
    }
    assert!(
        feasible > 200 && infeasible > 200,
        "{feasible} feasible, {infeasible} infeasible"
    );
}

#[test]
fn solver_schedules_pass_the_checker_and_respect_up_time() {
    let mut r = common::rng(22);
    for k in 0..15 {
        let horizon = r.random_range(3..=6);
        let inst = common::random_instance(&mut r, 2, horizon, 2);
        let days = synth_demand(k, 40, horizon, &common::scaled_params(&inst)).unwrap();
        let xi = scert_core::reduce(&to_additive(&days).unwrap()).xi_star;
        let mut solver = UcSolver::new(inst.clone());
        let res = solver.solve_xi(&xi).unwrap();
        assert_eq!(res.outcome.status, SolveStatus::Optimal);
        let sol = &res.solution;
        assert!(check_feasible(&inst, sol, &xi).is_empty());
        for (j, unit) in inst.units.iter().enumerate() {
            for t in 0..horizon {
                assert!(sol.status(j, t) <= 1);
                if sol.startup[j][t] == 1 {
                    for tau in 0..unit.t_up {
                        assert_eq!(sol.status(j, (t + tau) % horizon), 1);
                    }
                }
            }
        }
        // Every training day is met by the schedule.
        let g = Decision::new(sol.generation().iter().map(|v| -v).collect()).unwrap();
        for row in to_additive(&days).unwrap().rows() {
            assert!(!violates(&g, row).unwrap());
        }
        assert!(
            (sol.objective - res.outcome.objective).abs() <= 1e-6 * sol.objective.abs().max(1.0)
        );
    }
}

#[test]
fn demand_above_capacity_is_infeasible() {
    let inst = common::tiny_instance();
    let mut solver = UcSolver::new(inst.clone());
    let too_much = -(inst.capacity() + 1.0);
    assert!(matches!(
        solver.solve_xi(&[too_much, -1.0]),
        Err(Error::Infeasible)
    ));
}

#[test]
fn additive_form_preserves_violations() {
    let mut r = common::rng(23);
    let inst = common::random_instance(&mut r, 2, 4, 2);
    let days = synth_demand(5, 50, 4, &common::scaled_params(&inst)).unwrap();
    let set = to_additive(&days).unwrap();
    for _ in 0..200 {
        let sol = random_schedule(&mut r, &inst);
        let gen = sol.generation();
        let g = Decision::new(gen.iter().map(|v| -v).collect()).unwrap();
        for (demand, b) in days.rows().zip(set.rows()) {
            let short = gen.iter().zip(demand).any(|(p, d)| p < d);
            assert_eq!(short, violates(&g, b).unwrap());
        }
    }
}

#[test]
fn default_synthetic_means_are_in_range() {
    let d = synth_demand(42, 365, 24, &SynthParams::default()).unwrap();
    for s in d.column_stats() {
        assert!((20.0..=40.0).contains(&s.mean), "{s:?}");
        assert!(s.min >= 0.0 && s.min <= s.mean && s.mean <= s.max);
    }
}
