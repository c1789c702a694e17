#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scert_core::miqp::{MiqpModel, Relation};
use scert_core::ucp::{daily_shape, GenUnit, SynthParams, UcInstance};
use scert_core::ScenarioSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random unit with one or two zones and ramp limits loose enough that
/// running every unit flat out is always feasible.
pub fn random_unit(r: &mut ChaCha8Rng, horizon: usize, max_zones: usize) -> GenUnit {
    let zones = r.random_range(1..=max_zones);
    let mut lo = r.random_range(0.5..2.0);
    let mut zs = Vec::new();
    for _ in 0..zones {
        let hi = lo + r.random_range(1.0..6.0);
        zs.push((lo, hi));
        lo = hi + r.random_range(0.2..1.5);
    }
    let p_max = zs.last().unwrap().1;
    GenUnit {
        a: r.random_range(0.02..0.5),
        b: r.random_range(0.1..2.0),
        c: r.random_range(0.1..2.0),
        c_u: r.random_range(0.0..2.0),
        c_d: r.random_range(0.0..1.0),
        ramp_down: r.random_range(0.3..1.0) * p_max,
        ramp_up: r.random_range(0.3..1.0) * p_max,
        t_up: r.random_range(1..=horizon.min(3)),
        t_down: r.random_range(1..=horizon.min(3)),
        zones: zs,
    }
}

pub fn random_instance(
    r: &mut ChaCha8Rng,
    max_units: usize,
    horizon: usize,
    max_zones: usize,
) -> UcInstance {
    let n = r.random_range(1..=max_units);
    let units = (0..n).map(|_| random_unit(r, horizon, max_zones)).collect();
    UcInstance::new(units, horizon).unwrap()
}

/// Synthetic demand scaled to the instance so that peak demand stays below
/// total capacity.
pub fn scaled_params(inst: &UcInstance) -> SynthParams {
    let cap = inst.capacity();
    SynthParams {
        base: 0.45 * cap,
        daily_amp: 0.25 * cap,
        season_amp: 0.0,
        season_len: 1,
        noise_sd: 0.04 * cap,
        day_corr: 0.5,
    }
}

/// Random convex MIQP with `n_cont` continuous and `n_bin` binary
/// variables and a handful of mixed rows.
pub fn random_miqp(r: &mut ChaCha8Rng, n_cont: usize, n_bin: usize) -> MiqpModel {
    let mut m = MiqpModel::new(n_cont, n_bin);
    let n = n_cont + n_bin;
    for i in 0..n {
        if i < n_cont {
            m.quad_diag[i] = if r.random_bool(0.8) {
                r.random_range(0.1..2.0)
            } else {
                0.0
            };
            m.bounds[i] = (r.random_range(-3.0..0.0), r.random_range(0.5..4.0));
        }
        m.lin_cost[i] = r.random_range(-3.0..3.0);
    }
    if n == 0 {
        return m;
    }
    let rows = r.random_range(1..=n.max(2));
    for k in 0..rows {
        let mut coeffs = Vec::new();
        for i in 0..n {
            if r.random_bool(0.4) {
                coeffs.push((
                    i,
                    r.random_range(-2.0..2.0_f64).round() + r.random_range(0.0..1.0_f64),
                ));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((r.random_range(0..n), 1.0));
        }
        let rel = match r.random_range(0..6) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        let rhs = match rel {
            Relation::Eq => 0.0,
            _ => r.random_range(-1.0..3.0),
        };
        if rel == Relation::Eq && n_cont > 0 {
            // Keep equalities satisfiable by always touching a continuous variable.
            coeffs.push((r.random_range(0..n_cont), 1.0));
            coeffs.sort_by_key(|c| c.0);
            coeffs.dedup_by_key(|c| c.0);
        }
        m.add_row(coeffs, rel, rhs, format!("r{k}"));
    }
    m
}

/// Fixed 24-slot demand (GW) on the synthetic daily shape, rounded to MW.
pub fn reference_demand() -> Vec<f64> {
    (0..24)
        .map(|t| (1000.0 * (25.0 + 8.0 * daily_shape(t as f64 + 0.5))).round() / 1000.0)
        .collect()
}

/// One unit, two slots, one zone: 2 continuous and 6 binary variables.
pub fn tiny_instance() -> UcInstance {
    let unit = GenUnit {
        a: 0.5,
        b: 1.0,
        c: 2.0,
        c_u: 1.5,
        c_d: 0.5,
        ramp_down: 3.0,
        ramp_up: 2.0,
        t_up: 1,
        t_down: 1,
        zones: vec![(1.0, 5.0)],
    };
    UcInstance::new(vec![unit], 2).unwrap()
}

/// Random `n x q` scenario set whose entries are pairwise distinct, so every
/// column minimum is unique.
pub fn distinct_set(r: &mut ChaCha8Rng, n: usize, q: usize) -> ScenarioSet {
    let mut values: Vec<f64> = (0..n * q).map(|k| k as f64).collect();
    for i in (1..values.len()).rev() {
        values.swap(i, r.random_range(0..=i));
    }
    ScenarioSet::from_flat(
        q,
        values
            .into_iter()
            .map(|v| v + r.random_range(0.0..0.5))
            .collect(),
    )
    .unwrap()
}
