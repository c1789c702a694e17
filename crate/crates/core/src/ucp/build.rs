use std::fmt;

use super::unit::UcInstance;
use crate::error::{Error, Result};
use crate::miqp::{MiqpModel, Relation};

/// Absolute tolerance on continuous constraints.
pub const FEAS_TOL: f64 = 1e-7;

/// Variable indices of the compiled model: `P` (continuous), then `y`, `u`,
/// `d` (binary), each laid out unit by unit and slot by slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarLayout {
    horizon: usize,
    n_units: usize,
    zone_offset: Vec<usize>,
    n_zones: Vec<usize>,
    u_base: usize,
    d_base: usize,
    total: usize,
}

impl VarLayout {
    pub fn new(inst: &UcInstance) -> Self {
        let t = inst.horizon;
        let n_units = inst.n_units();
        let mut zone_offset = Vec::with_capacity(n_units);
        let mut next = n_units * t;
        for u in &inst.units {
            zone_offset.push(next);
            next += u.zones.len() * t;
        }
        let u_base = next;
        let d_base = u_base + n_units * t;
        Self {
            horizon: t,
            n_units,
            zone_offset,
            n_zones: inst.units.iter().map(|u| u.zones.len()).collect(),
            u_base,
            d_base,
            total: d_base + n_units * t,
        }
    }

    pub fn p(&self, j: usize, t: usize) -> usize {
        j * self.horizon + t
    }

    pub fn y(&self, j: usize, z: usize, t: usize) -> usize {
        self.zone_offset[j] + z * self.horizon + t
    }

    pub fn u(&self, j: usize, t: usize) -> usize {
        self.u_base + j * self.horizon + t
    }

    pub fn d(&self, j: usize, t: usize) -> usize {
        self.d_base + j * self.horizon + t
    }

    pub fn n_cont(&self) -> usize {
        self.n_units * self.horizon
    }

    pub fn n_bin(&self) -> usize {
        self.total - self.n_cont()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    fn zones(&self, j: usize) -> usize {
        self.n_zones[j]
    }
}

/// A unit-commitment schedule. Binary entries are 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UcSolution {
    /// `power[j][t]`, GW.
    pub power: Vec<Vec<f64>>,
    /// `zone_on[j][z][t]`.
    pub zone_on: Vec<Vec<Vec<u8>>>,
    pub startup: Vec<Vec<u8>>,
    pub shutdown: Vec<Vec<u8>>,
    pub objective: f64,
}

impl UcSolution {
    /// Commitment status `Y[j][t] = sum_z y[j][z][t]`.
    pub fn status(&self, j: usize, t: usize) -> u32 {
        self.zone_on[j].iter().map(|z| z[t] as u32).sum()
    }

    /// Total generation per slot.
    pub fn generation(&self) -> Vec<f64> {
        let horizon = self.power.first().map_or(0, Vec::len);
        (0..horizon)
            .map(|t| self.power.iter().map(|p| p[t]).sum())
            .collect()
    }

    /// Flattens into the variable order of [`VarLayout`].
    pub fn to_assignment(&self, inst: &UcInstance) -> Vec<f64> {
        let lay = VarLayout::new(inst);
        let mut x = vec![0.0; lay.total()];
        for j in 0..inst.n_units() {
            for t in 0..inst.horizon {
                x[lay.p(j, t)] = self.power[j][t];
                for z in 0..lay.zones(j) {
                    x[lay.y(j, z, t)] = self.zone_on[j][z][t] as f64;
                }
                x[lay.u(j, t)] = self.startup[j][t] as f64;
                x[lay.d(j, t)] = self.shutdown[j][t] as f64;
            }
        }
        x
    }

    /// Reads a solver assignment; binaries are rounded, the objective is
    /// recomputed from the instance costs.
    pub fn from_assignment(inst: &UcInstance, x: &[f64]) -> Result<Self> {
        let lay = VarLayout::new(inst);
        if x.len() != lay.total() {
            return Err(Error::DimensionMismatch {
                expected: lay.total(),
                found: x.len(),
            });
        }
        let bit = |v: f64| (v > 0.5) as u8;
        let nt = inst.horizon;
        let units = 0..inst.n_units();
        let sol = Self {
            power: units
                .clone()
                .map(|j| (0..nt).map(|t| x[lay.p(j, t)]).collect())
                .collect(),
            zone_on: units
                .clone()
                .map(|j| {
                    (0..lay.zones(j))
                        .map(|z| (0..nt).map(|t| bit(x[lay.y(j, z, t)])).collect())
                        .collect()
                })
                .collect(),
            startup: units
                .clone()
                .map(|j| (0..nt).map(|t| bit(x[lay.u(j, t)])).collect())
                .collect(),
            shutdown: units
                .map(|j| (0..nt).map(|t| bit(x[lay.d(j, t)])).collect())
                .collect(),
            objective: 0.0,
        };
        let objective = uc_objective(inst, &sol);
        Ok(Self { objective, ..sol })
    }
}

/// Cost of a schedule under the instance's fuel, startup and shutdown
/// coefficients.
pub fn uc_objective(inst: &UcInstance, sol: &UcSolution) -> f64 {
    let mut total = 0.0;
    for (j, unit) in inst.units.iter().enumerate() {
        for t in 0..inst.horizon {
            let p = sol.power[j][t];
            total += unit.a * p * p
                + unit.b * p
                + unit.c * sol.status(j, t) as f64
                + unit.c_u * sol.startup[j][t] as f64
                + unit.c_d * sol.shutdown[j][t] as f64;
        }
    }
    total
}

/// Compiles the reduced unit-commitment program. Demand enters as
/// `sum_j P[j][t] >= -xi[t]`; a slot with `xi[t] = +inf` gets no demand row.
pub fn build_miqp(inst: &UcInstance, xi: &[f64]) -> Result<MiqpModel> {
    inst.validate()?;
    let nt = inst.horizon;
    if xi.len() != nt {
        return Err(Error::DimensionMismatch {
            expected: nt,
            found: xi.len(),
        });
    }
    if let Some(t) = xi
        .iter()
        .position(|v| v.is_nan() || *v == f64::NEG_INFINITY)
    {
        return Err(Error::Model(format!(
            "xi[{t}] = {} is not usable as a demand bound",
            xi[t]
        )));
    }
    for (j, u) in inst.units.iter().enumerate() {
        if u.t_up > nt || u.t_down > nt {
            return Err(Error::Model(format!(
                "unit {}: minimum up/down times ({}, {}) exceed the horizon T = {nt}",
                j + 1,
                u.t_up,
                u.t_down
            )));
        }
    }

    let lay = VarLayout::new(inst);
    let mut m = MiqpModel::new(lay.n_cont(), lay.n_bin());
    let prev = |t: usize| (t + nt - 1) % nt;

    for (j, unit) in inst.units.iter().enumerate() {
        let jj = j + 1;
        for t in 0..nt {
            let p = lay.p(j, t);
            m.names[p] = format!("P_{jj}_{t}");
            m.quad_diag[p] = unit.a;
            m.lin_cost[p] = unit.b;
            m.bounds[p] = (0.0, unit.p_max());
            for z in 0..lay.zones(j) {
                let y = lay.y(j, z, t);
                m.names[y] = format!("y_{jj}_{}_{t}", z + 1);
                m.lin_cost[y] = unit.c;
            }
            m.names[lay.u(j, t)] = format!("u_{jj}_{t}");
            m.lin_cost[lay.u(j, t)] = unit.c_u;
            m.names[lay.d(j, t)] = format!("d_{jj}_{t}");
            m.lin_cost[lay.d(j, t)] = unit.c_d;
        }
    }

    for (t, &x) in xi.iter().enumerate() {
        if x.is_finite() {
            let coeffs = (0..inst.n_units()).map(|j| (lay.p(j, t), 1.0)).collect();
            m.add_row(coeffs, Relation::Ge, -x, format!("demand_t{t}"));
        }
    }

    for (j, unit) in inst.units.iter().enumerate() {
        let jj = j + 1;
        let y_all = |t: usize, sign: f64| -> Vec<(usize, f64)> {
            (0..lay.zones(j)).map(|z| (lay.y(j, z, t), sign)).collect()
        };
        for t in 0..nt {
            let (p, pp) = (lay.p(j, t), lay.p(j, prev(t)));
            let (u, d) = (lay.u(j, t), lay.d(j, t));
            let tag = |family: &str| format!("{family}_j{jj}_t{t}");

            m.add_row(
                vec![(p, 1.0), (pp, -1.0)],
                Relation::Le,
                unit.ramp_up,
                tag("ramp_up"),
            );
            m.add_row(
                vec![(p, 1.0), (pp, -1.0)],
                Relation::Ge,
                -unit.ramp_down,
                tag("ramp_dn"),
            );

            let mut lo = vec![(p, 1.0)];
            let mut hi = vec![(p, 1.0)];
            for (z, &(pmin, pmax)) in unit.zones.iter().enumerate() {
                lo.push((lay.y(j, z, t), -pmin));
                hi.push((lay.y(j, z, t), -pmax));
            }
            m.add_row(lo, Relation::Ge, 0.0, tag("zone_lo"));
            m.add_row(hi, Relation::Le, 0.0, tag("zone_hi"));

            m.add_row(y_all(t, 1.0), Relation::Le, 1.0, tag("onezone"));

            // Y_t - Y_{t-1} - u_t <= 0 and u_t - Y_t <= 0
            let mut r = y_all(t, 1.0);
            r.extend(y_all(prev(t), -1.0));
            r.push((u, -1.0));
            m.add_row(r, Relation::Le, 0.0, tag("start_a"));
            let mut r = vec![(u, 1.0)];
            r.extend(y_all(t, -1.0));
            m.add_row(r, Relation::Le, 0.0, tag("start_b"));

            let mut r = vec![(u, 1.0)];
            r.extend(y_all(prev(t), 1.0));
            m.add_row(r, Relation::Le, 1.0, tag("startoff"));

            for k in 0..unit.t_up {
                let mut r = vec![(u, 1.0)];
                r.extend(y_all((t + k) % nt, -1.0));
                m.add_row(r, Relation::Le, 0.0, format!("minup_j{jj}_t{t}_k{k}"));
            }

            // Y_{t-1} - Y_t - d_t <= 0 and d_t - Y_{t-1} <= 0
            let mut r = y_all(prev(t), 1.0);
            r.extend(y_all(t, -1.0));
            r.push((d, -1.0));
            m.add_row(r, Relation::Le, 0.0, tag("stop_a"));
            let mut r = vec![(d, 1.0)];
            r.extend(y_all(prev(t), -1.0));
            m.add_row(r, Relation::Le, 0.0, tag("stop_b"));

            let mut r = vec![(d, 1.0)];
            r.extend(y_all(t, 1.0));
            m.add_row(r, Relation::Le, 1.0, tag("stopon"));

            for k in 0..unit.t_down {
                let mut r = vec![(d, 1.0)];
                r.extend(y_all((t + k) % nt, 1.0));
                m.add_row(r, Relation::Le, 1.0, format!("mindown_j{jj}_t{t}_k{k}"));
            }
        }
    }
    Ok(m)
}

/// One violated constraint of a schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Constraint family, e.g. `"minup"`; `"domain"` for non-binary entries or
    /// negative power, `"shape"` for mismatched dimensions.
    pub family: &'static str,
    /// 0-based unit index, `None` for system-wide rows.
    pub unit: Option<usize>,
    pub time: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            Some(j) => write!(f, "{} (unit {}, t={})", self.family, j + 1, self.time),
            None => write!(f, "{} (t={})", self.family, self.time),
        }
    }
}

/// Checks every unit-commitment constraint directly on the schedule.
/// Continuous rows use [`FEAS_TOL`]; binary rows are exact.
pub fn check_feasible(inst: &UcInstance, sol: &UcSolution, xi: &[f64]) -> Vec<Violation> {
    let nt = inst.horizon;
    let np = inst.n_units();
    let mut out = Vec::new();
    let shape_ok = xi.len() == nt
        && sol.power.len() == np
        && sol.zone_on.len() == np
        && sol.startup.len() == np
        && sol.shutdown.len() == np
        && (0..np).all(|j| {
            sol.power[j].len() == nt
                && sol.startup[j].len() == nt
                && sol.shutdown[j].len() == nt
                && sol.zone_on[j].len() == inst.units[j].zones.len()
                && sol.zone_on[j].iter().all(|z| z.len() == nt)
        });
    if !shape_ok {
        out.push(Violation {
            family: "shape",
            unit: None,
            time: 0,
        });
        return out;
    }
    let mut flag = |family, unit, time| out.push(Violation { family, unit, time });

    let gen = sol.generation();
    for t in 0..nt {
        if xi[t].is_finite() && gen[t] < -xi[t] - FEAS_TOL {
            flag("demand", None, t);
        }
    }

    for (j, unit) in inst.units.iter().enumerate() {
        let binary = |v: u8| v <= 1;
        let ys = |t: usize| sol.status(j, t) as i64;
        for t in 0..nt {
            let tp = (t + nt - 1) % nt;
            let p = sol.power[j][t];
            let (u, d) = (sol.startup[j][t] as i64, sol.shutdown[j][t] as i64);
            if !binary(sol.startup[j][t])
                || !binary(sol.shutdown[j][t])
                || sol.zone_on[j].iter().any(|z| !binary(z[t]))
                || !p.is_finite()
                || p < -FEAS_TOL
                || p > unit.p_max() + FEAS_TOL
            {
                flag("domain", Some(j), t);
            }

            let delta = p - sol.power[j][tp];
            if delta > unit.ramp_up + FEAS_TOL || delta < -unit.ramp_down - FEAS_TOL {
                flag("ramp", Some(j), t);
            }
            let lo: f64 = unit
                .zones
                .iter()
                .zip(&sol.zone_on[j])
                .map(|(z, y)| z.0 * y[t] as f64)
                .sum();
            let hi: f64 = unit
                .zones
                .iter()
                .zip(&sol.zone_on[j])
                .map(|(z, y)| z.1 * y[t] as f64)
                .sum();
            if p < lo - FEAS_TOL || p > hi + FEAS_TOL {
                flag("zone", Some(j), t);
            }
            if ys(t) > 1 {
                flag("onezone", Some(j), t);
            }
            if ys(t) - ys(tp) > u || u > ys(t) {
                flag("start", Some(j), t);
            }
            if u > 1 - ys(tp) {
                flag("startoff", Some(j), t);
            }
            if (0..unit.t_up).any(|k| ys((t + k) % nt) < u) {
                flag("minup", Some(j), t);
            }
            if ys(tp) - ys(t) > d || d > ys(tp) {
                flag("stop", Some(j), t);
            }
            if d > 1 - ys(t) {
                flag("stopon", Some(j), t);
            }
            if (0..unit.t_down).any(|k| ys((t + k) % nt) > 1 - d) {
                flag("mindown", Some(j), t);
            }
        }
    }
    out
}
