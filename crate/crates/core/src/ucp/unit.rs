use std::path::Path;

use crate::error::{Error, Result};

/// One thermal generation unit. Power in GW, time in hours, costs in euros.
#[derive(Debug, Clone, PartialEq)]
pub struct GenUnit {
    /// Fuel cost `a P^2 + b P + c Y`.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Startup cost.
    pub c_u: f64,
    /// Shutdown cost.
    pub c_d: f64,
    /// Largest allowed decrease of `P` between consecutive slots (GW/h).
    pub ramp_down: f64,
    /// Largest allowed increase of `P` between consecutive slots (GW/h).
    pub ramp_up: f64,
    /// Minimum up time (slots).
    pub t_up: usize,
    /// Minimum down time (slots).
    pub t_down: usize,
    /// Operating zones `(p_min, p_max)`, ascending and disjoint.
    pub zones: Vec<(f64, f64)>,
}

impl GenUnit {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("c_u", self.c_u),
            ("c_d", self.c_d),
            ("ramp_down", self.ramp_down),
            ("ramp_up", self.ramp_up),
        ];
        for (key, v) in reals {
            if !v.is_finite() {
                return Err(unit_err(key, format!("{v} is not finite")));
            }
        }
        if self.a < 0.0 {
            return Err(unit_err("a", "quadratic fuel coefficient must be >= 0"));
        }
        if self.ramp_down < 0.0 || self.ramp_up < 0.0 {
            return Err(unit_err("ramp_up/ramp_down", "ramp limits must be >= 0"));
        }
        if self.t_up == 0 {
            return Err(unit_err(
                "t_up",
                "minimum up time must be a positive integer",
            ));
        }
        if self.t_down == 0 {
            return Err(unit_err(
                "t_down",
                "minimum down time must be a positive integer",
            ));
        }
        if self.zones.is_empty() {
            return Err(unit_err("zones", "at least one operating zone is required"));
        }
        for (z, &(lo, hi)) in self.zones.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(unit_err(
                    "zones",
                    format!("zone {} = [{lo}, {hi}] needs 0 <= p_min <= p_max", z + 1),
                ));
            }
            if z > 0 && self.zones[z - 1].1 >= lo {
                return Err(unit_err(
                    "zones",
                    format!("zone {} overlaps zone {z}", z + 1),
                ));
            }
        }
        Ok(())
    }

    pub fn p_max(&self) -> f64 {
        self.zones.iter().map(|z| z.1).fold(0.0, f64::max)
    }
}

fn unit_err(key: &str, message: impl Into<String>) -> Error {
    Error::UnitConfig {
        key: key.to_owned(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UcInstance {
    pub units: Vec<GenUnit>,
    pub horizon: usize,
}

impl UcInstance {
    pub fn new(units: Vec<GenUnit>, horizon: usize) -> Result<Self> {
        let inst = Self { units, horizon };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            return Err(Error::Empty("unit list"));
        }
        if self.horizon < 2 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: format!("T = {} but at least 2 slots are required", self.horizon),
            });
        }
        for (j, u) in self.units.iter().enumerate() {
            u.validate().map_err(|e| match e {
                Error::UnitConfig { key, message } => Error::UnitConfig {
                    key: format!("unit[{}].{key}", j + 1),
                    message,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    /// Total capacity available in one slot.
    pub fn capacity(&self) -> f64 {
        self.units.iter().map(GenUnit::p_max).sum()
    }

    /// The four-unit, 24-slot case study.
    pub fn four_unit() -> Self {
        let unit =
            |a, b, c, c_u, c_d, ramp_down, ramp_up, t_up, t_down, zones: &[(f64, f64)]| GenUnit {
                a,
                b,
                c,
                c_u,
                c_d,
                ramp_down,
                ramp_up,
                t_up,
                t_down,
                zones: zones.to_vec(),
            };
        Self {
            units: vec![
                unit(
                    1.0,
                    0.4,
                    0.3,
                    0.9,
                    0.4,
                    7.0,
                    7.0,
                    3,
                    3,
                    &[(7.0, 13.5), (13.8, 14.5)],
                ),
                unit(
                    0.3,
                    2.0,
                    0.2,
                    0.5,
                    0.4,
                    2.0,
                    0.2,
                    2,
                    1,
                    &[(1.0, 3.0), (3.2, 14.5)],
                ),
                unit(
                    0.4,
                    1.0,
                    1.0,
                    0.2,
                    0.3,
                    5.0,
                    5.0,
                    1,
                    3,
                    &[(3.0, 4.0), (8.0, 9.0), (13.0, 14.0)],
                ),
                unit(10.0, 0.1, 0.1, 1.0, 0.8, 1.5, 1.0, 1, 4, &[(1.0, 13.0)]),
            ],
            horizon: 24,
        }
    }

    /// Reads a unit-parameter file; see [`UcInstance::from_toml_str`].
    pub fn read_toml(path: impl AsRef<Path>, horizon: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text, horizon)
    }

    /// Parses a unit-parameter document:
    ///
    /// ```toml
    /// horizon = 24            # optional, slots (overridden by the argument)
    ///
    /// [[unit]]
    /// a = 1.0                 # cost/GW^2
    /// b = 0.4                 # cost/GW
    /// c = 0.3                 # cost per slot on
    /// c_u = 0.9               # cost per startup
    /// c_d = 0.4               # cost per shutdown
    /// ramp_down = 7.0         # GW/h
    /// ramp_up = 7.0           # GW/h
    /// t_up = 3                # slots
    /// t_down = 3              # slots
    /// zones = [[7.0, 13.5], [13.8, 14.5]]   # GW
    /// ```
    ///
    /// Every unit key is required and unknown keys are rejected.
    pub fn from_toml_str(text: &str, horizon: Option<usize>) -> Result<Self> {
        let doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::UnitConfig {
                key: "<document>".into(),
                message: e.message().to_owned(),
            })?;
        for key in doc.keys() {
            if key != "unit" && key != "horizon" {
                return Err(unit_err(key, "unknown top-level key"));
            }
        }
        let file_horizon = match doc.get("horizon") {
            None => None,
            Some(v) => Some(
                as_count(v).ok_or_else(|| unit_err("horizon", "expected a positive integer"))?,
            ),
        };
        let horizon = horizon.or(file_horizon).ok_or_else(|| {
            unit_err(
                "horizon",
                "no horizon given in the file or on the command line",
            )
        })?;
        let tables = doc
            .get("unit")
            .and_then(|v| v.as_array())
            .ok_or_else(|| unit_err("unit", "expected one or more [[unit]] sections"))?;
        let mut units = Vec::with_capacity(tables.len());
        for (j, v) in tables.iter().enumerate() {
            let prefix = format!("unit[{}]", j + 1);
            let t = v
                .as_table()
                .ok_or_else(|| unit_err(&prefix, "expected a table"))?;
            units.push(parse_unit(t, &prefix)?);
        }
        Self::new(units, horizon)
    }

    /// Renders the instance back into the unit-file grammar.
    pub fn to_toml_string(&self) -> String {
        let mut out = format!("horizon = {}\n", self.horizon);
        for u in &self.units {
            let zones: Vec<String> = u
                .zones
                .iter()
                .map(|(l, h)| format!("[{l:?}, {h:?}]"))
                .collect();
            out.push_str(&format!(
                "\n[[unit]]\na = {:?}\nb = {:?}\nc = {:?}\nc_u = {:?}\nc_d = {:?}\nramp_down = {:?}\nramp_up = {:?}\nt_up = {}\nt_down = {}\nzones = [{}]\n",
                u.a, u.b, u.c, u.c_u, u.c_d, u.ramp_down, u.ramp_up, u.t_up, u.t_down, zones.join(", ")
            ));
        }
        out
    }
}

const UNIT_KEYS: [&str; 10] = [
    "a",
    "b",
    "c",
    "c_u",
    "c_d",
    "ramp_down",
    "ramp_up",
    "t_up",
    "t_down",
    "zones",
];

fn parse_unit(t: &toml::Table, prefix: &str) -> Result<GenUnit> {
    for key in t.keys() {
        if !UNIT_KEYS.contains(&key.as_str()) {
            return Err(unit_err(&format!("{prefix}.{key}"), "unknown key"));
        }
    }
    let key = |k: &str| format!("{prefix}.{k}");
    let get = |k: &str| {
        t.get(k)
            .ok_or_else(|| unit_err(&key(k), "missing required key"))
    };
    let real = |k: &str| -> Result<f64> {
        let v = get(k)?;
        as_real(v).ok_or_else(|| {
            unit_err(
                &key(k),
                format!("expected a number, found {}", v.type_str()),
            )
        })
    };
    let count = |k: &str| -> Result<usize> {
        let v = get(k)?;
        as_count(v).ok_or_else(|| unit_err(&key(k), "expected a positive integer"))
    };
    let zones_v = get("zones")?;
    let arr = zones_v
        .as_array()
        .ok_or_else(|| unit_err(&key("zones"), "expected an array of [p_min, p_max] pairs"))?;
    let mut zones = Vec::with_capacity(arr.len());
    for (z, pair) in arr.iter().enumerate() {
        let p = pair
            .as_array()
            .filter(|p| p.len() == 2)
            .and_then(|p| Some((as_real(&p[0])?, as_real(&p[1])?)))
            .ok_or_else(|| {
                unit_err(
                    &key("zones"),
                    format!("zone {} is not a [p_min, p_max] pair", z + 1),
                )
            })?;
        zones.push(p);
    }
    let unit = GenUnit {
        a: real("a")?,
        b: real("b")?,
        c: real("c")?,
        c_u: real("c_u")?,
        c_d: real("c_d")?,
        ramp_down: real("ramp_down")?,
        ramp_up: real("ramp_up")?,
        t_up: count("t_up")?,
        t_down: count("t_down")?,
        zones,
    };
    unit.validate().map_err(|e| match e {
        Error::UnitConfig { key: k, message } => unit_err(&key(&k), message),
        other => other,
    })?;
    Ok(unit)
}

fn as_real(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_count(v: &toml::Value) -> Option<usize> {
    v.as_integer().filter(|&i| i > 0).map(|i| i as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_unit_is_valid() {
        let inst = UcInstance::four_unit();
        inst.validate().unwrap();
        assert_eq!(
            inst.units.iter().map(|u| u.zones.len()).collect::<Vec<_>>(),
            vec![2, 2, 3, 1]
        );
        assert!((inst.capacity() - (14.5 + 14.5 + 14.0 + 13.0)).abs() < 1e-12);
    }

    #[test]
    fn toml_roundtrip() {
        let inst = UcInstance::four_unit();
        let back = UcInstance::from_toml_str(&inst.to_toml_string(), None).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn toml_errors_name_the_key() {
        let base = UcInstance::four_unit().to_toml_string();
        let missing = base.replacen("ramp_up = 7.0\n", "", 1);
        let err = UcInstance::from_toml_str(&missing, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("unit[1].ramp_up"), "{err}");

        let unknown = base.replacen("t_up = 3\n", "t_up = 3\nspeed = 1\n", 1);
        let err = UcInstance::from_toml_str(&unknown, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("unit[1].speed"), "{err}");

        let bad = base.replacen("t_down = 3\n", "t_down = 0\n", 1);
        let err = UcInstance::from_toml_str(&bad, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("unit[1].t_down"), "{err}");

        let overlap = base.replacen("[13.8, 14.5]", "[13.0, 14.5]", 1);
        let err = UcInstance::from_toml_str(&overlap, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("unit[1].zones"), "{err}");

        let neg = base.replacen("a = 1.0\n", "a = -1.0\n", 1);
        let err = UcInstance::from_toml_str(&neg, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("unit[1].a"), "{err}");
    }

    #[test]
    fn horizon_override_and_requirement() {
        let text = UcInstance::four_unit().to_toml_string();
        assert_eq!(
            UcInstance::from_toml_str(&text, Some(6)).unwrap().horizon,
            6
        );
        let no_h = text.replacen("horizon = 24\n", "", 1);
        assert!(UcInstance::from_toml_str(&no_h, None).is_err());
        assert!(UcInstance::from_toml_str(&no_h, Some(1)).is_err());
    }
}
