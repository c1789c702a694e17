use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scenario::{read_numeric_csv, ScenarioSet};
use crate::sizing::ScenarioSource;

/// Demand profiles, one row per day, GW.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandData {
    values: Vec<f64>,
    n: usize,
    horizon: usize,
}

impl DemandData {
    pub fn new(horizon: usize, values: Vec<f64>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "must be positive".into(),
            });
        }
        if !values.len().is_multiple_of(horizon) {
            return Err(Error::DimensionMismatch {
                expected: horizon,
                found: values.len() % horizon,
            });
        }
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NonFinite {
                    row: k / horizon,
                    col: k % horizon,
                });
            }
        }
        Ok(Self {
            n: values.len() / horizon,
            values,
            horizon,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let horizon = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or(Error::Empty("demand rows"))?;
        let mut values = Vec::with_capacity(rows.len() * horizon);
        for r in rows {
            let r = r.as_ref();
            if r.len() != horizon {
                return Err(Error::DimensionMismatch {
                    expected: horizon,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(horizon, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.horizon..(i + 1) * self.horizon]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.horizon)
    }

    /// Reads a demand CSV. A header row is optional; a header-only file gives
    /// zero days with the header's width as horizon.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let table = read_numeric_csv(reader)?;
        if table.cols == 0 {
            return Err(Error::Empty("demand file"));
        }
        Self::new(table.cols, table.values).map_err(|e| match e {
            Error::NonFinite { row, col } => Error::Parse {
                line: (row + 1 + table.header.is_some() as usize) as u64,
                message: format!("column {}: demand must be finite and >= 0", col + 1),
            },
            other => other,
        })
    }

    /// Writes a header `h0,...,h{T-1}` followed by one row per day.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Parse {
            line: 0,
            message: e.to_string(),
        };
        w.write_record((0..self.horizon).map(|t| format!("h{t}")))
            .map_err(io)?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn column_stats(&self) -> Vec<ColumnStats> {
        (0..self.horizon)
            .map(|t| {
                let col = self.rows().map(|r| r[t]);
                let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
                for v in col {
                    min = min.min(v);
                    max = max.max(v);
                    sum += v;
                }
                ColumnStats {
                    min,
                    mean: if self.n > 0 {
                        sum / self.n as f64
                    } else {
                        f64::NAN
                    },
                    max,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Maps `sum_j P[j][t] >= demand[t]` to `g_t(x) <= b_t` with
/// `g_t = -sum_j P[j][t]` and `b_t = -demand[t]`. The dominant scenario of
/// each slot is therefore the day with the largest demand in that slot.
pub fn to_additive(d: &DemandData) -> Result<ScenarioSet> {
    ScenarioSet::from_flat(d.horizon, d.values.iter().map(|v| -v).collect())
}

/// Parameters of the synthetic demand generator (GW unless noted).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub base: f64,
    /// Scale of the morning/evening double peak.
    pub daily_amp: f64,
    /// Offset applied per season, cycling through `+1, 0, -1, 0` times this.
    pub season_amp: f64,
    /// Days per season.
    pub season_len: usize,
    /// Standard deviation of the additive noise.
    pub noise_sd: f64,
    /// Share of the noise variance common to all slots of a day, in [0, 1].
    pub day_corr: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            base: 25.0,
            daily_amp: 8.0,
            season_amp: 3.0,
            season_len: 91,
            noise_sd: 1.5,
            day_corr: 0.8,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("base", self.base),
            ("daily_amp", self.daily_amp),
            ("season_amp", self.season_amp),
            ("noise_sd", self.noise_sd),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} must be finite and >= 0"),
                });
            }
        }
        if self.season_len == 0 {
            return Err(Error::InvalidParameter {
                name: "season_len",
                reason: "must be positive".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.day_corr) {
            return Err(Error::InvalidParameter {
                name: "day_corr",
                reason: format!("{} is outside [0, 1]", self.day_corr),
            });
        }
        Ok(())
    }
}

/// Daily shape in roughly [-0.4, 0.6]: a morning bump near 9h and a larger
/// evening bump near 20h, periodic over 24h.
pub fn daily_shape(hour: f64) -> f64 {
    let bump = |centre: f64, width: f64| {
        let mut dist = (hour - centre).abs() % 24.0;
        dist = dist.min(24.0 - dist);
        (-dist * dist / (2.0 * width * width)).exp()
    };
    0.8 * bump(9.0, 2.0) + bump(20.0, 2.5) - 0.4
}

/// Endless deterministic stream of synthetic days.
#[derive(Debug, Clone)]
pub struct SynthStream {
    rng: ChaCha8Rng,
    params: SynthParams,
    horizon: usize,
    day: usize,
}

impl SynthStream {
    pub fn new(seed: u64, horizon: usize, params: SynthParams) -> Result<Self> {
        params.validate()?;
        if horizon == 0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "must be positive".into(),
            });
        }
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            params,
            horizon,
            day: 0,
        })
    }

    pub fn next_day(&mut self) -> Vec<f64> {
        let p = &self.params;
        let season = (self.day / p.season_len) % 4;
        let offset = p.season_amp * (season as f64 * PI / 2.0).cos().round();
        let common: f64 = StandardNormal.sample(&mut self.rng);
        let (wc, wh) = (p.day_corr.sqrt(), (1.0 - p.day_corr).sqrt());
        let mut out = Vec::with_capacity(self.horizon);
        for t in 0..self.horizon {
            let hour = (t as f64 + 0.5) * 24.0 / self.horizon as f64;
            let own: f64 = StandardNormal.sample(&mut self.rng);
            let noise = p.noise_sd * (wc * common + wh * own);
            out.push((p.base + p.daily_amp * daily_shape(hour) + offset + noise).max(0.0));
        }
        self.day += 1;
        out
    }
}

/// `ScenarioSource` yielding additive rows `-demand`.
impl ScenarioSource for SynthStream {
    fn pull(&mut self) -> Option<Vec<f64>> {
        Some(self.next_day().into_iter().map(|v| -v).collect())
    }
}

/// The first `n_days` days of [`SynthStream`]; `n_days = 0` gives an empty
/// data set.
pub fn synth_demand(
    seed: u64,
    n_days: usize,
    horizon: usize,
    params: &SynthParams,
) -> Result<DemandData> {
    let mut s = SynthStream::new(seed, horizon, *params)?;
    let mut values = Vec::with_capacity(n_days * horizon);
    for _ in 0..n_days {
        values.extend(s.next_day());
    }
    DemandData::new(horizon, values)
}
