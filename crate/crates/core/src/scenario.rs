//! Scenario sets and the certificates that only need the data.
//!
//! Constraints are always written as `g(x) <= b(delta)`. A scenario set is
//! the `N x q` matrix of right-hand sides `b_l(delta_i)`; a decision is
//! carried by its constraint image `g(x)` only.

use std::io::Read;
use std::path::Path;

use crate::certmath::{apriori_eps, check_open_unit, eps_n_beta, EpsParams};
use crate::error::{Error, Result};

/// `N x q` matrix of constraint right-hand sides, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    values: Vec<f64>,
    n: usize,
    q: usize,
}

impl ScenarioSet {
    /// Builds a set from row-major values; `values.len()` must equal `n * q`.
    pub fn from_flat(q: usize, values: Vec<f64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("q", "a scenario needs at least one column"));
        }
        if values.is_empty() {
            return Err(Error::Empty("scenario set"));
        }
        if !values.len().is_multiple_of(q) {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: values.len() % q,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / q,
                col: pos % q,
            });
        }
        let n = values.len() / q;
        Ok(Self { values, n, q })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let q = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * q);
        for row in rows {
            let row = row.as_ref();
            if row.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        if rows.is_empty() {
            return Err(Error::Empty("scenario set"));
        }
        Self::from_flat(q, values)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let table = read_numeric_csv(reader)?;
        if table.rows == 0 {
            return Err(Error::Empty("scenario set"));
        }
        Self::from_flat(table.cols, table.values)
    }

    /// Number of scenarios `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of constraints `q`.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.q..(i + 1) * self.q]
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.values[i * self.q + l]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.q)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// The rows listed in `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.q);
        for &i in indices {
            if i >= self.n {
                return Err(Error::param("indices", format!("row {i} out of range")));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::from_flat(self.q, values)
    }

    /// Column-wise maximum, handy for building decisions that violate
    /// everything.
    pub fn column_max(&self) -> Vec<f64> {
        let mut out = vec![f64::NEG_INFINITY; self.q];
        for row in self.rows() {
            for (o, v) in out.iter_mut().zip(row) {
                *o = o.max(*v);
            }
        }
        out
    }
}

/// Plain numeric CSV contents; `rows` may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Option<Vec<String>>,
    pub values: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

/// Parses comma-separated numeric rows. A first row whose first token is not
/// a number is taken as a header; every later row must be fully numeric and
/// as wide as the first.
pub fn read_numeric_csv(reader: impl Read) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(idx as u64 + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let first = record.get(0).unwrap_or("");
        if idx == 0 && first.parse::<f64>().is_err() {
            header = Some(record.iter().map(str::to_owned).collect::<Vec<_>>());
            cols = Some(record.len());
            continue;
        }
        let width = *cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: `{field}` is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {}: non-finite value", col + 1),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    Ok(NumericTable {
        header,
        values,
        rows,
        cols: cols.unwrap_or(0),
    })
}

/// How `reduce` picks one scenario per column when several attain the
/// minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lowest row index.
    #[default]
    SmallestIndex,
    /// Minimise the number of distinct indices by exhaustive search over the
    /// tied columns. At most [`MAX_TIED_COLUMNS`] tied columns.
    MinComplexity,
}

pub const MAX_TIED_COLUMNS: usize = 20;

/// Result of the column-wise reduction of a scenario set.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceSummary {
    /// `xi*_l = min_i b_l(delta_i)`.
    pub xi_star: Vec<f64>,
    /// Row attaining `xi*_l` for every column (0-based).
    pub indices: Vec<usize>,
    /// Number of distinct entries in `indices`, the complexity bound.
    pub distinct_count: usize,
}

impl DominanceSummary {
    /// Distinct dominant rows, ascending.
    pub fn distinct_indices(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn from_parts(xi_star: Vec<f64>, indices: Vec<usize>) -> Self {
        let mut distinct = indices.clone();
        distinct.sort_unstable();
        distinct.dedup();
        Self {
            xi_star,
            distinct_count: distinct.len(),
            indices,
        }
    }
}

/// Column-wise minimum with smallest-index tie-break.
pub fn reduce(s: &ScenarioSet) -> DominanceSummary {
    let mut xi = s.row(0).to_vec();
    let mut idx = vec![0; s.q()];
    for (i, row) in s.rows().enumerate().skip(1) {
        for l in 0..s.q() {
            // Strict: ties keep the earlier row.
            if row[l] < xi[l] {
                xi[l] = row[l];
                idx[l] = i;
            }
        }
    }
    DominanceSummary::from_parts(xi, idx)
}

pub fn reduce_with(s: &ScenarioSet, tie_break: TieBreak) -> Result<DominanceSummary> {
    match tie_break {
        TieBreak::SmallestIndex => Ok(reduce(s)),
        TieBreak::MinComplexity => reduce_min_complexity(s),
    }
}

fn reduce_min_complexity(s: &ScenarioSet) -> Result<DominanceSummary> {
    let base = reduce(s);
    let argmins: Vec<Vec<usize>> = (0..s.q())
        .map(|l| {
            (0..s.n())
                .filter(|&i| s.get(i, l) == base.xi_star[l])
                .collect()
        })
        .collect();

    let mut chosen: Vec<usize> = argmins
        .iter()
        .filter(|a| a.len() == 1)
        .map(|a| a[0])
        .collect();
    chosen.sort_unstable();
    chosen.dedup();

    let open: Vec<&Vec<usize>> = argmins
        .iter()
        .filter(|a| a.len() > 1 && !a.iter().any(|i| chosen.contains(i)))
        .collect();
    if open.len() > MAX_TIED_COLUMNS {
        return Err(Error::TooManyTiedColumns {
            count: open.len(),
            cap: MAX_TIED_COLUMNS,
        });
    }

    let mut best: Option<Vec<usize>> = None;
    let mut current = Vec::new();
    hitting_set(&open, &mut current, &mut best);
    chosen.extend(best.unwrap_or_default());
    chosen.sort_unstable();

    let indices = argmins
        .iter()
        .map(|a| *a.iter().find(|i| chosen.binary_search(i).is_ok()).unwrap())
        .collect();
    Ok(DominanceSummary::from_parts(base.xi_star, indices))
}

/// Depth-first minimum hitting set; branches on the rows of the first
/// unhit column in ascending order, so the first optimum found is kept.
fn hitting_set(sets: &[&Vec<usize>], current: &mut Vec<usize>, best: &mut Option<Vec<usize>>) {
    if let Some(b) = best {
        if current.len() >= b.len() {
            return;
        }
    }
    match sets.iter().find(|s| !s.iter().any(|i| current.contains(i))) {
        None => *best = Some(current.clone()),
        Some(unhit) => {
            for &i in unhit.iter() {
                current.push(i);
                hitting_set(sets, current, best);
                current.pop();
            }
        }
    }
}

/// A candidate decision, represented by its constraint image `g(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    g_values: Vec<f64>,
}

impl Decision {
    pub fn new(g_values: Vec<f64>) -> Result<Self> {
        if let Some(col) = g_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col });
        }
        Ok(Self { g_values })
    }

    /// The reduction `xi*` itself, viewed as a decision.
    pub fn from_summary(summary: &DominanceSummary) -> Self {
        Self {
            g_values: summary.xi_star.clone(),
        }
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g_values
    }

    pub fn q(&self) -> usize {
        self.g_values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    APosteriori,
    APriori,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub epsilon: f64,
    pub beta: f64,
    pub n: usize,
    pub q: usize,
    pub complexity_used: Option<usize>,
}

/// Risk bound `eps_{N,beta}(varsigma_N)` valid for any feasible decision.
pub fn a_posteriori_certificate(s: &ScenarioSet, beta: f64) -> Result<CertificateReport> {
    let summary = reduce(s);
    a_posteriori_from_summary(s.n(), &summary, beta)
}

pub fn a_posteriori_from_summary(
    n: usize,
    summary: &DominanceSummary,
    beta: f64,
) -> Result<CertificateReport> {
    let p = EpsParams::new(n, beta, summary.distinct_count)?;
    Ok(CertificateReport {
        kind: CertificateKind::APosteriori,
        epsilon: eps_n_beta(p),
        beta,
        n,
        q: summary.xi_star.len(),
        complexity_used: Some(summary.distinct_count),
    })
}

/// Data-independent bound from the binomial tail with `q` terms.
pub fn a_priori_certificate(n: usize, q: usize, beta: f64) -> Result<CertificateReport> {
    check_open_unit("beta", beta)?;
    Ok(CertificateReport {
        kind: CertificateKind::APriori,
        epsilon: apriori_eps(n, q, beta)?,
        beta,
        n,
        q,
        complexity_used: None,
    })
}

/// True iff some constraint `g_l > b_l`. Equality is feasible.
pub fn violates(d: &Decision, b_row: &[f64]) -> Result<bool> {
    if b_row.len() != d.q() {
        return Err(Error::DimensionMismatch {
            expected: d.q(),
            found: b_row.len(),
        });
    }
    Ok(violates_unchecked(d.g_values(), b_row))
}

fn violates_unchecked(g: &[f64], b: &[f64]) -> bool {
    g.iter().zip(b).any(|(g, b)| g > b)
}

/// Fraction of validation rows violated by `d`.
pub fn empirical_risk(d: &Decision, validation: &ScenarioSet) -> Result<f64> {
    if validation.n() == 0 {
        return Err(Error::Empty("validation set"));
    }
    if validation.q() != d.q() {
        return Err(Error::DimensionMismatch {
            expected: d.q(),
            found: validation.q(),
        });
    }
    let hits = validation
        .rows()
        .filter(|row| violates_unchecked(d.g_values(), row))
        .count();
    Ok(hits as f64 / validation.n() as f64)
}

/// Per-row comparison of a decision against the reduction `xi*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DominanceTally {
    pub probe_rows: usize,
    pub decision_violations: usize,
    pub reduction_violations: usize,
    /// Rows violated by the decision but not by `xi*`. Always zero for a
    /// decision that is feasible for the training data.
    pub exceptions: usize,
}

pub fn dominance_tally(
    d: &Decision,
    summary: &DominanceSummary,
    probe: &ScenarioSet,
) -> Result<DominanceTally> {
    if summary.xi_star.len() != d.q() {
        return Err(Error::DimensionMismatch {
            expected: summary.xi_star.len(),
            found: d.q(),
        });
    }
    if probe.q() != d.q() {
        return Err(Error::DimensionMismatch {
            expected: d.q(),
            found: probe.q(),
        });
    }
    if let Some(l) = d
        .g_values()
        .iter()
        .zip(&summary.xi_star)
        .position(|(g, xi)| g > xi)
    {
        return Err(Error::Contract(format!(
            "decision is infeasible for the training set at constraint {l}: {} > {}",
            d.g_values()[l],
            summary.xi_star[l]
        )));
    }
    let mut tally = DominanceTally {
        probe_rows: probe.n(),
        ..Default::default()
    };
    for row in probe.rows() {
        let by_decision = violates_unchecked(d.g_values(), row);
        let by_reduction = violates_unchecked(&summary.xi_star, row);
        tally.decision_violations += by_decision as usize;
        tally.reduction_violations += by_reduction as usize;
        tally.exceptions += (by_decision && !by_reduction) as usize;
    }
    Ok(tally)
}

/// True iff every probe row violated by `d` is also violated by `xi*`.
pub fn dominance_check(
    d: &Decision,
    summary: &DominanceSummary,
    probe: &ScenarioSet,
) -> Result<bool> {
    Ok(dominance_tally(d, summary, probe)?.exceptions == 0)
}
