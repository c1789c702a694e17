//! Writer for the CPLEX LP text format.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::model::{MiqpModel, Relation};

/// Terms per output line; keeps lines well under the 510-character limit
/// some readers impose.
const TERMS_PER_LINE: usize = 6;

pub fn export_lp(m: &MiqpModel) -> String {
    let names: Vec<String> = m.names.iter().map(|n| sanitize(n)).collect();
    let mut out = String::new();
    out.push_str("\\ scert MIQP export\n");
    let _ = writeln!(
        out,
        "\\ variables: {} ({} continuous, {} binary)",
        m.n_vars(),
        m.n_cont,
        m.n_bin
    );
    out.push_str("Minimize\n obj:");

    let mut terms = Vec::new();
    for (i, &c) in m.lin_cost.iter().enumerate() {
        if c != 0.0 {
            terms.push(term(c, &names[i], terms.is_empty()));
        }
    }
    let quad: Vec<String> = m
        .quad_diag
        .iter()
        .enumerate()
        .filter(|(_, q)| **q != 0.0)
        .enumerate()
        .map(|(k, (i, &q))| term(2.0 * q, &format!("{} ^2", names[i]), k == 0))
        .collect();
    if terms.is_empty() && quad.is_empty() {
        out.push_str(" 0");
    }
    write_terms(&mut out, &terms);
    if !quad.is_empty() {
        out.push_str(if terms.is_empty() { " [" } else { " + [" });
        write_terms(&mut out, &quad);
        out.push_str(" ] / 2");
    }
    out.push('\n');

    out.push_str("Subject To\n");
    let mut used = HashSet::new();
    for (r, row) in m.rows.iter().enumerate() {
        let mut name = if row.tag.is_empty() {
            format!("r{r}")
        } else {
            sanitize(&row.tag)
        };
        if !used.insert(name.clone()) {
            name = format!("{name}_{r}");
            used.insert(name.clone());
        }
        let _ = write!(out, " {name}:");
        let terms: Vec<String> = row
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &(i, a))| term(a, &names[i], k == 0))
            .collect();
        if terms.is_empty() {
            out.push_str(" 0 ");
            out.push_str(&names.first().cloned().unwrap_or_default());
        }
        write_terms(&mut out, &terms);
        let sym = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {sym} {}", row.rhs);
    }

    out.push_str("Bounds\n");
    for (i, &(l, u)) in m.bounds.iter().enumerate() {
        let n = &names[i];
        if m.is_binary(i) {
            if (l, u) != (0.0, 1.0) {
                let _ = writeln!(out, " {l} <= {n} <= {u}");
            }
            continue;
        }
        let _ = match (l.is_finite(), u.is_finite()) {
            (true, true) => writeln!(out, " {l} <= {n} <= {u}"),
            (true, false) => writeln!(out, " {n} >= {l}"),
            (false, true) => writeln!(out, " -inf <= {n} <= {u}"),
            (false, false) => writeln!(out, " {n} free"),
        };
    }

    out.push_str("Binaries\n");
    for i in m.binary_range() {
        let _ = writeln!(out, " {}", names[i]);
    }
    out.push_str("End\n");
    out
}

fn term(coef: f64, var: &str, first: bool) -> String {
    let sign = if coef < 0.0 { "-" } else { "+" };
    let mag = coef.abs();
    match (first, sign) {
        (true, "+") => format!("{mag} {var}"),
        (true, _) => format!("- {mag} {var}"),
        _ => format!("{sign} {mag} {var}"),
    }
}

fn write_terms(out: &mut String, terms: &[String]) {
    for (k, t) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        out.push(' ');
        out.push_str(t);
    }
}

/// LP names may not start with a digit, a period or the letter `e`, so such
/// names get a leading `_`. Characters outside the permitted set become `_`.
fn sanitize(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.[]{}!\"#$%&()/,;?@'`~|".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty()
        || s.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E')
    {
        s.insert(0, '_');
    }
    s
}
