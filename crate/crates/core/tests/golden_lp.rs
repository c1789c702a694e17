mod common;

use std::path::PathBuf;

use scert_core::miqp::{export_lp, MiqpModel};
use scert_core::ucp::{build_miqp, UcInstance};

/// Compares against the frozen file; `SCERT_BLESS=1` rewrites it instead.
fn check_golden(name: &str, text: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("SCERT_BLESS").is_some() {
        std::fs::write(&path, text).unwrap();
        return;
    }
    let frozen =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        frozen == text,
        "{} differs from the export:\n{text}",
        path.display()
    );
}

#[test]
fn tiny_uc_golden() {
    let m = build_miqp(&common::tiny_instance(), &[-3.0, -4.0]).unwrap();
    let lp = export_lp(&m);
    assert!(lp.starts_with("\\ scert MIQP export\n\\ variables: 8 (2 continuous, 6 binary)\n"));
    check_golden("tiny_uc.lp", &lp);
}

#[test]
fn four_unit_golden() {
    let xi: Vec<f64> = common::reference_demand().iter().map(|d| -d).collect();
    let m = build_miqp(&UcInstance::four_unit(), &xi).unwrap();
    let lp = export_lp(&m);
    assert!(lp.contains("\\ variables: 480 (96 continuous, 384 binary)\n"));
    check_golden("four_unit.lp", &lp);
}

#[test]
fn sections_appear_in_order() {
    let xi: Vec<f64> = common::reference_demand().iter().map(|d| -d).collect();
    let lp = export_lp(&build_miqp(&UcInstance::four_unit(), &xi).unwrap());
    let pos: Vec<usize> = [
        "\nMinimize\n",
        "\nSubject To\n",
        "\nBounds\n",
        "\nBinaries\n",
        "\nEnd\n",
    ]
    .iter()
    .map(|s| lp.find(s).unwrap_or_else(|| panic!("missing {s:?}")))
    .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    let binaries: Vec<&str> = lp
        .split("\nBinaries\n")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .filter(|w| *w != "End")
        .collect();
    assert_eq!(binaries.len(), 384);
    assert!(binaries.iter().all(|b| !b.starts_with("P_")));
}

#[test]
fn every_row_is_named_and_unique() {
    let m = build_miqp(&common::tiny_instance(), &[-3.0, -4.0]).unwrap();
    let lp = export_lp(&m);
    let body = lp
        .split("Subject To\n")
        .nth(1)
        .unwrap()
        .split("Bounds\n")
        .next()
        .unwrap();
    let names: Vec<&str> = body
        .lines()
        .filter(|l| l.starts_with(' ') && l.contains(':'))
        .map(|l| l.trim().split(':').next().unwrap())
        .collect();
    assert_eq!(names.len(), m.rows.len());
    let mut sorted = names.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len());
}

#[test]
fn empty_model_exports_empty_sections() {
    assert_eq!(
        export_lp(&MiqpModel::new(0, 0)),
        "\\ scert MIQP export\n\\ variables: 0 (0 continuous, 0 binary)\nMinimize\n obj: 0\nSubject To\nBounds\nBinaries\nEnd\n"
    );
}
