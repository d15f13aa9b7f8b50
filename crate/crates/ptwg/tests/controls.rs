//! The suite must notice a wrong operator and an under-resolved quadrature.

use ptwg::validate::{run_criterion, run_validate, ValidateOptions};
use ptwg_core::fd::BoundarySign;

#[test]
fn flipped_boundary_sign_fails_transverse_residual() {
    let opts = ValidateOptions {
        boundary_sign: BoundarySign::OutwardNormal,
        ..Default::default()
    };
    let r = run_criterion(2, &opts);
    assert!(!r.passed, "{r}");
    assert!(run_criterion(2, &ValidateOptions::default()).passed);
}

#[test]
fn four_gram_nodes_fail_biorthonormality() {
    let opts = ValidateOptions {
        gram_nodes: 4,
        ..Default::default()
    };
    let r = run_criterion(1, &opts);
    assert!(!r.passed, "{r}");
}

#[test]
fn selected_criteria_only() {
    let opts = ValidateOptions {
        only: vec![1, 2],
        ..Default::default()
    };
    let rep = run_validate(&opts);
    assert_eq!(rep.criteria.iter().map(|c| c.id).collect::<Vec<_>>(), [1, 2]);
    assert!(rep.all_passed());
    let table = rep.to_string();
    assert!(table.contains("[PASS]  1") && table.ends_with("2/2 criteria passed"));
}
