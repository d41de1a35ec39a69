use std::collections::BTreeSet;

use vesicle_core::surface::{DomainSpec, MaterialParams};
use vesicle_core::verify::*;

fn domain() -> DomainSpec {
    DomainSpec::new(1.0, 4.0).unwrap()
}

#[test]
fn default_suite_passes_and_is_ordered() {
    let results = check_all(&MaterialParams::default(), &domain(), 0);
    assert_eq!(results.len(), 10);
    let names: Vec<&str> = results.iter().map(|r| r.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for r in &results {
        assert!(r.passed, "{} failed: {:e} > {:e} {:?}", r.name, r.defect, r.tolerance, r.context);
        assert_eq!(r.passed, r.defect <= r.tolerance);
        assert!(r.context.contains_key("claim"));
    }
    let claims: BTreeSet<_> = results.iter().map(|r| r.context["claim"].to_string()).collect();
    assert_eq!(claims.len(), results.len());
}

#[test]
fn suite_is_deterministic() {
    let p = MaterialParams::default();
    let a = to_json(&check_all(&p, &domain(), 3));
    let b = to_json(&check_all(&p, &domain(), 3));
    assert_eq!(a, b);
    assert!(a.trim_start().starts_with('['));
}

#[test]
fn other_seeds_pass() {
    for seed in 1..5 {
        for r in check_all(&MaterialParams::default(), &domain(), seed) {
            assert!(r.passed, "seed {seed}: {} {:e}", r.name, r.defect);
        }
    }
}

#[test]
fn stiffer_membrane_viscosity_keeps_coercivity_and_dissipation() {
    let p = MaterialParams { mu: 0.1, ..Default::default() };
    for check in [check_infsup, check_weak_duality, check_du_identity, check_conservation] {
        let r = check(&p, &domain(), 0);
        assert!(r.passed, "{} {:e}", r.name, r.defect);
    }
}

#[test]
fn invalid_input_is_a_failed_result() {
    let p = MaterialParams { kappa: -1.0, ..Default::default() };
    let r = check_conservation(&p, &domain(), 0);
    assert!(!r.passed && r.defect.is_infinite());
    assert!(r.context.contains_key("error"));
}

#[test]
fn slope_of_exact_power_law() {
    let ls: Vec<usize> = (8..=32).collect();
    let g: Vec<f64> = ls.iter().map(|l| 2.5 * (*l as f64).powi(3)).collect();
    assert!((loglog_slope(&ls, &g) - 3.0).abs() < 1e-12);
}
