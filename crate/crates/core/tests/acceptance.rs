use qubolin_core::harness::{run_battery, BatteryOptions, CriterionResult};

fn criterion(id: u8) -> CriterionResult {
    let opts = BatteryOptions {
        only: vec![id],
        ..Default::default()
    };
    let result = run_battery(&opts).pop().expect("criterion exists");
    println!("{result} ({} ms)", result.elapsed_ms);
    for line in &result.details {
        println!("    {line}");
    }
    result
}

fn assert_criterion(id: u8) {
    let result = criterion(id);
    assert!(result.passed(), "criterion {id} failed:\n{}", result.details.join("\n"));
}

#[test]
fn criterion_01_counterexample_regression() {
    assert_criterion(1);
}

#[test]
fn criterion_02_lp_fixtures() {
    assert_criterion(2);
}

#[test]
fn criterion_03_oracle_equivalence() {
    assert_criterion(3);
}

#[test]
fn criterion_04_lp_equivalence() {
    assert_criterion(4);
}

#[test]
fn criterion_05_dual_weight_equality() {
    assert_criterion(5);
}

#[test]
fn criterion_06_precision() {
    assert_criterion(6);
}

#[test]
fn criterion_07_constraint_counts() {
    assert_criterion(7);
}

#[test]
fn criterion_08_balanced_generator() {
    assert_criterion(8);
}

#[test]
fn criterion_09_export_fidelity() {
    assert_criterion(9);
}

#[test]
fn criterion_10_declared_not_reproduced() {
    let result = criterion(10);
    assert_eq!(result.status, qubolin_core::harness::CriterionStatus::Declared);
}
