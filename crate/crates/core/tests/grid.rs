use qubolin_core::formulations::catalog;
use qubolin_core::harness::{emit_csv, parse_csv, random_suite};
use qubolin_core::qubo::to_f64;
use qubolin_core::{brute_force_opt, run_grid, GridOptions, WeightMode};

#[test]
fn every_valid_model_agrees_on_a_random_instance() {
    let inst = random_suite(5, 77).into_iter().find(|(_, i)| i.n() == 8).unwrap();
    let truth = to_f64(brute_force_opt(&inst.1).unwrap().value);
    let rows = run_grid(&[inst], &catalog(), &[WeightMode::Unit, WeightMode::DualMilpSafe], &GridOptions::default());
    assert_eq!(rows.len(), 2 * catalog().len());
    for r in &rows {
        assert_eq!(r.error, None, "{} {}", r.model, r.weight_mode);
        let z = r.model_objective.unwrap();
        assert!((z - truth).abs() < 1e-6, "{} {}: {z} vs {truth}", r.model, r.weight_mode);
        assert!(r.lp_value.unwrap() >= z - 1e-6);
        assert!(z >= r.recomputed.as_deref().unwrap().parse::<f64>().unwrap() - 1e-6);
        assert!(r.gap.unwrap() >= -1e-6);
        assert_eq!(r.constraints, r.expected_constraints, "{}", r.model);
    }
}

#[test]
fn ordering_is_instance_model_mode() {
    let instances = random_suite(2, 5);
    let models = catalog()[..3].to_vec();
    let modes = [WeightMode::Unit, WeightMode::DualExact];
    let rows = run_grid(&instances, &models, &modes, &GridOptions::default());
    let keys: Vec<(String, String, String)> =
        rows.iter().map(|r| (r.instance.clone(), r.model.clone(), r.weight_mode.clone())).collect();
    let mut expected = Vec::new();
    for (name, _) in &instances {
        for m in &models {
            for k in &modes {
                expected.push((name.clone(), m.name(), k.name().to_string()));
            }
        }
    }
    assert_eq!(keys, expected);
    assert_eq!(parse_csv(&emit_csv(&rows).unwrap()).unwrap(), rows);
}

#[test]
fn forced_stop_grid_records_heuristic_values() {
    let instances = random_suite(5, 9).into_iter().skip(4).collect::<Vec<_>>();
    let mut opts = GridOptions::default();
    opts.milp.stop_after_first_incumbent = true;
    let rows = run_grid(&instances, &catalog(), &[WeightMode::Unit], &opts);
    for r in &rows {
        assert_eq!(r.error, None);
        assert!(r.milp_status == "OPTIMAL" || r.milp_status == "FEASIBLE_TIMEOUT", "{}", r.milp_status);
        assert!(r.best_bound.unwrap() >= r.model_objective.unwrap() - 1e-6);
    }
}
