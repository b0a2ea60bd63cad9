use proptest::prelude::*;
use qubolin_core::formulations::{build_with, catalog, expected_constraint_count, BuildOptions, Family, ModelId};
use qubolin_core::harness::{dual_weight_equality_suite, theorem_aggregations};
use qubolin_core::instances::{load_canonical, parse_orlib, save_canonical, write_orlib};
use qubolin_core::model::{export_lp, export_mps, import_lp, import_mps};
use qubolin_core::qubo::to_f64;
use qubolin_core::{
    brute_force_opt, count_general_constraints, index_sets, qubo_value, solve_lp, solve_milp, MilpOptions, MilpStatus,
    QuboInstance, WeightSet,
};

fn instance(max_n: usize) -> impl Strategy<Value = QuboInstance> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(-20i64..=20, n * (n - 1) / 2),
            prop::collection::vec(-20i64..=20, n),
        )
            .prop_map(move |(upper, c)| {
                let mut q = vec![vec![0i64; n]; n];
                let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
                for ((i, j), v) in pairs.zip(upper) {
                    q[i][j] = v;
                    q[j][i] = v;
                }
                QuboInstance::from_integers(&q, &c).unwrap()
            })
    })
}

fn with_permutation(max_n: usize) -> impl Strategy<Value = (QuboInstance, Vec<usize>)> {
    instance(max_n).prop_flat_map(|inst| {
        let n = inst.n();
        (Just(inst), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

fn lp(id: &ModelId, inst: &QuboInstance) -> f64 {
    let m = build_with(id, inst, &WeightSet::unit(), &BuildOptions::default()).unwrap();
    solve_lp(&m).unwrap().objective
}

fn milp_optimum(id: &ModelId, inst: &QuboInstance) -> f64 {
    let m = build_with(id, inst, &WeightSet::unit(), &BuildOptions::default()).unwrap();
    let r = solve_milp(&m, inst, &MilpOptions::default()).unwrap();
    assert_eq!(r.status, MilpStatus::Optimal);
    r.model_objective.unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brute_force_is_permutation_invariant((inst, perm) in with_permutation(7)) {
        let a = brute_force_opt(&inst).unwrap();
        let b = brute_force_opt(&inst.permute(&perm)).unwrap();
        prop_assert_eq!(a.value, b.value);
        for x in &b.argmax {
            let mut back = vec![0u8; x.len()];
            for (pos, &orig) in perm.iter().enumerate() {
                back[orig] = x[pos];
            }
            prop_assert_eq!(qubo_value(&inst, &back).unwrap(), a.value);
        }
    }

    #[test]
    fn brute_force_dominates_every_point(inst in instance(6), bits in any::<u64>()) {
        let best = brute_force_opt(&inst).unwrap();
        let x: Vec<u8> = (0..inst.n()).map(|i| ((bits >> i) & 1) as u8).collect();
        prop_assert!(qubo_value(&inst, &x).unwrap() <= best.value);
        prop_assert_eq!(qubo_value(&inst, &best.argmax[0]).unwrap(), best.value);
    }

    #[test]
    fn lp_relaxations_agree(inst in instance(7)) {
        let gw = lp(&ModelId::basic(Family::GW), &inst);
        prop_assert!((gw - lp(&ModelId::basic(Family::FT), &inst)).abs() <= 1e-6);
        prop_assert!((gw - lp(&ModelId::basic(Family::PK), &inst)).abs() <= 1e-6);
        prop_assert!(gw <= lp(&ModelId::basic(Family::DW), &inst) + 1e-6);
        for f in [Family::DW, Family::GW, Family::FT, Family::PK] {
            prop_assert!((lp(&ModelId::basic(f), &inst) - lp(&ModelId::basic(f).or(), &inst)).abs() <= 1e-6);
        }
    }

    #[test]
    fn constraint_counts_match(inst in instance(7), pick in any::<prop::sample::Index>()) {
        let models = catalog();
        let id = pick.get(&models);
        let m = build_with(id, &inst, &WeightSet::unit(), &BuildOptions::default()).unwrap();
        prop_assert_eq!(count_general_constraints(&m), expected_constraint_count(id, &index_sets(&inst)));
    }

    #[test]
    fn text_formats_round_trip(inst in instance(8)) {
        prop_assert_eq!(load_canonical(&save_canonical(&inst)).unwrap(), inst.clone());
        let back = parse_orlib(&write_orlib(std::slice::from_ref(&inst))).unwrap();
        prop_assert_eq!(back, vec![inst]);
    }

    #[test]
    fn exports_preserve_the_lp(inst in instance(5), pick in any::<prop::sample::Index>()) {
        let models = catalog();
        let id = pick.get(&models);
        let m = build_with(id, &inst, &WeightSet::unit(), &BuildOptions::default()).unwrap();
        let direct = solve_lp(&m).unwrap().objective;
        let via_lp = solve_lp(&import_lp(&export_lp(&m).unwrap()).unwrap()).unwrap().objective;
        let via_mps = solve_lp(&import_mps(&export_mps(&m).unwrap()).unwrap()).unwrap().objective;
        prop_assert!((direct - via_lp).abs() <= 1e-6);
        prop_assert!((direct - via_mps).abs() <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn milp_matches_brute_force(inst in instance(6), pick in any::<prop::sample::Index>()) {
        let models = catalog();
        let id = pick.get(&models);
        let truth = to_f64(brute_force_opt(&inst).unwrap().value);
        prop_assert!((milp_optimum(id, &inst) - truth).abs() <= 1e-6, "{}", id);
    }

    #[test]
    fn milp_is_permutation_invariant((inst, perm) in with_permutation(6)) {
        let id = ModelId::basic(Family::PK).or();
        prop_assert!((milp_optimum(&id, &inst) - milp_optimum(&id, &inst.permute(&perm))).abs() <= 1e-6);
    }

    #[test]
    fn root_bound_dominates_optimum(inst in instance(6)) {
        let id = ModelId::basic(Family::GW);
        let m = build_with(&id, &inst, &WeightSet::unit(), &BuildOptions::default()).unwrap();
        let r = solve_milp(&m, &inst, &MilpOptions::default()).unwrap();
        let z = r.model_objective.unwrap();
        prop_assert!(r.root_bound >= z - 1e-6);
        prop_assert!(z >= to_f64(r.recomputed.unwrap()) - 1e-6);
        prop_assert!((r.root_bound - lp(&id, &inst)).abs() <= 1e-6);
    }

    #[test]
    fn dual_weights_preserve_the_lp(inst in instance(7), pick in any::<prop::sample::Index>()) {
        let ids = theorem_aggregations();
        let id = *pick.get(&ids);
        let rows = dual_weight_equality_suite(&[("p".to_string(), inst)], &[id]);
        prop_assert!(rows.iter().all(|r| r.passed), "{:?}", rows);
    }
}
