use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formulations::builder::{build_disaggregated, model_spec, Block};
use crate::formulations::{build_with, BuildOptions, Family, ModelId, WeightSet};
use crate::instances::generate_uniform;
use crate::lp::{extract_duals, solve_lp, LpStatus};
use crate::model::{MilpModel, RowCode};
use crate::qubo::QuboInstance;

const TOL: f64 = 1e-6;

/// One assertion of a theorem suite. `margin` is the slack of the
/// inequality being checked; it is negative exactly when the check fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub instance: String,
    pub subject: String,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
    pub error: Option<String>,
}

impl CheckRow {
    fn equal(instance: &str, subject: &str, check: &str, lhs: f64, rhs: f64) -> Self {
        Self::with_margin(instance, subject, check, lhs, rhs, TOL - (lhs - rhs).abs())
    }

    /// `lhs >= rhs` up to the tolerance.
    fn at_least(instance: &str, subject: &str, check: &str, lhs: f64, rhs: f64) -> Self {
        Self::with_margin(instance, subject, check, lhs, rhs, lhs - rhs + TOL)
    }

    fn with_margin(instance: &str, subject: &str, check: &str, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self {
            instance: instance.to_string(),
            subject: subject.to_string(),
            check: check.to_string(),
            lhs,
            rhs,
            margin,
            passed: margin >= 0.0,
            error: None,
        }
    }

    fn failed(instance: &str, subject: &str, check: &str, err: String) -> Self {
        Self {
            instance: instance.to_string(),
            subject: subject.to_string(),
            check: check.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            passed: false,
            error: Some(err),
        }
    }
}

/// `count` seeded instances with `n` cycling through `4..=10`, coefficients
/// in `[-20, 20]` and densities cycling through 1.0, 0.7 and 0.5.
pub fn random_suite(count: usize, base_seed: u64) -> Vec<(String, QuboInstance)> {
    (0..count)
        .map(|k| {
            let seed = base_seed + k as u64;
            let n = 4 + k % 7;
            let density = [1.0, 0.7, 0.5][k % 3];
            let inst = generate_uniform(n, (-20, 20), (-20, 20), density, seed).expect("valid generator settings");
            (format!("rand{k:02}-n{n}-s{seed}"), inst)
        })
        .collect()
}

/// The aggregated models covered by the dual-weight equality check.
pub fn theorem_aggregations() -> Vec<ModelId> {
    [
        "DW(a)", "GW(a)", "FT(a)", "PK(a)", "PK(*,b)", "FT(*,g,*)", "FT(*,*,t)", "GW(*,g)", "GW(*,d)", "GW(*,g+d)",
        "GW(a,g+d)", "FT(a,g,*)", "PK(a,b)",
    ]
    .iter()
    .map(|s| s.parse().expect("catalog name"))
    .collect()
}

fn pair_code(b: Block) -> Option<RowCode> {
    match b {
        Block::Type1(_) => Some(RowCode::Type1),
        Block::Diagonal(_) => Some(RowCode::Diagonal),
        Block::RowUpper(_) => Some(RowCode::RowUpper),
        Block::ColUpper(_) => Some(RowCode::ColUpper),
        Block::PairSum(_) => Some(RowCode::PairSum),
        Block::Symmetry(_) => Some(RowCode::Symmetry),
        _ => None,
    }
}

/// Codes of the pair rows that the aggregated blocks of `id` sum.
pub fn aggregated_row_codes(id: &ModelId) -> Vec<RowCode> {
    let mut codes: Vec<RowCode> = model_spec(id)
        .blocks
        .into_iter()
        .filter(|b| b.is_aggregated())
        .flat_map(|b| b.disaggregated())
        .filter_map(pair_code)
        .collect();
    codes.sort();
    codes.dedup();
    codes
}

fn lp_options(inst: &QuboInstance) -> BuildOptions {
    BuildOptions {
        lp_study: true,
        research_asymmetric: inst.is_asymmetric(),
        ..Default::default()
    }
}

fn lp_value(m: &MilpModel) -> Result<f64> {
    let r = solve_lp(m)?;
    match r.status {
        LpStatus::Optimal => Ok(r.objective),
        s => Err(crate::error::Error::NotOptimal(s.name().to_string())),
    }
}

/// Exact dual weights for `id`: the optimal duals of the base model's rows
/// that `id` aggregates.
pub fn dual_weights(id: &ModelId, inst: &QuboInstance) -> Result<WeightSet> {
    let base = build_disaggregated(id, inst, &lp_options(inst))?;
    let r = solve_lp(&base)?;
    extract_duals(&base, &r, &aggregated_row_codes(id))
}

fn unit_lp(id: &ModelId, inst: &QuboInstance) -> Result<f64> {
    lp_value(&build_with(id, inst, &WeightSet::unit(), &lp_options(inst))?)
}

/// Per instance: `GW = FT`, `GW = PK`, `GW <= DW` and `M = OR-M` for each
/// family, on LP relaxation values.
pub fn lp_equivalence_suite(instances: &[(String, QuboInstance)]) -> Vec<CheckRow> {
    instances
        .par_iter()
        .flat_map_iter(|(name, inst)| {
            let values: Result<Vec<(f64, f64)>> = [Family::DW, Family::GW, Family::FT, Family::PK]
                .iter()
                .map(|&f| Ok((unit_lp(&ModelId::basic(f), inst)?, unit_lp(&ModelId::basic(f).or(), inst)?)))
                .collect();
            let rows = match values {
                Err(e) => vec![CheckRow::failed(name, "all", "lp", e.to_string())],
                Ok(v) => {
                    let (dw, gw, ft, pk) = (v[0].0, v[1].0, v[2].0, v[3].0);
                    let mut rows = vec![
                        CheckRow::equal(name, "GW,FT", "GW=FT", gw, ft),
                        CheckRow::equal(name, "GW,PK", "GW=PK", gw, pk),
                        CheckRow::at_least(name, "GW,DW", "GW<=DW", dw, gw),
                    ];
                    for (f, (m, or)) in ["DW", "GW", "FT", "PK"].iter().zip(&v) {
                        rows.push(CheckRow::equal(name, f, "M=OR-M", *m, *or));
                    }
                    rows
                }
            };
            rows.into_iter()
        })
        .collect()
}

/// For each aggregated model and instance: the LP with exact dual weights
/// equals the base LP, and the LPs with unit and MILP-safe weights are no
/// smaller than it.
pub fn dual_weight_equality_suite(instances: &[(String, QuboInstance)], ids: &[ModelId]) -> Vec<CheckRow> {
    let cells: Vec<(&ModelId, &(String, QuboInstance))> =
        ids.iter().flat_map(|id| instances.iter().map(move |c| (id, c))).collect();
    cells
        .par_iter()
        .flat_map_iter(|&(id, (name, inst))| {
            let subject = id.name();
            let run = || -> Result<Vec<CheckRow>> {
                let opts = lp_options(inst);
                let base = lp_value(&build_disaggregated(id, inst, &opts)?)?;
                let exact = dual_weights(id, inst)?;
                let agg = lp_value(&build_with(id, inst, &exact, &opts)?)?;
                let unit = unit_lp(id, inst)?;
                let safe = lp_value(&build_with(id, inst, &exact.milp_safe(), &opts)?)?;
                Ok(vec![
                    CheckRow::equal(name, &subject, "dual-exact=base", agg, base),
                    CheckRow::at_least(name, &subject, "unit>=base", unit, base),
                    CheckRow::at_least(name, &subject, "dual-safe>=base", safe, base),
                ])
            };
            run()
                .unwrap_or_else(|e| vec![CheckRow::failed(name, &subject, "lp", e.to_string())])
                .into_iter()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::Agg2;
    use crate::instances::fixtures;

    #[test]
    fn suite_is_seeded() {
        let a = random_suite(10, 5);
        assert_eq!(a, random_suite(10, 5));
        assert_eq!(a[0].1.n(), 4);
        assert_eq!(a[6].1.n(), 10);
        assert_eq!(a[7].1.n(), 4);
    }

    #[test]
    fn codes_of_aggregations() {
        let id: ModelId = "GW(a,g+d)".parse().unwrap();
        assert_eq!(aggregated_row_codes(&id), vec![RowCode::Type1, RowCode::RowUpper, RowCode::ColUpper]);
        assert!(aggregated_row_codes(&ModelId::basic(Family::GW)).is_empty());
        assert_eq!(theorem_aggregations().len(), 13);
    }

    #[test]
    fn ex8_equivalences() {
        let rows = lp_equivalence_suite(&[("ex8".to_string(), fixtures::ex8(1))]);
        assert_eq!(rows.len(), 7);
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
        let dw = rows.iter().find(|r| r.check == "GW<=DW").unwrap();
        assert!((dw.lhs - 1.5).abs() < 1e-9 && (dw.rhs - 1.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_instance_breaks_gw_ft() {
        let rows = lp_equivalence_suite(&[("ex7".to_string(), fixtures::ex7(1))]);
        let r = rows.iter().find(|r| r.check == "GW=FT").unwrap();
        assert!(!r.passed);
        assert!(((r.lhs - r.rhs) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn dual_equality_on_random_n8() {
        let inst = vec![("n8".to_string(), generate_uniform(8, (-20, 20), (-20, 20), 1.0, 11).unwrap())];
        let id = ModelId::basic(Family::GW).alpha().with(Agg2::GammaPlusDelta);
        let rows = dual_weight_equality_suite(&inst, &[id]);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
    }

    #[test]
    fn zero_duals_make_safe_weights_deteriorate() {
        let inst = QuboInstance::from_integers(&[vec![0, -3], vec![-3, 0]], &[-1, -2]).unwrap();
        let id: ModelId = "GW(*,g)".parse().unwrap();
        let w = dual_weights(&id, &inst).unwrap();
        assert!(w.entries(crate::formulations::WeightKind::Gamma).all(|(_, v)| v == 0.0));
        let rows = dual_weight_equality_suite(&[("neg".to_string(), inst)], &[id]);
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
    }
}
