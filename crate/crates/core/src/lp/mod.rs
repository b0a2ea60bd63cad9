//! LP relaxations and their dual values.

pub(crate) mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::builder::weight_kind_of;
use crate::formulations::weights::{WeightMode, WeightSet};
use crate::model::{MilpModel, RowCode};
use simplex::{Outcome, Simplex};

/// Absolute tolerance for comparing reported LP values.
pub const REPORT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn name(self) -> &'static str {
        match self {
            LpStatus::Optimal => "OPTIMAL",
            LpStatus::Infeasible => "INFEASIBLE",
            LpStatus::Unbounded => "UNBOUNDED",
        }
    }
}

/// Outcome of an LP solve. Vectors are aligned with the model's columns
/// and rows. Under maximization the dual of a `<=` row is nonnegative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Hash of the final basis; equal inputs give equal fingerprints.
    pub basis_fingerprint: String,
    pub iterations: usize,
}

impl LpResult {
    pub(crate) fn from_state(status: LpStatus, s: &Simplex) -> Self {
        let optimal = status == LpStatus::Optimal;
        Self {
            status,
            objective: if optimal { s.objective() } else { f64::NAN },
            primal: s.primal(),
            duals: if optimal { s.duals() } else { vec![0.0; s.rows()] },
            reduced_costs: if optimal { s.reduced_costs() } else { vec![0.0; s.structural()] },
            basis_fingerprint: s.basis_fingerprint(),
            iterations: s.iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Value of the column named `name`.
    pub fn value_of(&self, model: &MilpModel, name: &str) -> Option<f64> {
        model.variables.iter().position(|v| v.name == name).map(|k| self.primal[k])
    }

    /// Dual of the row named `name`.
    pub fn dual_of(&self, model: &MilpModel, name: &str) -> Option<f64> {
        model.constraints.iter().position(|c| c.name == name).map(|r| self.duals[r])
    }

    /// `|objective − (bᵀy + Σ_j d_j x_j)|`, relative to `max(1, |objective|)`.
    pub fn duality_gap(&self, model: &MilpModel) -> f64 {
        let dual_obj: f64 = model.constraints.iter().zip(&self.duals).map(|(c, y)| c.rhs * y).sum::<f64>()
            + self.reduced_costs.iter().zip(&self.primal).map(|(d, x)| d * x).sum::<f64>();
        (self.objective - dual_obj).abs() / self.objective.abs().max(1.0)
    }
}

/// Solves the LP relaxation of `model` (integrality is ignored).
pub fn solve_lp(model: &MilpModel) -> Result<LpResult> {
    model.validate()?;
    let mut s = Simplex::new(model);
    let status = match s.solve_primal()? {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Infeasible => LpStatus::Infeasible,
        Outcome::Unbounded => LpStatus::Unbounded,
    };
    Ok(LpResult::from_state(status, &s))
}

/// Duals of the rows whose code is in `codes`, keyed by the row's pair and
/// stored under the weight kind its block would use when aggregated.
///
/// Tiny negative duals from round-off are clamped to zero.
pub fn extract_duals(model: &MilpModel, res: &LpResult, codes: &[RowCode]) -> Result<WeightSet> {
    if !res.is_optimal() {
        return Err(Error::NotOptimal(res.status.name().to_string()));
    }
    let mut w = WeightSet::with_mode(WeightMode::DualExact);
    for (c, &y) in model.constraints.iter().zip(&res.duals) {
        if !codes.contains(&c.tag.code) {
            continue;
        }
        let (Some(kind), Some(i), Some(j)) = (weight_kind_of(c.tag.code), c.tag.i, c.tag.j) else {
            continue;
        };
        w.set(kind, i, j, if y.abs() <= 1e-9 { 0.0 } else { y.max(0.0) });
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{build, build_with, BuildOptions, Family, ModelId};
    use crate::instances::fixtures;
    use crate::model::{ModelMeta, RowTag, Sense, VarRole, Variable};
    use crate::qubo::QuboInstance;

    fn lp(id: &str, inst: &QuboInstance) -> LpResult {
        let opts = BuildOptions {
            research_asymmetric: true,
            ..Default::default()
        };
        let m = build_with(&id.parse().unwrap(), inst, &WeightSet::unit(), &opts).unwrap();
        solve_lp(&m).unwrap()
    }

    #[test]
    fn gw_on_ex8() {
        let inst = fixtures::ex8(1);
        let m = build(&ModelId::basic(Family::GW), &inst, &WeightSet::unit()).unwrap();
        let r = solve_lp(&m).unwrap();
        assert!(r.is_optimal());
        assert!((r.objective - 1.0).abs() < 1e-9);
        let ones = vec![1.0; 4];
        assert!(m.max_violation(&ones) <= 0.0);
        assert!((m.objective_value(&ones) - r.objective).abs() < 1e-9);
        assert!(r.duality_gap(&m) < 1e-7);
        for c in m.constraints.iter().filter(|c| c.tag.code == RowCode::Type1) {
            assert!(r.dual_of(&m, &c.name).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn dw_on_ex8_is_one_plus_half_alpha() {
        assert!((lp("DW", &fixtures::ex8(1)).objective - 1.5).abs() < 1e-9);
        assert!((lp("DW", &fixtures::ex8(2)).objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_example() {
        let inst = fixtures::ex7(1);
        assert!(lp("FT", &inst).objective.abs() < 1e-9);
        assert!((lp("GW", &inst).objective - 0.5).abs() < 1e-9);
        assert!((lp("PK", &inst).objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_variable() {
        let inst = QuboInstance::from_integers(&[vec![0]], &[5]).unwrap();
        assert!((lp("GW", &inst).objective - 5.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = MilpModel::new(ModelMeta::default());
        m.add_variable(Variable::continuous(VarRole::X(0), 0.0, 1.0), 1.0);
        m.add_constraint(RowTag::other(), vec![(0, 1.0)], Sense::Ge, 2.0);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);

        let mut m = MilpModel::new(ModelMeta::default());
        m.add_variable(Variable::continuous(VarRole::X(0), 0.0, f64::INFINITY), 1.0);
        m.add_variable(Variable::continuous(VarRole::X(1), 0.0, f64::INFINITY), 0.0);
        m.constraints.push(crate::model::Constraint {
            name: "R1".into(),
            terms: vec![(0, 1.0), (1, -1.0)],
            sense: Sense::Le,
            rhs: 1.0,
            tag: RowTag::other(),
        });
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_columns() {
        let mut m = MilpModel::new(ModelMeta::default());
        m.add_variable(Variable::continuous(VarRole::X(0), f64::NEG_INFINITY, f64::INFINITY), 1.0);
        m.add_variable(Variable::continuous(VarRole::X(1), -3.0, 4.0), 2.0);
        m.constraints.push(crate::model::Constraint {
            name: "E".into(),
            terms: vec![(0, 1.0), (1, 1.0)],
            sense: Sense::Eq,
            rhs: 2.0,
            tag: RowTag::other(),
        });
        let r = solve_lp(&m).unwrap();
        assert!(r.is_optimal());
        assert!((r.objective - 6.0).abs() < 1e-9);
        assert!((r.primal[1] - 4.0).abs() < 1e-9);
        assert!((r.duals[0] - 1.0).abs() < 1e-9);
        assert!(r.duality_gap(&m) < 1e-9);
    }

    #[test]
    fn all_slack_optimum_has_zero_duals() {
        let inst = QuboInstance::from_integers(&[vec![0, -1], vec![-1, 0]], &[-1, -2]).unwrap();
        let m = build(&ModelId::basic(Family::GW), &inst, &WeightSet::unit()).unwrap();
        let r = solve_lp(&m).unwrap();
        assert!(r.objective.abs() < 1e-12);
        assert!(r.duals.iter().all(|&y| y == 0.0));
        let w = extract_duals(&m, &r, &[RowCode::Type1]).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.entries(crate::formulations::WeightKind::Alpha).all(|(_, v)| v == 0.0));
    }

    #[test]
    fn extract_requires_optimal() {
        let mut m = MilpModel::new(ModelMeta::default());
        m.add_variable(Variable::continuous(VarRole::X(0), 0.0, 1.0), 1.0);
        m.add_constraint(RowTag::other(), vec![(0, 1.0)], Sense::Ge, 2.0);
        let r = solve_lp(&m).unwrap();
        assert!(matches!(extract_duals(&m, &r, &[RowCode::Type1]), Err(Error::NotOptimal(_))));
    }

    #[test]
    fn deterministic_fingerprint() {
        let inst = fixtures::ex2();
        let a = lp("FT", &inst);
        let b = lp("FT", &inst);
        assert_eq!(a.basis_fingerprint, b.basis_fingerprint);
        assert_eq!(a, b);
    }
}
