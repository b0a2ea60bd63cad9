use super::id::{Agg1, Agg2, Family, ModelId, Restriction, Variant};
use crate::qubo::IndexSets;

/// Size statistics of an instance's sparsity pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatternStats {
    /// `Σ |R_i|`
    pub pairs: usize,
    /// `Σ |R_i^+|`
    pub plus: usize,
    /// `Σ |R_i^-|`
    pub minus: usize,
    /// rows with `R_i` nonempty
    pub rows: usize,
    pub rows_plus: usize,
    pub rows_minus: usize,
}

impl PatternStats {
    pub fn of(sets: &IndexSets) -> Self {
        let nonempty = |v: &Vec<Vec<usize>>| v.iter().filter(|r| !r.is_empty()).count();
        Self {
            pairs: sets.pair_count(),
            plus: sets.plus_count(),
            minus: sets.minus_count(),
            rows: nonempty(&sets.r),
            rows_plus: nonempty(&sets.r_plus),
            rows_minus: nonempty(&sets.r_minus),
        }
    }
}

/// Number of general constraints of `id` on a symmetric instance, from the
/// closed-form count of each model.
pub fn expected_constraint_count(id: &ModelId, sets: &IndexSets) -> usize {
    let PatternStats {
        pairs: n,
        plus: p,
        minus: m,
        rows: z,
        rows_plus: zp,
        rows_minus: zm,
    } = PatternStats::of(sets);
    if id.variant == Variant::OrdwA {
        return zm + p;
    }
    match (id.restriction, id.agg1, id.agg2) {
        (Restriction::Precise, Agg1::None, Agg2::None) => match id.family {
            Family::DW | Family::PK => 2 * n,
            Family::FT if id.symmetry_eq => 2 * n + n / 2,
            Family::GW | Family::FT => 3 * n,
        },
        (Restriction::Precise, Agg1::Alpha, Agg2::None) => match id.family {
            Family::DW | Family::PK => z + n,
            Family::GW | Family::FT => z + 2 * n,
        },
        (Restriction::Precise, Agg1::None, a2) => match a2 {
            Agg2::DwBeta | Agg2::PkBeta | Agg2::GammaPlusDelta | Agg2::HansenMeyer => n + z,
            Agg2::GammaAndDelta | Agg2::GammaAndTheta | Agg2::GammaAndThetaEq => n + 2 * z,
            Agg2::Gamma | Agg2::Delta | Agg2::Theta => 2 * n + z,
            Agg2::None => unreachable!(),
        },
        (Restriction::Precise, Agg1::Alpha, a2) => match a2 {
            Agg2::PkBeta | Agg2::GammaPlusDelta | Agg2::DwBeta | Agg2::HansenMeyer => 2 * z,
            Agg2::GammaAndDelta | Agg2::GammaAndTheta | Agg2::GammaAndThetaEq => 3 * z,
            Agg2::Gamma | Agg2::Delta | Agg2::Theta => 2 * z + n,
            Agg2::None => unreachable!(),
        },
        (Restriction::OptimalityRestricted, Agg1::None, Agg2::None) => match id.family {
            Family::DW | Family::PK => n,
            Family::GW | Family::FT => m + 2 * p,
        },
        (Restriction::OptimalityRestricted, Agg1::Alpha, Agg2::None) => match id.family {
            Family::DW | Family::PK => zm + n,
            Family::GW | Family::FT => zm + 2 * n,
        },
        (Restriction::OptimalityRestricted, Agg1::None, a2) => match a2 {
            Agg2::DwBeta | Agg2::PkBeta | Agg2::GammaPlusDelta | Agg2::HansenMeyer => m + zp,
            Agg2::GammaAndDelta | Agg2::GammaAndTheta | Agg2::GammaAndThetaEq => m + 2 * zp,
            Agg2::Gamma | Agg2::Delta | Agg2::Theta => m + p + zp,
            Agg2::None => unreachable!(),
        },
        (Restriction::OptimalityRestricted, Agg1::Alpha, a2) => match a2 {
            Agg2::PkBeta | Agg2::GammaPlusDelta | Agg2::DwBeta | Agg2::HansenMeyer => zm + z,
            Agg2::GammaAndDelta | Agg2::GammaAndTheta | Agg2::GammaAndThetaEq => zm + 2 * z,
            Agg2::Gamma | Agg2::Delta | Agg2::Theta => zm + z + n,
            Agg2::None => unreachable!(),
        },
    }
}
