use serde::{Deserialize, Serialize};

use super::id::{Agg1, Agg2, Family, ModelId, Restriction, Variant};
use super::weights::{WeightKind, WeightMode, WeightSet};
use crate::error::{Error, Result};
use crate::model::{MilpModel, ModelMeta, RowCode, RowTag, Sense, VarKind, VarRole, Variable};
use crate::qubo::{index_sets, IndexSets, QuboInstance};

/// Which pairs of `R_i` (or `S_i`) a block ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subset {
    All,
    Pos,
    Neg,
}

impl Subset {
    fn pick<'a>(self, all: &'a [usize], pos: &'a [usize], neg: &'a [usize]) -> &'a [usize] {
        match self {
            Subset::All => all,
            Subset::Pos => pos,
            Subset::Neg => neg,
        }
    }
}

/// A family of rows. Pair blocks emit one row per `(i, j)`; aggregated
/// blocks emit one row per `i` whose index set is nonempty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    Type1(Subset),
    Diagonal(Subset),
    RowUpper(Subset),
    ColUpper(Subset),
    PairSum(Subset),
    Symmetry(Subset),
    SymmetryEq,
    AggType1(Subset),
    AggPairSum(Subset),
    AggDiagonal,
    AggRowUpper(Subset),
    AggColUpper(Subset),
    AggRowColUpper(Subset),
    AggSymmetry(Subset),
    AggSymmetryEq,
    HansenMeyer,
}

impl Block {
    pub fn is_aggregated(self) -> bool {
        matches!(
            self,
            Block::AggType1(_)
                | Block::AggPairSum(_)
                | Block::AggDiagonal
                | Block::AggRowUpper(_)
                | Block::AggColUpper(_)
                | Block::AggRowColUpper(_)
                | Block::AggSymmetry(_)
                | Block::AggSymmetryEq
                | Block::HansenMeyer
        )
    }

    /// The pair rows an aggregated block sums.
    pub fn disaggregated(self) -> Vec<Block> {
        match self {
            Block::AggType1(s) => vec![Block::Type1(s)],
            Block::AggPairSum(s) => vec![Block::PairSum(s)],
            Block::AggDiagonal => vec![Block::Diagonal(Subset::All)],
            Block::AggRowUpper(s) => vec![Block::RowUpper(s)],
            Block::AggColUpper(s) => vec![Block::ColUpper(s)],
            Block::AggRowColUpper(s) => vec![Block::RowUpper(s), Block::ColUpper(s)],
            Block::AggSymmetry(s) => vec![Block::Symmetry(s)],
            Block::AggSymmetryEq => vec![Block::Symmetry(Subset::All)],
            Block::HansenMeyer => vec![Block::RowUpper(Subset::All)],
            other => vec![other],
        }
    }

    pub fn weight_kinds(self) -> &'static [WeightKind] {
        match self {
            Block::AggType1(_) => &[WeightKind::Alpha],
            Block::AggPairSum(_) | Block::AggDiagonal => &[WeightKind::Beta],
            Block::AggRowUpper(_) => &[WeightKind::Gamma],
            Block::AggColUpper(_) => &[WeightKind::Delta],
            Block::AggRowColUpper(_) => &[WeightKind::Gamma, WeightKind::Delta],
            Block::AggSymmetry(_) | Block::AggSymmetryEq => &[WeightKind::Theta],
            _ => &[],
        }
    }
}

/// Bounds and integrality of the `y` columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum YPolicy {
    /// `y ∈ {0,1}`.
    Binary,
    /// binary on `R_i^+`, `y >= 0` on `R_i^-`.
    BinaryOnPos,
    /// `y >= 0`.
    NonNeg,
    /// `0 <= y <= 1`.
    Unit,
    /// `y >= 0` on `R_i^-`, free on `R_i^+`.
    LowerOnNeg,
    /// `y >= 0` everywhere, `y <= 1` on `R_i^+`.
    UpperOnPos,
    /// `y >= 0` on `R_i^-`, `y <= 1` on `R_i^+` and free below there.
    UpperOnPosLowerOnNeg,
}

impl YPolicy {
    fn column(self, positive: bool) -> (f64, f64, VarKind) {
        let inf = f64::INFINITY;
        match (self, positive) {
            (YPolicy::Binary, _) | (YPolicy::BinaryOnPos, true) => (0.0, 1.0, VarKind::Binary),
            (YPolicy::BinaryOnPos, false) | (YPolicy::NonNeg, _) => (0.0, inf, VarKind::Continuous),
            (YPolicy::Unit, _) => (0.0, 1.0, VarKind::Continuous),
            (YPolicy::LowerOnNeg, true) => (-inf, inf, VarKind::Continuous),
            (YPolicy::LowerOnNeg, false) => (0.0, inf, VarKind::Continuous),
            (YPolicy::UpperOnPos, true) => (0.0, 1.0, VarKind::Continuous),
            (YPolicy::UpperOnPos, false) => (0.0, inf, VarKind::Continuous),
            (YPolicy::UpperOnPosLowerOnNeg, true) => (-inf, 1.0, VarKind::Continuous),
            (YPolicy::UpperOnPosLowerOnNeg, false) => (0.0, inf, VarKind::Continuous),
        }
    }
}

/// The defining system of a model: its row blocks and `y` bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub blocks: Vec<Block>,
    pub y_policy: YPolicy,
}

impl ModelSpec {
    /// The same system with every aggregated block replaced by the rows it
    /// sums. Bounds are unchanged.
    pub fn disaggregated(&self) -> Self {
        Self {
            blocks: self.blocks.iter().flat_map(|b| b.disaggregated()).collect(),
            y_policy: self.y_policy,
        }
    }

    pub fn has_aggregation(&self) -> bool {
        self.blocks.iter().any(|b| b.is_aggregated())
    }
}

/// Flags that relax the builder's safety checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Permit known-invalid models and negative weights.
    pub allow_invalid: bool,
    /// Build an LP-only object: zero dual weights are accepted and every
    /// column is continuous.
    pub lp_study: bool,
    /// Accept an asymmetric (pattern-symmetric) instance.
    pub research_asymmetric: bool,
}

fn type2_blocks(family: Family, agg2: Agg2, s: Subset) -> Vec<Block> {
    use Block::*;
    match (family, agg2) {
        (Family::DW, Agg2::DwBeta) => vec![AggDiagonal],
        (Family::PK, Agg2::PkBeta) => vec![AggPairSum(s)],
        (Family::GW, Agg2::GammaPlusDelta) => vec![AggRowColUpper(s)],
        (Family::GW, Agg2::GammaAndDelta) => vec![AggRowUpper(s), AggColUpper(s)],
        (Family::GW, Agg2::Gamma) => vec![AggRowUpper(s), ColUpper(s)],
        (Family::GW, Agg2::Delta) => vec![RowUpper(s), AggColUpper(s)],
        (Family::GW, Agg2::HansenMeyer) => vec![HansenMeyer],
        (Family::FT, Agg2::Gamma) => vec![AggRowUpper(s), Symmetry(s)],
        (Family::FT, Agg2::Theta) => vec![RowUpper(s), AggSymmetry(s)],
        (Family::FT, Agg2::GammaAndTheta) => vec![AggRowUpper(s), AggSymmetry(s)],
        (Family::FT, Agg2::GammaAndThetaEq) => vec![AggRowUpper(s), AggSymmetryEq],
        (Family::DW, Agg2::None) => vec![Diagonal(s)],
        (Family::GW, Agg2::None) => vec![RowUpper(s), ColUpper(s)],
        (Family::FT, Agg2::None) => vec![RowUpper(s), Symmetry(s)],
        (Family::PK, Agg2::None) => vec![PairSum(s)],
        _ => Vec::new(),
    }
}

/// The defining system of a catalog model.
pub fn model_spec(id: &ModelId) -> ModelSpec {
    use Block::*;
    use Subset::*;
    if id.variant == Variant::OrdwA {
        return ModelSpec {
            blocks: vec![AggType1(Neg), Diagonal(Pos)],
            y_policy: YPolicy::BinaryOnPos,
        };
    }
    let fam = id.family;
    let (blocks, y_policy) = match (id.restriction, id.agg1, id.agg2) {
        (Restriction::Precise, Agg1::None, Agg2::None) => {
            let mut b = vec![Type1(All)];
            if fam == Family::FT && id.symmetry_eq {
                b.extend([RowUpper(All), SymmetryEq]);
            } else {
                b.extend(type2_blocks(fam, Agg2::None, All));
            }
            let p = if fam == Family::DW { YPolicy::Binary } else { YPolicy::NonNeg };
            (b, p)
        }
        (Restriction::Precise, Agg1::Alpha, Agg2::None) => {
            let mut b = vec![AggType1(All)];
            b.extend(type2_blocks(fam, Agg2::None, All));
            let p = match fam {
                Family::DW => YPolicy::Binary,
                Family::PK if id.variant == Variant::NoUpperBounds => YPolicy::NonNeg,
                Family::PK => YPolicy::Unit,
                _ => YPolicy::NonNeg,
            };
            (b, p)
        }
        (Restriction::Precise, Agg1::None, a2) => {
            let mut b = vec![Type1(All)];
            b.extend(type2_blocks(fam, a2, All));
            let p = match (fam, a2) {
                (Family::DW, _) => YPolicy::Binary,
                (Family::FT, Agg2::Theta) | (Family::GW, Agg2::Gamma) | (Family::GW, Agg2::Delta) => YPolicy::NonNeg,
                _ => YPolicy::Unit,
            };
            (b, p)
        }
        (Restriction::Precise, Agg1::Alpha, a2) => {
            let mut b = vec![AggType1(All)];
            b.extend(type2_blocks(fam, a2, All));
            (b, YPolicy::Unit)
        }
        (Restriction::OptimalityRestricted, Agg1::None, Agg2::None) => {
            let mut b = vec![Type1(Neg)];
            b.extend(type2_blocks(fam, Agg2::None, Pos));
            let p = if fam == Family::DW { YPolicy::BinaryOnPos } else { YPolicy::LowerOnNeg };
            (b, p)
        }
        (Restriction::OptimalityRestricted, Agg1::Alpha, Agg2::None) => {
            let mut b = vec![AggType1(Neg)];
            b.extend(type2_blocks(fam, Agg2::None, All));
            let p = match fam {
                Family::DW => YPolicy::Binary,
                Family::PK => YPolicy::Unit,
                _ => YPolicy::NonNeg,
            };
            (b, p)
        }
        (Restriction::OptimalityRestricted, Agg1::None, a2) => {
            let mut b = vec![Type1(Neg)];
            b.extend(type2_blocks(fam, a2, Pos));
            let p = match (fam, id.variant) {
                (Family::PK, Variant::ReducedLowerBounds) => YPolicy::UpperOnPosLowerOnNeg,
                (Family::PK, _) => YPolicy::UpperOnPos,
                _ => YPolicy::Unit,
            };
            (b, p)
        }
        (Restriction::OptimalityRestricted, Agg1::Alpha, a2) => {
            let mut b = vec![AggType1(Neg)];
            b.extend(type2_blocks(fam, a2, All));
            (b, YPolicy::Unit)
        }
    };
    ModelSpec { blocks, y_policy }
}

/// Every `(kind, (i, j))` weight the builder reads for `id`.
pub fn required_weights(id: &ModelId, sets: &IndexSets) -> Vec<(WeightKind, (usize, usize))> {
    let spec = model_spec(id);
    let mut out = Vec::new();
    for b in &spec.blocks {
        for &kind in b.weight_kinds() {
            let subset = match *b {
                Block::AggType1(s)
                | Block::AggPairSum(s)
                | Block::AggRowUpper(s)
                | Block::AggColUpper(s)
                | Block::AggRowColUpper(s)
                | Block::AggSymmetry(s) => s,
                _ => Subset::All,
            };
            for i in 0..sets.n() {
                let cols = if kind == WeightKind::Delta {
                    subset.pick(&sets.s[i], &sets.s_plus[i], &sets.s_minus[i])
                } else {
                    subset.pick(&sets.r[i], &sets.r_plus[i], &sets.r_minus[i])
                };
                out.extend(cols.iter().map(|&j| (kind, (i, j))));
            }
        }
    }
    out
}

struct Ctx<'a> {
    inst: &'a QuboInstance,
    sets: &'a IndexSets,
    ycol: Vec<Vec<Option<usize>>>,
    w: &'a WeightSet,
    opts: &'a BuildOptions,
}

impl Ctx<'_> {
    fn x(&self, i: usize) -> usize {
        i
    }

    fn y(&self, i: usize, j: usize) -> Result<usize> {
        self.ycol[i][j].ok_or_else(|| {
            Error::InvalidInstance(format!("pair ({},{}) has no product column; the sparsity pattern must be symmetric", i + 1, j + 1))
        })
    }

    fn rows(&self, s: Subset, i: usize) -> &[usize] {
        s.pick(&self.sets.r[i], &self.sets.r_plus[i], &self.sets.r_minus[i])
    }

    fn cols(&self, s: Subset, i: usize) -> &[usize] {
        s.pick(&self.sets.s[i], &self.sets.s_plus[i], &self.sets.s_minus[i])
    }

    fn weight(&self, kind: WeightKind, i: usize, j: usize) -> Result<f64> {
        let v = self.w.resolve(kind, i, j)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{kind} weight ({},{})", i + 1, j + 1)));
        }
        let zero_ok = v == 0.0 && self.w.mode == WeightMode::DualExact && self.opts.lp_study;
        let neg_ok = v < 0.0 && self.opts.allow_invalid;
        if v <= 0.0 && !zero_ok && !neg_ok {
            return Err(Error::NonPositiveWeight {
                kind: kind.name(),
                i: i + 1,
                j: j + 1,
                value: v,
            });
        }
        Ok(v)
    }
}

fn emit(m: &mut MilpModel, ctx: &Ctx<'_>, block: Block) -> Result<()> {
    let n = ctx.inst.n();
    for i in 0..n {
        match block {
            Block::Type1(s) => {
                for &j in ctx.rows(s, i) {
                    m.add_constraint(
                        RowTag::pair(RowCode::Type1, i, j),
                        vec![(ctx.x(i), 1.0), (ctx.x(j), 1.0), (ctx.y(i, j)?, -1.0)],
                        Sense::Le,
                        1.0,
                    );
                }
            }
            Block::Diagonal(s) => {
                for &j in ctx.rows(s, i) {
                    m.add_constraint(
                        RowTag::pair(RowCode::Diagonal, i, j),
                        vec![(ctx.y(i, j)?, 2.0), (ctx.x(i), -1.0), (ctx.x(j), -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
            Block::RowUpper(s) => {
                for &j in ctx.rows(s, i) {
                    m.add_constraint(
                        RowTag::pair(RowCode::RowUpper, i, j),
                        vec![(ctx.y(i, j)?, 1.0), (ctx.x(i), -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
            Block::ColUpper(s) => {
                for &j in ctx.cols(s, i) {
                    m.add_constraint(
                        RowTag::pair(RowCode::ColUpper, i, j),
                        vec![(ctx.y(j, i)?, 1.0), (ctx.x(i), -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
            Block::PairSum(s) => {
                for &j in ctx.rows(s, i) {
                    m.add_constraint(
                        RowTag::pair(RowCode::PairSum, i, j),
                        vec![(ctx.y(i, j)?, 1.0), (ctx.y(j, i)?, 1.0), (ctx.x(i), -2.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
            Block::Symmetry(s) => {
                for &j in ctx.rows(s, i) {
                    m.add_constraint(
                        RowTag::pair(RowCode::Symmetry, i, j),
                        vec![(ctx.y(i, j)?, 1.0), (ctx.y(j, i)?, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
            Block::SymmetryEq => {
                for &j in ctx.rows(Subset::All, i).iter().filter(|&&j| j > i) {
                    m.add_constraint(
                        RowTag::pair(RowCode::SymmetryEq, i, j),
                        vec![(ctx.y(i, j)?, 1.0), (ctx.y(j, i)?, -1.0)],
                        Sense::Eq,
                        0.0,
                    );
                }
            }
            Block::AggType1(s) => {
                let set = ctx.rows(s, i);
                if set.is_empty() {
                    continue;
                }
                let code = if s == Subset::All { RowCode::AggType1 } else { RowCode::AggType1Neg };
                let mut terms = Vec::with_capacity(2 * set.len() + 1);
                let mut total = 0.0;
                for &j in set {
                    let a = ctx.weight(WeightKind::Alpha, i, j)?;
                    total += a;
                    terms.push((ctx.x(j), a));
                    terms.push((ctx.y(i, j)?, -a));
                }
                terms.push((ctx.x(i), total));
                m.add_constraint(RowTag::row(code, i), terms, Sense::Le, total);
            }
            Block::AggPairSum(s) => {
                let set = ctx.rows(s, i);
                if set.is_empty() {
                    continue;
                }
                let mut terms = Vec::new();
                let mut total = 0.0;
                for &j in set {
                    let b = ctx.weight(WeightKind::Beta, i, j)?;
                    total += b;
                    terms.push((ctx.y(i, j)?, b));
                    terms.push((ctx.y(j, i)?, b));
                }
                terms.push((ctx.x(i), -2.0 * total));
                m.add_constraint(RowTag::row(RowCode::AggPairSum, i), terms, Sense::Le, 0.0);
            }
            Block::AggDiagonal => {
                let set = ctx.rows(Subset::All, i);
                if set.is_empty() {
                    continue;
                }
                let mut terms = Vec::new();
                let mut total = 0.0;
                for &j in set {
                    let b = ctx.weight(WeightKind::Beta, i, j)?;
                    total += b;
                    terms.push((ctx.y(i, j)?, 2.0 * b));
                    terms.push((ctx.x(j), -b));
                }
                terms.push((ctx.x(i), -total));
                m.add_constraint(RowTag::row(RowCode::AggDiagonal, i), terms, Sense::Le, 0.0);
            }
            Block::AggRowUpper(s) | Block::AggColUpper(s) | Block::AggRowColUpper(s) => {
                let use_row = !matches!(block, Block::AggColUpper(_));
                let use_col = !matches!(block, Block::AggRowUpper(_));
                let rset: &[usize] = if use_row { ctx.rows(s, i) } else { &[] };
                let cset: &[usize] = if use_col { ctx.cols(s, i) } else { &[] };
                if rset.is_empty() && cset.is_empty() {
                    continue;
                }
                let mut terms = Vec::new();
                let mut total = 0.0;
                for &j in rset {
                    let g = ctx.weight(WeightKind::Gamma, i, j)?;
                    total += g;
                    terms.push((ctx.y(i, j)?, g));
                }
                for &j in cset {
                    let d = ctx.weight(WeightKind::Delta, i, j)?;
                    total += d;
                    terms.push((ctx.y(j, i)?, d));
                }
                terms.push((ctx.x(i), -total));
                let code = match block {
                    Block::AggRowUpper(_) => RowCode::AggRowUpper,
                    Block::AggColUpper(_) => RowCode::AggColUpper,
                    _ => RowCode::AggRowColUpper,
                };
                m.add_constraint(RowTag::row(code, i), terms, Sense::Le, 0.0);
            }
            Block::AggSymmetry(_) | Block::AggSymmetryEq => {
                let (set, sense, code) = match block {
                    Block::AggSymmetry(s) => (ctx.rows(s, i), Sense::Le, RowCode::AggSymmetry),
                    _ => (ctx.rows(Subset::All, i), Sense::Eq, RowCode::AggSymmetryEq),
                };
                if set.is_empty() {
                    continue;
                }
                let mut terms = Vec::new();
                for &j in set {
                    let t = ctx.weight(WeightKind::Theta, i, j)?;
                    terms.push((ctx.y(i, j)?, t));
                    terms.push((ctx.y(j, i)?, -t));
                }
                m.add_constraint(RowTag::row(code, i), terms, sense, 0.0);
            }
            Block::HansenMeyer => {
                let set = ctx.rows(Subset::All, i);
                if set.is_empty() {
                    continue;
                }
                let mut terms = Vec::new();
                for &j in set {
                    terms.push((ctx.y(i, j)?, 1.0));
                }
                terms.push((ctx.x(i), -(set.len() as f64)));
                m.add_constraint(RowTag::row(RowCode::HansenMeyer, i), terms, Sense::Le, 0.0);
            }
        }
    }
    Ok(())
}

/// Builds `spec` on `inst`; `name` is recorded in the model metadata.
pub fn build_spec(
    name: &str,
    spec: &ModelSpec,
    inst: &QuboInstance,
    w: &WeightSet,
    opts: &BuildOptions,
) -> Result<MilpModel> {
    if inst.is_asymmetric() && !opts.research_asymmetric {
        return Err(Error::AsymmetricInstance);
    }
    let sets = index_sets(inst);
    let n = inst.n();
    let mut m = MilpModel::new(ModelMeta {
        model: name.to_string(),
        instance_fingerprint: inst.fingerprint(),
    });
    for i in 0..n {
        m.add_variable(Variable::binary(VarRole::X(i)), inst.c_f64(i));
    }
    let mut ycol = vec![vec![None; n]; n];
    for i in 0..n {
        for &j in &sets.r[i] {
            let (lo, hi, kind) = spec.y_policy.column(inst.q(i, j) > num_traits::Zero::zero());
            let mut v = Variable::continuous(VarRole::Y(i, j), lo, hi);
            v.kind = kind;
            ycol[i][j] = Some(m.add_variable(v, inst.q_f64(i, j)));
        }
    }
    let ctx = Ctx {
        inst,
        sets: &sets,
        ycol,
        w,
        opts,
    };
    for &b in &spec.blocks {
        emit(&mut m, &ctx, b)?;
    }
    if opts.lp_study {
        m = m.relaxed();
    }
    Ok(m)
}

/// Builds catalog model `id` on `inst` with default options.
pub fn build(id: &ModelId, inst: &QuboInstance, w: &WeightSet) -> Result<MilpModel> {
    build_with(id, inst, w, &BuildOptions::default())
}

pub fn build_with(id: &ModelId, inst: &QuboInstance, w: &WeightSet, opts: &BuildOptions) -> Result<MilpModel> {
    if id.known_invalid() && !opts.allow_invalid {
        return Err(Error::InvalidModelRequested(id.name()));
    }
    build_spec(&id.name(), &model_spec(id), inst, w, opts)
}

/// The model with every aggregated block of `id` expanded into its rows.
pub fn build_disaggregated(id: &ModelId, inst: &QuboInstance, opts: &BuildOptions) -> Result<MilpModel> {
    let spec = model_spec(id).disaggregated();
    build_spec(&format!("{}~base", id.name()), &spec, inst, &WeightSet::unit(), opts)
}

/// Weight kind a pair row contributes to when its block is aggregated.
pub fn weight_kind_of(code: RowCode) -> Option<WeightKind> {
    match code {
        RowCode::Type1 => Some(WeightKind::Alpha),
        RowCode::Diagonal | RowCode::PairSum => Some(WeightKind::Beta),
        RowCode::RowUpper => Some(WeightKind::Gamma),
        RowCode::ColUpper => Some(WeightKind::Delta),
        RowCode::Symmetry => Some(WeightKind::Theta),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::id::catalog;
    use crate::instances::fixtures;

    #[test]
    fn gw_on_ex8_shape() {
        let m = build(&ModelId::basic(Family::GW), &fixtures::ex8(1), &WeightSet::unit()).unwrap();
        assert_eq!(m.num_rows(), 6);
        assert_eq!(m.count_binaries(), 2);
        assert_eq!(m.num_vars(), 4);
    }

    #[test]
    fn pk_on_one_variable() {
        let inst = QuboInstance::from_integers(&[vec![0]], &[5]).unwrap();
        let m = build(&ModelId::basic(Family::PK), &inst, &WeightSet::unit()).unwrap();
        assert_eq!(m.num_vars(), 1);
        assert_eq!(m.num_rows(), 0);
        assert_eq!(m.count_binaries(), 1);
    }

    #[test]
    fn ordw_on_ex2_has_twelve_rows() {
        let m = build(&ModelId::basic(Family::DW).or(), &fixtures::ex2(), &WeightSet::unit()).unwrap();
        assert_eq!(m.num_rows(), 12);
    }

    #[test]
    fn invalid_models_need_the_flag() {
        let id = ModelId::basic(Family::DW).with(Agg2::DwBeta);
        assert_eq!(
            build(&id, &fixtures::ex3(), &WeightSet::unit()),
            Err(Error::InvalidModelRequested("DW(*,b)".into()))
        );
        let opts = BuildOptions {
            allow_invalid: true,
            ..Default::default()
        };
        assert!(build_with(&id, &fixtures::ex3(), &WeightSet::unit(), &opts).is_ok());
    }

    #[test]
    fn weights_must_be_positive_and_present() {
        let id = ModelId::basic(Family::PK).alpha();
        let w = WeightSet::custom().with(WeightKind::Alpha, 0, 1, 1.0);
        assert!(matches!(build(&id, &fixtures::ex2(), &w), Err(Error::MissingWeight { .. })));
        let w = WeightSet::custom().with_default(1.0).with(WeightKind::Alpha, 0, 1, 0.0);
        assert!(matches!(build(&id, &fixtures::ex2(), &w), Err(Error::NonPositiveWeight { .. })));
        let mut w = WeightSet::with_mode(WeightMode::DualExact).with_default(1.0);
        w.set(WeightKind::Alpha, 0, 1, 0.0);
        assert!(build(&id, &fixtures::ex2(), &w).is_err());
        let opts = BuildOptions {
            lp_study: true,
            ..Default::default()
        };
        let m = build_with(&id, &fixtures::ex2(), &w, &opts).unwrap();
        assert_eq!(m.count_binaries(), 0);
    }

    #[test]
    fn asymmetric_needs_research_mode() {
        let inst = fixtures::ex7(1);
        assert_eq!(build(&ModelId::basic(Family::GW), &inst, &WeightSet::unit()), Err(Error::AsymmetricInstance));
    }

    #[test]
    fn required_weights_follow_signs() {
        let sets = index_sets(&fixtures::ex2());
        let pk_a = required_weights(&ModelId::basic(Family::PK).alpha(), &sets);
        assert_eq!(pk_a.len(), sets.pair_count());
        assert!(pk_a.iter().all(|(k, _)| *k == WeightKind::Alpha));
        let orpk_a = required_weights(&ModelId::basic(Family::PK).or().alpha(), &sets);
        assert_eq!(orpk_a.len(), sets.minus_count());
        let inst = fixtures::ex2();
        assert!(orpk_a.iter().all(|(_, (i, j))| inst.q(*i, *j) < num_traits::Zero::zero()));
        assert!(required_weights(&ModelId::basic(Family::GW), &sets).is_empty());
    }

    #[test]
    fn y_columns_reused_across_blocks() {
        for id in catalog() {
            let m = build(&id, &fixtures::ex2(), &WeightSet::unit()).unwrap();
            assert_eq!(m.num_vars(), 4 + 12, "{}", id);
            m.validate().unwrap();
        }
    }

    #[test]
    fn pk_alpha_beta_matches_gw_alpha_gamma_delta_up_to_scaling() {
        let inst = fixtures::ex2();
        let pk = build(&"PK(a,b)".parse().unwrap(), &inst, &WeightSet::unit()).unwrap();
        let gw = build(&"GW(a,g+d)".parse().unwrap(), &inst, &WeightSet::unit()).unwrap();
        assert_eq!(pk.num_rows(), gw.num_rows());
        for (a, b) in pk.constraints.iter().zip(&gw.constraints) {
            assert_eq!(a.terms.len(), b.terms.len());
            let ratio = a.terms[0].1 / b.terms[0].1;
            for (ta, tb) in a.terms.iter().zip(&b.terms) {
                assert_eq!(ta.0, tb.0);
                assert!((ta.1 - ratio * tb.1).abs() < 1e-12);
            }
            assert!((a.rhs - ratio * b.rhs).abs() < 1e-12);
        }
    }
}
