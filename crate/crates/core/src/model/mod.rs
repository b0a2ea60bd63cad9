//! Solver-independent MILP data model.
//!
//! Every model is a maximization. Single-variable bounds (`y_ij <= 1`,
//! `y_ij >= 0`) are stored on the variables, never as rows, so the number
//! of rows is exactly the number of general constraints.

mod lp_format;
mod mps;

pub use lp_format::{export_lp, import_lp};
pub use mps::{export_mps, import_mps};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// What a column stands for. `Y(i, j)` is the product `x_i x_j` seen from
/// row `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRole {
    X(usize),
    Y(usize, usize),
}

impl VarRole {
    pub fn name(self) -> String {
        match self {
            VarRole::X(i) => format!("x{}", i + 1),
            VarRole::Y(i, j) => format!("y{}_{}", i + 1, j + 1),
        }
    }

    /// Inverse of [`VarRole::name`].
    pub fn parse(name: &str) -> Option<Self> {
        let (head, rest) = name.split_at(name.char_indices().nth(1)?.0);
        let idx: Vec<usize> = rest
            .split('_')
            .map(|p| {
                if p.starts_with('+') {
                    None
                } else {
                    p.parse::<usize>().ok()
                }
            })
            .collect::<Option<_>>()?;
        if idx.contains(&0) {
            return None;
        }
        match (head, idx.as_slice()) {
            ("x", [i]) => Some(VarRole::X(i - 1)),
            ("y", [i, j]) if i != j => Some(VarRole::Y(i - 1, j - 1)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub role: Option<VarRole>,
}

impl Variable {
    pub fn binary(role: VarRole) -> Self {
        Self {
            name: role.name(),
            lower: 0.0,
            upper: 1.0,
            kind: VarKind::Binary,
            role: Some(role),
        }
    }

    pub fn continuous(role: VarRole, lower: f64, upper: f64) -> Self {
        Self {
            name: role.name(),
            lower,
            upper,
            kind: VarKind::Continuous,
            role: Some(role),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// Constraint class used in reports and by dual extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowClass {
    Type1,
    Type2,
    AggType1,
    AggType2,
    Symmetry,
    Other,
}

/// The concrete linear form a row instantiates. The two-letter code is the
/// row-name prefix in exported files; `(i, j)` follow as 1-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowCode {
    /// `x_i + x_j - y_ij <= 1`
    Type1,
    /// `2 y_ij - x_i - x_j <= 0`
    Diagonal,
    /// `y_ij - x_i <= 0`
    RowUpper,
    /// `y_ji - x_i <= 0` for `j ∈ S_i`
    ColUpper,
    /// `y_ij + y_ji - 2 x_i <= 0`
    PairSum,
    /// `y_ij - y_ji <= 0`
    Symmetry,
    /// `y_ij = y_ji`, `j > i`
    SymmetryEq,
    /// `Σ α_ij (x_j - y_ij) <= (Σ α_ij)(1 - x_i)` over `R_i`
    AggType1,
    /// same as [`RowCode::AggType1`] restricted to `R_i^-`
    AggType1Neg,
    /// `Σ β_ij (y_ij + y_ji) <= 2 (Σ β_ij) x_i`
    AggPairSum,
    /// `Σ β_ij (2 y_ij - x_j) <= (Σ β_ij) x_i`
    AggDiagonal,
    /// `Σ γ_ij y_ij <= (Σ γ_ij) x_i`
    AggRowUpper,
    /// `Σ δ_ij y_ji <= (Σ δ_ij) x_i`
    AggColUpper,
    /// `Σ γ_ij y_ij + Σ δ_ij y_ji <= (Σ γ_ij + Σ δ_ij) x_i`
    AggRowColUpper,
    /// `Σ θ_ij (y_ij - y_ji) <= 0`
    AggSymmetry,
    /// `Σ θ_ij (y_ij - y_ji) = 0`
    AggSymmetryEq,
    /// `Σ y_ij <= |R_i| x_i`
    HansenMeyer,
    Other,
}

const ALL_CODES: [RowCode; 18] = [
    RowCode::Type1,
    RowCode::Diagonal,
    RowCode::RowUpper,
    RowCode::ColUpper,
    RowCode::PairSum,
    RowCode::Symmetry,
    RowCode::SymmetryEq,
    RowCode::AggType1,
    RowCode::AggType1Neg,
    RowCode::AggPairSum,
    RowCode::AggDiagonal,
    RowCode::AggRowUpper,
    RowCode::AggColUpper,
    RowCode::AggRowColUpper,
    RowCode::AggSymmetry,
    RowCode::AggSymmetryEq,
    RowCode::HansenMeyer,
    RowCode::Other,
];

impl RowCode {
    pub fn prefix(self) -> &'static str {
        match self {
            RowCode::Type1 => "T1",
            RowCode::Diagonal => "DU",
            RowCode::RowUpper => "UR",
            RowCode::ColUpper => "UC",
            RowCode::PairSum => "PS",
            RowCode::Symmetry => "SY",
            RowCode::SymmetryEq => "SE",
            RowCode::AggType1 => "A1",
            RowCode::AggType1Neg => "AN",
            RowCode::AggPairSum => "AP",
            RowCode::AggDiagonal => "AD",
            RowCode::AggRowUpper => "AG",
            RowCode::AggColUpper => "AL",
            RowCode::AggRowColUpper => "AS",
            RowCode::AggSymmetry => "AT",
            RowCode::AggSymmetryEq => "AE",
            RowCode::HansenMeyer => "HM",
            RowCode::Other => "R",
        }
    }

    /// Stable label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            RowCode::Type1 => "type1",
            RowCode::Diagonal => "diagonal",
            RowCode::RowUpper => "row-upper",
            RowCode::ColUpper => "col-upper",
            RowCode::PairSum => "pair-sum",
            RowCode::Symmetry => "symmetry",
            RowCode::SymmetryEq => "symmetry-eq",
            RowCode::AggType1 => "agg-type1",
            RowCode::AggType1Neg => "agg-type1-neg",
            RowCode::AggPairSum => "agg-pair-sum",
            RowCode::AggDiagonal => "agg-diagonal",
            RowCode::AggRowUpper => "agg-row-upper",
            RowCode::AggColUpper => "agg-col-upper",
            RowCode::AggRowColUpper => "agg-row-col-upper",
            RowCode::AggSymmetry => "agg-symmetry",
            RowCode::AggSymmetryEq => "agg-symmetry-eq",
            RowCode::HansenMeyer => "hansen-meyer",
            RowCode::Other => "other",
        }
    }

    pub fn class(self) -> RowClass {
        match self {
            RowCode::Type1 => RowClass::Type1,
            RowCode::Diagonal | RowCode::RowUpper | RowCode::ColUpper | RowCode::PairSum => {
                RowClass::Type2
            }
            RowCode::Symmetry | RowCode::SymmetryEq => RowClass::Symmetry,
            RowCode::AggType1 | RowCode::AggType1Neg => RowClass::AggType1,
            RowCode::AggPairSum
            | RowCode::AggDiagonal
            | RowCode::AggRowUpper
            | RowCode::AggColUpper
            | RowCode::AggRowColUpper
            | RowCode::AggSymmetry
            | RowCode::AggSymmetryEq
            | RowCode::HansenMeyer => RowClass::AggType2,
            RowCode::Other => RowClass::Other,
        }
    }

    pub fn from_prefix(p: &str) -> Option<Self> {
        ALL_CODES.iter().copied().find(|c| c.prefix() == p && *c != RowCode::Other)
    }

    pub fn all() -> &'static [RowCode] {
        &ALL_CODES
    }
}

/// Provenance of a row: its code plus the (0-based) pair or row index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowTag {
    pub code: RowCode,
    pub i: Option<usize>,
    pub j: Option<usize>,
}

impl RowTag {
    pub fn pair(code: RowCode, i: usize, j: usize) -> Self {
        Self {
            code,
            i: Some(i),
            j: Some(j),
        }
    }

    pub fn row(code: RowCode, i: usize) -> Self {
        Self {
            code,
            i: Some(i),
            j: None,
        }
    }

    pub fn other() -> Self {
        Self {
            code: RowCode::Other,
            i: None,
            j: None,
        }
    }

    pub fn class(&self) -> RowClass {
        self.code.class()
    }

    /// Row name, e.g. `T1_1_2` or `AS_3`.
    pub fn name(&self) -> String {
        match (self.i, self.j) {
            (Some(i), Some(j)) => format!("{}_{}_{}", self.code.prefix(), i + 1, j + 1),
            (Some(i), None) => format!("{}_{}", self.code.prefix(), i + 1),
            _ => self.code.prefix().to_string(),
        }
    }

    /// Recovers the tag from a row name; unknown names map to `Other`.
    pub fn from_name(name: &str) -> Self {
        let mut parts = name.split('_');
        let Some(code) = parts.next().and_then(RowCode::from_prefix) else {
            return Self::other();
        };
        let idx: Option<Vec<usize>> = parts.map(|p| p.parse::<usize>().ok()).collect();
        match idx.as_deref() {
            Some([i, j]) if *i > 0 && *j > 0 => Self::pair(code, i - 1, j - 1),
            Some([i]) if *i > 0 => Self::row(code, i - 1),
            _ => Self::other(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
}

/// Which catalog model and which instance a model was built from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelMeta {
    pub model: String,
    pub instance_fingerprint: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Dense objective coefficients, one per variable (maximize).
    pub objective: Vec<f64>,
    pub meta: ModelMeta,
}

impl MilpModel {
    pub fn new(meta: ModelMeta) -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            meta,
        }
    }

    pub fn add_variable(&mut self, var: Variable, obj: f64) -> usize {
        self.variables.push(var);
        self.objective.push(obj);
        self.variables.len() - 1
    }

    /// Adds a row; terms are sorted by column and duplicate columns merged.
    pub fn add_constraint(&mut self, tag: RowTag, mut terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (v, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += a,
                _ => merged.push((v, a)),
            }
        }
        self.constraints.push(Constraint {
            name: tag.name(),
            terms: merged,
            sense,
            rhs,
            tag,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn count_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Column of each `x_i`, if present.
    pub fn x_columns(&self) -> Vec<Option<usize>> {
        let n = self
            .variables
            .iter()
            .filter_map(|v| match v.role {
                Some(VarRole::X(i)) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut cols = vec![None; n];
        for (k, v) in self.variables.iter().enumerate() {
            if let Some(VarRole::X(i)) = v.role {
                cols[i] = Some(k);
            }
        }
        cols
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.variables.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(k, a)| a * values[k]).sum();
            let viol = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// The same model with every variable continuous.
    pub fn relaxed(&self) -> Self {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.kind = VarKind::Continuous;
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.variables.len() {
            return Err(Error::InvalidModel("objective length differs from variable count".into()));
        }
        let mut names = HashSet::new();
        for v in &self.variables {
            if v.name.is_empty() {
                return Err(Error::InvalidModel("unnamed variable".into()));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate variable `{}`", v.name)));
            }
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::InvalidModel(format!("bad bounds on `{}`", v.name)));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::InvalidModel(format!("binary `{}` has bounds outside [0,1]", v.name)));
            }
        }
        for (k, c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite(format!("objective coefficient of `{}`", self.variables[k].name)));
            }
        }
        let mut rows = HashSet::new();
        for c in &self.constraints {
            if !rows.insert(c.name.as_str()) {
                return Err(Error::DuplicateRow(c.name.clone()));
            }
            if !c.rhs.is_finite() {
                return Err(Error::NonFinite(format!("rhs of `{}`", c.name)));
            }
            let mut seen = HashSet::new();
            for &(v, a) in &c.terms {
                if v >= self.variables.len() {
                    return Err(Error::InvalidModel(format!("row `{}` references column {}", c.name, v)));
                }
                if !seen.insert(v) {
                    return Err(Error::InvalidModel(format!("row `{}` repeats column {}", c.name, v)));
                }
                if !a.is_finite() {
                    return Err(Error::NonFinite(format!("row `{}`", c.name)));
                }
            }
        }
        Ok(())
    }
}

/// Number of general constraints. Bounds are stored on variables, so this
/// is the number of rows.
pub fn count_general_constraints(m: &MilpModel) -> usize {
    m.constraints.len()
}

/// Shortest decimal that parses back to the same `f64`.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

impl fmt::Display for MilpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&export_lp(self).map_err(|_| fmt::Error)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_names_round_trip() {
        for role in [VarRole::X(0), VarRole::X(11), VarRole::Y(0, 1), VarRole::Y(9, 3)] {
            assert_eq!(VarRole::parse(&role.name()), Some(role));
        }
        assert_eq!(VarRole::parse("y1_1"), None);
        assert_eq!(VarRole::parse("x0"), None);
        assert_eq!(VarRole::parse("x"), None);
        assert_eq!(VarRole::parse("z_1"), None);
    }

    #[test]
    fn tags_round_trip_through_names() {
        for &code in RowCode::all() {
            if code == RowCode::Other {
                continue;
            }
            let t = RowTag::pair(code, 2, 4);
            assert_eq!(RowTag::from_name(&t.name()), t);
            let t = RowTag::row(code, 7);
            assert_eq!(RowTag::from_name(&t.name()), t);
        }
        assert_eq!(RowTag::from_name("c17").code, RowCode::Other);
        assert_eq!(RowTag::from_name("T1_x_2").code, RowCode::Other);
    }

    #[test]
    fn add_constraint_merges_duplicates() {
        let mut m = MilpModel::new(ModelMeta::default());
        let a = m.add_variable(Variable::binary(VarRole::X(0)), 1.0);
        let b = m.add_variable(Variable::binary(VarRole::X(1)), 1.0);
        m.add_constraint(RowTag::other(), vec![(b, 1.0), (a, 2.0), (b, 3.0)], Sense::Le, 1.0);
        assert_eq!(m.constraints[0].terms, vec![(a, 2.0), (b, 4.0)]);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn validate_catches_bad_models() {
        let mut m = MilpModel::new(ModelMeta::default());
        m.add_variable(Variable::binary(VarRole::X(0)), f64::INFINITY);
        assert!(matches!(m.validate(), Err(Error::NonFinite(_))));
        let mut m = MilpModel::new(ModelMeta::default());
        let mut v = Variable::binary(VarRole::X(0));
        v.name.clear();
        m.add_variable(v, 1.0);
        assert!(matches!(m.validate(), Err(Error::InvalidModel(_))));
    }
}
