//! Model identifiers, their canonical names, and the catalog.
//!
//! Name grammar (whitespace ignored, Greek letters or spelled-out names are
//! accepted as argument aliases):
//!
//! ```text
//! name    := "ORDW-A" | ["OR"] family [ "(" args ")" ] [ suffix ]
//! family  := "DW" | "GW" | "FT" | "PK"
//! args    := agg1 [ "," agg2 ]             (DW, GW, PK)
//!          | agg1 "," gamma "," theta      (FT)
//! agg1    := "a" | "*"
//! agg2    := "b" | "g+d" | "g,d" | "g" | "d" | "hm" | "*"
//! gamma   := "g" | "*"
//! theta   := "t" | "t=" | "*"
//! suffix  := "[=]" | "[lb-]" | "[ub-]"
//! ```
//!
//! Canonical FT names always spell out three slots (`FT(*,g,*)`), except
//! `FT(a)`; the two-slot shorthands `FT(*,g)`, `FT(*,t)`, `FT(a,g)` and
//! `FT(a,t)` are accepted on input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    DW,
    GW,
    FT,
    PK,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Restriction {
    Precise,
    OptimalityRestricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Agg1 {
    None,
    Alpha,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Agg2 {
    None,
    /// DW: aggregated diagonal rows (invalid).
    DwBeta,
    /// PK: aggregated pair-sum rows.
    PkBeta,
    /// GW: row and column upper links in one row per `i`.
    GammaPlusDelta,
    /// GW: row and column upper links as two rows per `i`.
    GammaAndDelta,
    /// GW and FT: only the row upper links aggregated.
    Gamma,
    /// GW: only the column upper links aggregated.
    Delta,
    /// GW: the Hansen–Meyer unit aggregation (invalid).
    HansenMeyer,
    /// FT: only the symmetry rows aggregated.
    Theta,
    /// FT: row upper links and symmetry rows aggregated.
    GammaAndTheta,
    /// FT: row upper links aggregated, symmetry aggregated as an equality (invalid).
    GammaAndThetaEq,
}

/// Deliberate departures from a catalog model used to reproduce invalid
/// variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Standard,
    /// ORDW with its type-1 rows replaced by their aggregation over `R_i^-`.
    OrdwA,
    /// ORPK(*,b) with `y >= 0` only on `R_i^-`.
    ReducedLowerBounds,
    /// PK(a) without the `y <= 1` bounds.
    NoUpperBounds,
}

/// Identifies one catalog formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelId {
    pub family: Family,
    pub restriction: Restriction,
    pub agg1: Agg1,
    pub agg2: Agg2,
    /// FT with the symmetry pair written as one equality per unordered pair.
    pub symmetry_eq: bool,
    pub variant: Variant,
}

impl ModelId {
    pub const fn basic(family: Family) -> Self {
        Self {
            family,
            restriction: Restriction::Precise,
            agg1: Agg1::None,
            agg2: Agg2::None,
            symmetry_eq: false,
            variant: Variant::Standard,
        }
    }

    pub const fn or(self) -> Self {
        Self {
            restriction: Restriction::OptimalityRestricted,
            ..self
        }
    }

    pub const fn alpha(self) -> Self {
        Self {
            agg1: Agg1::Alpha,
            ..self
        }
    }

    pub const fn with(self, agg2: Agg2) -> Self {
        Self { agg2, ..self }
    }

    pub const fn variant(self, variant: Variant) -> Self {
        Self { variant, ..self }
    }

    pub fn is_or(&self) -> bool {
        self.restriction == Restriction::OptimalityRestricted
    }

    pub fn known_invalid(&self) -> bool {
        self.variant != Variant::Standard
            || matches!(self.agg2, Agg2::DwBeta | Agg2::HansenMeyer | Agg2::GammaAndThetaEq)
    }

    pub fn is_aggregated(&self) -> bool {
        self.agg1 != Agg1::None || self.agg2 != Agg2::None || self.variant == Variant::OrdwA
    }

    /// The unaggregated model of the same family and restriction.
    pub fn basic_of(&self) -> Self {
        let base = Self::basic(self.family);
        if self.is_or() {
            base.or()
        } else {
            base
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.variant == Variant::OrdwA {
            return f.write_str("ORDW-A");
        }
        if self.is_or() {
            f.write_str("OR")?;
        }
        let fam = match self.family {
            Family::DW => "DW",
            Family::GW => "GW",
            Family::FT => "FT",
            Family::PK => "PK",
        };
        f.write_str(fam)?;
        let a1 = match self.agg1 {
            Agg1::None => "*",
            Agg1::Alpha => "a",
        };
        if self.family == Family::FT {
            let (g, t) = match self.agg2 {
                Agg2::None => ("*", "*"),
                Agg2::Gamma => ("g", "*"),
                Agg2::Theta => ("*", "t"),
                Agg2::GammaAndTheta => ("g", "t"),
                Agg2::GammaAndThetaEq => ("g", "t="),
                _ => ("?", "?"),
            };
            if self.agg2 != Agg2::None {
                write!(f, "({a1},{g},{t})")?;
            } else if self.agg1 == Agg1::Alpha {
                f.write_str("(a)")?;
            }
        } else {
            let a2 = match self.agg2 {
                Agg2::None => None,
                Agg2::DwBeta | Agg2::PkBeta => Some("b"),
                Agg2::GammaPlusDelta => Some("g+d"),
                Agg2::GammaAndDelta => Some("g,d"),
                Agg2::Gamma => Some("g"),
                Agg2::Delta => Some("d"),
                Agg2::HansenMeyer => Some("hm"),
                _ => Some("?"),
            };
            match a2 {
                Some(a2) => write!(f, "({a1},{a2})")?,
                None if self.agg1 == Agg1::Alpha => f.write_str("(a)")?,
                None => {}
            }
        }
        if self.symmetry_eq {
            f.write_str("[=]")?;
        }
        match self.variant {
            Variant::ReducedLowerBounds => f.write_str("[lb-]"),
            Variant::NoUpperBounds => f.write_str("[ub-]"),
            _ => Ok(()),
        }
    }
}

fn normalize_arg(a: &str) -> String {
    let mut s = a.to_lowercase();
    for (from, to) in [
        ("alpha", "a"),
        ("beta", "b"),
        ("gamma", "g"),
        ("delta", "d"),
        ("theta", "t"),
        ("α", "a"),
        ("β", "b"),
        ("γ", "g"),
        ("δ", "d"),
        ("θ", "t"),
    ] {
        s = s.replace(from, to);
    }
    s
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(raw: &str) -> Result<Self> {
        let unknown = || Error::UnknownModel(raw.to_string());
        let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        if s.eq_ignore_ascii_case("ORDW-A") {
            return Ok(ModelId::basic(Family::DW).or().variant(Variant::OrdwA));
        }
        let mut rest = s.as_str();
        let mut symmetry_eq = false;
        let mut variant = Variant::Standard;
        loop {
            if let Some(r) = rest.strip_suffix("[=]") {
                symmetry_eq = true;
                rest = r;
            } else if let Some(r) = rest.strip_suffix("[lb-]") {
                variant = Variant::ReducedLowerBounds;
                rest = r;
            } else if let Some(r) = rest.strip_suffix("[ub-]") {
                variant = Variant::NoUpperBounds;
                rest = r;
            } else {
                break;
            }
        }
        let upper = rest.to_ascii_uppercase();
        let (restriction, body_start) = if upper.starts_with("OR") {
            (Restriction::OptimalityRestricted, 2)
        } else {
            (Restriction::Precise, 0)
        };
        let fam_str = upper.get(body_start..body_start + 2).ok_or_else(unknown)?;
        let family = match fam_str {
            "DW" => Family::DW,
            "GW" => Family::GW,
            "FT" => Family::FT,
            "PK" => Family::PK,
            _ => return Err(unknown()),
        };
        let tail = &rest[body_start + 2..];
        let args: Vec<String> = if tail.is_empty() {
            Vec::new()
        } else {
            let inner = tail
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(unknown)?;
            inner.split(',').map(normalize_arg).collect()
        };
        let args: Vec<&str> = args.iter().map(String::as_str).collect();

        let agg1 = match args.first().copied() {
            None | Some("*") => Agg1::None,
            Some("a") => Agg1::Alpha,
            _ => return Err(unknown()),
        };
        let agg2 = if family == Family::FT {
            let (g, t) = match &args[..] {
                [] | [_] => ("*", "*"),
                [_, x] if *x == "g" || *x == "*" => (*x, "*"),
                [_, x] => ("*", *x),
                [_, g, t] => (*g, *t),
                _ => return Err(unknown()),
            };
            match (g, t) {
                ("*", "*") => Agg2::None,
                ("g", "*") => Agg2::Gamma,
                ("*", "t") => Agg2::Theta,
                ("g", "t") => Agg2::GammaAndTheta,
                ("g", "t=") => Agg2::GammaAndThetaEq,
                _ => return Err(unknown()),
            }
        } else {
            let a2 = match &args[..] {
                [] | [_] => "*".to_string(),
                [_, rest @ ..] => rest.join(","),
            };
            match (family, a2.as_str()) {
                (_, "*") => Agg2::None,
                (Family::DW, "b") => Agg2::DwBeta,
                (Family::PK, "b") => Agg2::PkBeta,
                (Family::GW, "g+d") => Agg2::GammaPlusDelta,
                (Family::GW, "g,d") => Agg2::GammaAndDelta,
                (Family::GW, "g") => Agg2::Gamma,
                (Family::GW, "d") => Agg2::Delta,
                (Family::GW, "hm") => Agg2::HansenMeyer,
                _ => return Err(unknown()),
            }
        };
        let id = ModelId {
            family,
            restriction,
            agg1,
            agg2,
            symmetry_eq,
            variant,
        };
        if full_catalog().contains(&id) {
            Ok(id)
        } else {
            Err(unknown())
        }
    }
}

const TYPE2_PRECISE: [(Family, Agg2); 8] = [
    (Family::PK, Agg2::PkBeta),
    (Family::FT, Agg2::Gamma),
    (Family::FT, Agg2::Theta),
    (Family::FT, Agg2::GammaAndTheta),
    (Family::GW, Agg2::GammaPlusDelta),
    (Family::GW, Agg2::GammaAndDelta),
    (Family::GW, Agg2::Gamma),
    (Family::GW, Agg2::Delta),
];

const SIMULTANEOUS: [(Family, Agg2); 8] = [
    (Family::GW, Agg2::GammaPlusDelta),
    (Family::GW, Agg2::GammaAndDelta),
    (Family::GW, Agg2::Gamma),
    (Family::GW, Agg2::Delta),
    (Family::FT, Agg2::Gamma),
    (Family::FT, Agg2::Theta),
    (Family::FT, Agg2::GammaAndTheta),
    (Family::PK, Agg2::PkBeta),
];

const FAMILIES: [Family; 4] = [Family::DW, Family::GW, Family::FT, Family::PK];

/// Every valid catalog model, in a stable order.
pub fn catalog() -> Vec<ModelId> {
    let mut out = Vec::new();
    for f in FAMILIES {
        out.push(ModelId::basic(f));
    }
    for f in FAMILIES {
        out.push(ModelId::basic(f).or());
    }
    out.push(ModelId {
        symmetry_eq: true,
        ..ModelId::basic(Family::FT)
    });
    for f in FAMILIES {
        out.push(ModelId::basic(f).alpha());
    }
    for f in FAMILIES {
        out.push(ModelId::basic(f).or().alpha());
    }
    for (f, a2) in TYPE2_PRECISE {
        out.push(ModelId::basic(f).with(a2));
    }
    for (f, a2) in TYPE2_PRECISE {
        out.push(ModelId::basic(f).or().with(a2));
    }
    for (f, a2) in SIMULTANEOUS {
        out.push(ModelId::basic(f).alpha().with(a2));
    }
    for (f, a2) in SIMULTANEOUS {
        out.push(ModelId::basic(f).or().alpha().with(a2));
    }
    out
}

/// Models that are representable but known not to be valid formulations.
pub fn invalid_catalog() -> Vec<ModelId> {
    vec![
        ModelId::basic(Family::DW).with(Agg2::DwBeta),
        ModelId::basic(Family::GW).with(Agg2::HansenMeyer),
        ModelId::basic(Family::FT).alpha().with(Agg2::GammaAndThetaEq),
        ModelId::basic(Family::DW).or().variant(Variant::OrdwA),
        ModelId::basic(Family::PK).or().with(Agg2::PkBeta).variant(Variant::ReducedLowerBounds),
        ModelId::basic(Family::PK).alpha().variant(Variant::NoUpperBounds),
    ]
}

/// Valid and known-invalid models together.
pub fn full_catalog() -> Vec<ModelId> {
    let mut all = catalog();
    all.extend(invalid_catalog());
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn catalog_is_duplicate_free_and_valid() {
        let cat = catalog();
        assert_eq!(cat.len(), 49);
        let set: HashSet<_> = cat.iter().collect();
        assert_eq!(set.len(), cat.len());
        assert!(cat.iter().all(|m| !m.known_invalid()));
        assert!(invalid_catalog().iter().all(|m| m.known_invalid()));
        let names: HashSet<_> = full_catalog().iter().map(|m| m.name()).collect();
        assert_eq!(names.len(), full_catalog().len());
    }

    #[test]
    fn names_round_trip() {
        for id in full_catalog() {
            assert_eq!(id.name().parse::<ModelId>().unwrap(), id, "{}", id.name());
        }
    }

    #[test]
    fn basic_names_present() {
        let names: Vec<String> = catalog().iter().map(|m| m.name()).collect();
        for n in ["DW", "GW", "FT", "PK", "ORDW", "ORGW", "ORFT", "ORPK", "GW(a,g+d)", "ORPK(*,b)", "FT(*,g,t)"] {
            assert!(names.iter().any(|x| x == n), "{n}");
        }
    }

    #[test]
    fn aliases_parse() {
        let ft_g: ModelId = "FT(*,g,*)".parse().unwrap();
        assert_eq!("FT(*,g)".parse::<ModelId>().unwrap(), ft_g);
        assert_eq!("FT(*, γ)".parse::<ModelId>().unwrap(), ft_g);
        assert_eq!("FT(*,t)".parse::<ModelId>().unwrap().name(), "FT(*,*,t)");
        assert_eq!("FT(a,g)".parse::<ModelId>().unwrap().name(), "FT(a,g,*)");
        assert_eq!("GW(a,*)".parse::<ModelId>().unwrap().name(), "GW(a)");
        assert_eq!("GW(alpha,gamma+delta)".parse::<ModelId>().unwrap().name(), "GW(a,g+d)");
        assert_eq!("ordw-a".parse::<ModelId>().unwrap().name(), "ORDW-A");
    }

    #[test]
    fn unrepresentable_rejected() {
        for bad in ["DW(a,b)", "XX", "GW(b)", "PK(*,g)", "FT(*,*,t=)", "GW[=]", "", "DW(", "ORDW(*,b)"] {
            assert!(bad.parse::<ModelId>().is_err(), "{bad}");
        }
    }
}
