use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeightKind {
    Alpha,
    Beta,
    Gamma,
    Delta,
    Theta,
}

impl WeightKind {
    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Alpha => "alpha",
            WeightKind::Beta => "beta",
            WeightKind::Gamma => "gamma",
            WeightKind::Delta => "delta",
            WeightKind::Theta => "theta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" | "a" => Some(WeightKind::Alpha),
            "beta" | "b" => Some(WeightKind::Beta),
            "gamma" | "g" => Some(WeightKind::Gamma),
            "delta" | "d" => Some(WeightKind::Delta),
            "theta" | "t" => Some(WeightKind::Theta),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightMode {
    Unit,
    Custom,
    DualExact,
    DualMilpSafe,
}

impl WeightMode {
    pub fn name(self) -> &'static str {
        match self {
            WeightMode::Unit => "unit",
            WeightMode::Custom => "custom",
            WeightMode::DualExact => "dual-exact",
            WeightMode::DualMilpSafe => "dual-safe",
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Aggregation multipliers keyed by 0-based `(i, j)`.
///
/// `alpha(i,j)` weighs the type-1 row of pair `(i,j)`, `beta(i,j)` the
/// pair-sum or diagonal row, `gamma(i,j)` the row link `y_ij <= x_i`,
/// `delta(i,j)` the column link `y_ji <= x_i` of row `i`, and `theta(i,j)`
/// the symmetry row `y_ij <= y_ji`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    pub mode: WeightMode,
    maps: [BTreeMap<(usize, usize), f64>; 5],
    /// Value used for weights missing from a `Custom` set.
    pub default: Option<f64>,
    /// Replacement for zero duals in `DualMilpSafe` mode.
    pub epsilon: f64,
}

impl Default for WeightSet {
    fn default() -> Self {
        Self::unit()
    }
}

impl WeightSet {
    pub fn unit() -> Self {
        Self {
            mode: WeightMode::Unit,
            maps: Default::default(),
            default: Some(1.0),
            epsilon: 1.0,
        }
    }

    pub fn custom() -> Self {
        Self {
            mode: WeightMode::Custom,
            default: None,
            ..Self::unit()
        }
    }

    pub fn with_mode(mode: WeightMode) -> Self {
        Self {
            mode,
            default: None,
            ..Self::unit()
        }
    }

    pub fn with_default(mut self, v: f64) -> Self {
        self.default = Some(v);
        self
    }

    pub fn set(&mut self, kind: WeightKind, i: usize, j: usize, v: f64) {
        self.maps[kind.slot()].insert((i, j), v);
    }

    pub fn with(mut self, kind: WeightKind, i: usize, j: usize, v: f64) -> Self {
        self.set(kind, i, j, v);
        self
    }

    pub fn raw(&self, kind: WeightKind, i: usize, j: usize) -> Option<f64> {
        self.maps[kind.slot()].get(&(i, j)).copied()
    }

    pub fn entries(&self, kind: WeightKind) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.maps[kind.slot()].iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.maps.iter().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Merges another fragment into this one; existing keys are overwritten.
    pub fn extend(&mut self, other: &WeightSet) {
        for (dst, src) in self.maps.iter_mut().zip(&other.maps) {
            dst.extend(src.iter().map(|(&k, &v)| (k, v)));
        }
    }

    /// The weight the builder uses, before positivity checks.
    pub fn resolve(&self, kind: WeightKind, i: usize, j: usize) -> Result<f64> {
        if self.mode == WeightMode::Unit {
            return Ok(1.0);
        }
        let v = match (self.raw(kind, i, j), self.default) {
            (Some(v), _) => v,
            (None, Some(d)) => d,
            (None, None) => {
                return Err(Error::MissingWeight {
                    kind: kind.name(),
                    i: i + 1,
                    j: j + 1,
                })
            }
        };
        if self.mode == WeightMode::DualMilpSafe && v.abs() <= 1e-9 {
            return Ok(self.epsilon);
        }
        Ok(v)
    }

    /// The same weights with every zero replaced by `epsilon`.
    pub fn milp_safe(&self) -> Self {
        let mut out = self.clone();
        out.mode = WeightMode::DualMilpSafe;
        out
    }

    /// Parses `kind i j value` lines (1-based indices). Blank lines and
    /// lines starting with `#` are skipped. A `default value` line sets the
    /// fallback weight.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut w = Self::custom();
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = t.split_whitespace().collect();
            let err = |col: usize, msg: &str| Error::Parse {
                line: line_no,
                column: col,
                message: msg.to_string(),
            };
            if fields[0].eq_ignore_ascii_case("default") {
                let v = fields.get(1).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| err(2, "expected a number"))?;
                w.default = Some(v);
                continue;
            }
            if fields.len() != 4 {
                return Err(err(1, "expected `kind i j value`"));
            }
            let kind = WeightKind::parse(fields[0]).ok_or_else(|| err(1, "unknown weight kind"))?;
            let i: usize = fields[1].parse().map_err(|_| err(2, "bad index"))?;
            let j: usize = fields[2].parse().map_err(|_| err(3, "bad index"))?;
            if i == 0 || j == 0 {
                return Err(err(2, "indices are 1-based"));
            }
            let v: f64 = fields[3].parse().map_err(|_| err(4, "bad value"))?;
            w.set(kind, i - 1, j - 1, v);
        }
        Ok(w)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(d) = self.default {
            out.push_str(&format!("default {d}\n"));
        }
        for kind in [
            WeightKind::Alpha,
            WeightKind::Beta,
            WeightKind::Gamma,
            WeightKind::Delta,
            WeightKind::Theta,
        ] {
            for ((i, j), v) in self.entries(kind) {
                out.push_str(&format!("{} {} {} {}\n", kind.name(), i + 1, j + 1, v));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_is_always_one() {
        let w = WeightSet::unit().with(WeightKind::Alpha, 0, 1, 5.0);
        assert_eq!(w.resolve(WeightKind::Alpha, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn custom_requires_coverage() {
        let w = WeightSet::custom().with(WeightKind::Beta, 0, 1, 2.0);
        assert_eq!(w.resolve(WeightKind::Beta, 0, 1).unwrap(), 2.0);
        assert_eq!(
            w.resolve(WeightKind::Beta, 1, 0),
            Err(Error::MissingWeight { kind: "beta", i: 2, j: 1 })
        );
        let w = w.with_default(1.0);
        assert_eq!(w.resolve(WeightKind::Beta, 1, 0).unwrap(), 1.0);
    }

    #[test]
    fn safe_mode_replaces_zeros() {
        let mut w = WeightSet::with_mode(WeightMode::DualExact);
        w.set(WeightKind::Gamma, 0, 1, 0.0);
        w.set(WeightKind::Gamma, 1, 0, 0.25);
        assert_eq!(w.resolve(WeightKind::Gamma, 0, 1).unwrap(), 0.0);
        let mut s = w.milp_safe();
        assert_eq!(s.resolve(WeightKind::Gamma, 0, 1).unwrap(), 1.0);
        assert_eq!(s.resolve(WeightKind::Gamma, 1, 0).unwrap(), 0.25);
        s.epsilon = 0.5;
        assert_eq!(s.resolve(WeightKind::Gamma, 0, 1).unwrap(), 0.5);
    }

    #[test]
    fn text_round_trip() {
        let w = WeightSet::custom()
            .with_default(1.0)
            .with(WeightKind::Alpha, 0, 3, 3.0)
            .with(WeightKind::Alpha, 2, 3, 6.0);
        let back = WeightSet::parse_text(&w.to_text()).unwrap();
        assert_eq!(back, w);
        assert!(WeightSet::parse_text("alpha 0 1 2").is_err());
        assert!(WeightSet::parse_text("omega 1 2 2").is_err());
    }
}
