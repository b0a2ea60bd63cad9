//! QUBO instances: `maximize xᵀQx + cᵀx` over binary `x`.
//!
//! Indices are 0-based inside the library. Every external format (files,
//! reports, CLI output, row and column names) uses 1-based indices; the
//! conversion happens only at those boundaries.

use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Rational64;

/// A QUBO instance with a square coefficient matrix and a linear vector.
///
/// Instances are immutable after construction. The default constructor
/// requires a symmetric zero-diagonal matrix; [`QuboInstance::new_asymmetric`]
/// is a research mode for the asymmetric regression example only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuboInstance {
    n: usize,
    q: Vec<Rational>,
    c: Vec<Rational>,
    asymmetric: bool,
}

/// Per-row sign pattern of `Q`.
///
/// `r[i]` lists the columns `j` with `q_ij != 0`, split into `r_plus` and
/// `r_minus`; `s[i]` lists the rows `j` with `q_ji != 0`. Lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSets {
    pub r: Vec<Vec<usize>>,
    pub r_plus: Vec<Vec<usize>>,
    pub r_minus: Vec<Vec<usize>>,
    pub s: Vec<Vec<usize>>,
    pub s_plus: Vec<Vec<usize>>,
    pub s_minus: Vec<Vec<usize>>,
}

/// First problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    Asymmetric { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    PatternAsymmetric { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "empty instance"),
            Violation::Asymmetric { i, j } => write!(f, "asymmetric at ({},{})", i + 1, j + 1),
            Violation::NonzeroDiagonal { i } => write!(f, "nonzero diagonal at {}", i + 1),
            Violation::PatternAsymmetric { i, j } => {
                write!(f, "sparsity pattern asymmetric at ({},{})", i + 1, j + 1)
            }
        }
    }
}

/// Checks the structural invariants of a raw `(q, c)` pair.
///
/// Rational entries are always finite, so only symmetry, the diagonal and
/// the dimension are checked. With `allow_asymmetric` only the sparsity
/// pattern has to be symmetric.
pub fn validate_parts(
    q: &[Vec<Rational>],
    c: &[Rational],
    allow_asymmetric: bool,
) -> std::result::Result<(), String> {
    let n = c.len();
    if n == 0 {
        return Err(Violation::Empty.to_string());
    }
    if q.len() != n {
        return Err(format!("q has {} rows, c has {} entries", q.len(), n));
    }
    for (i, row) in q.iter().enumerate() {
        if row.len() != n {
            return Err(format!("row {} has {} entries, expected {}", i + 1, row.len(), n));
        }
    }
    for i in 0..n {
        if !q[i][i].is_zero() {
            return Err(Violation::NonzeroDiagonal { i }.to_string());
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if allow_asymmetric {
                if q[i][j].is_zero() != q[j][i].is_zero() {
                    return Err(Violation::PatternAsymmetric { i, j }.to_string());
                }
            } else if q[i][j] != q[j][i] {
                return Err(Violation::Asymmetric { i, j }.to_string());
            }
        }
    }
    Ok(())
}

impl QuboInstance {
    /// Builds a validated symmetric instance.
    pub fn new(q: Vec<Vec<Rational>>, c: Vec<Rational>) -> Result<Self> {
        validate_parts(&q, &c, false).map_err(Error::InvalidInstance)?;
        Ok(Self::from_parts(q, c, false))
    }

    /// Research mode: keeps an asymmetric `Q` (zero diagonal and symmetric
    /// sparsity pattern are still required).
    pub fn new_asymmetric(q: Vec<Vec<Rational>>, c: Vec<Rational>) -> Result<Self> {
        validate_parts(&q, &c, true).map_err(Error::InvalidInstance)?;
        let asym = (0..c.len()).any(|i| (0..c.len()).any(|j| q[i][j] != q[j][i]));
        Ok(Self::from_parts(q, c, asym))
    }

    /// Convenience constructor from integer data.
    pub fn from_integers(q: &[Vec<i64>], c: &[i64]) -> Result<Self> {
        let q = q
            .iter()
            .map(|row| row.iter().map(|&v| Rational::from_integer(v)).collect())
            .collect();
        let c = c.iter().map(|&v| Rational::from_integer(v)).collect();
        Self::new(q, c)
    }

    fn from_parts(q: Vec<Vec<Rational>>, c: Vec<Rational>, asymmetric: bool) -> Self {
        let n = c.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in q {
            flat.extend(row);
        }
        Self {
            n,
            q: flat,
            c,
            asymmetric,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self, i: usize, j: usize) -> Rational {
        self.q[i * self.n + j]
    }

    pub fn c(&self, i: usize) -> Rational {
        self.c[i]
    }

    pub fn q_f64(&self, i: usize, j: usize) -> f64 {
        to_f64(self.q(i, j))
    }

    pub fn c_f64(&self, i: usize) -> f64 {
        to_f64(self.c(i))
    }

    pub fn is_asymmetric(&self) -> bool {
        self.asymmetric
    }

    pub fn linear(&self) -> &[Rational] {
        &self.c
    }

    pub fn matrix_rows(&self) -> Vec<Vec<Rational>> {
        self.q.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Transposed instance (same `c`, `Qᵀ`).
    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut q = vec![vec![Rational::zero(); n]; n];
        for (i, row) in q.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.q(j, i);
            }
        }
        Self::from_parts(q, self.c.clone(), self.asymmetric)
    }

    /// Simultaneous row/column permutation: new index `k` is old `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let q = (0..n)
            .map(|a| (0..n).map(|b| self.q(perm[a], perm[b])).collect())
            .collect();
        let c = (0..n).map(|a| self.c[perm[a]]).collect();
        Self::from_parts(q, c, self.asymmetric)
    }

    /// Number of unordered pairs `{i,j}` with a structural nonzero.
    pub fn nonzero_pairs(&self) -> usize {
        let mut count = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if !self.q(i, j).is_zero() {
                    count += 1;
                }
            }
        }
        count
    }

    /// Stable content hash used to tie models to the instance they were
    /// built from.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |s: &str| {
            for b in s.bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
            h ^= 0xff;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        feed(&self.n.to_string());
        for v in &self.c {
            feed(&v.to_string());
        }
        for v in &self.q {
            feed(&v.to_string());
        }
        format!("{h:016x}")
    }
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Objective value `Σ_i Σ_{j∈R_i} q_ij x_i x_j + Σ_i c_i x_i`, both
/// orientations of every pair counted.
pub fn qubo_value(inst: &QuboInstance, x: &[u8]) -> Result<Rational> {
    if x.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    if let Some((index, &v)) = x.iter().enumerate().find(|(_, &v)| v > 1) {
        return Err(Error::NonBinary {
            index: index + 1,
            value: v.to_string(),
        });
    }
    let n = inst.n();
    let mut total = Rational::zero();
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        total += inst.c(i);
        for j in 0..n {
            if x[j] == 1 && j != i {
                total += inst.q(i, j);
            }
        }
    }
    Ok(total)
}

/// [`qubo_value`] on a float vector whose entries are already 0/1 within
/// `tol`. Entries are rounded first.
pub fn qubo_value_rounded(inst: &QuboInstance, x: &[f64], tol: f64) -> Result<Rational> {
    let mut bits = Vec::with_capacity(x.len());
    for (index, &v) in x.iter().enumerate() {
        let r = v.round();
        if (v - r).abs() > tol || !(r == 0.0 || r == 1.0) {
            return Err(Error::NonBinary {
                index: index + 1,
                value: v.to_string(),
            });
        }
        bits.push(r as u8);
    }
    qubo_value(inst, &bits)
}

pub fn index_sets(inst: &QuboInstance) -> IndexSets {
    let n = inst.n();
    let mut sets = IndexSets {
        r: vec![Vec::new(); n],
        r_plus: vec![Vec::new(); n],
        r_minus: vec![Vec::new(); n],
        s: vec![Vec::new(); n],
        s_plus: vec![Vec::new(); n],
        s_minus: vec![Vec::new(); n],
    };
    let zero = Rational::zero();
    for i in 0..n {
        for j in 0..n {
            let v = inst.q(i, j);
            if v > zero {
                sets.r[i].push(j);
                sets.r_plus[i].push(j);
            } else if v < zero {
                sets.r[i].push(j);
                sets.r_minus[i].push(j);
            }
            let w = inst.q(j, i);
            if w > zero {
                sets.s[i].push(j);
                sets.s_plus[i].push(j);
            } else if w < zero {
                sets.s[i].push(j);
                sets.s_minus[i].push(j);
            }
        }
    }
    sets
}

/// Validates an instance, returning the first violation as text.
pub fn validate(inst: &QuboInstance) -> std::result::Result<(), String> {
    validate_parts(&inst.matrix_rows(), &inst.c, false)
}

impl IndexSets {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Total number of ordered pairs `(i,j)` with `j ∈ R_i`.
    pub fn pair_count(&self) -> usize {
        self.r.iter().map(Vec::len).sum()
    }

    pub fn plus_count(&self) -> usize {
        self.r_plus.iter().map(Vec::len).sum()
    }

    pub fn minus_count(&self) -> usize {
        self.r_minus.iter().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex2() -> QuboInstance {
        QuboInstance::from_integers(
            &[
                vec![0, 3, -6, -3],
                vec![3, 0, 6, 3],
                vec![-6, 6, 0, -6],
                vec![-3, 3, -6, 0],
            ],
            &[-3, -6, 0, 3],
        )
        .unwrap()
    }

    #[test]
    fn value_of_ex1_all_ones_is_two() {
        let inst = QuboInstance::from_integers(&[vec![0, 1], vec![1, 0]], &[0, 0]).unwrap();
        assert_eq!(qubo_value(&inst, &[1, 1]).unwrap(), Rational::from_integer(2));
        assert_eq!(qubo_value(&inst, &[0, 0]).unwrap(), Rational::zero());
    }

    #[test]
    fn value_of_ex2_optimum() {
        assert_eq!(qubo_value(&ex2(), &[0, 1, 1, 0]).unwrap(), Rational::from_integer(6));
    }

    #[test]
    fn value_rejects_bad_vectors() {
        let inst = ex2();
        assert!(matches!(
            qubo_value(&inst, &[0, 1]),
            Err(Error::DimensionMismatch { expected: 4, got: 2 })
        ));
        assert!(matches!(
            qubo_value(&inst, &[0, 2, 0, 0]),
            Err(Error::NonBinary { index: 2, .. })
        ));
    }

    #[test]
    fn index_sets_of_ex2_row_one() {
        let s = index_sets(&ex2());
        assert_eq!(s.r[0], vec![1, 2, 3]);
        assert_eq!(s.r_plus[0], vec![1]);
        assert_eq!(s.r_minus[0], vec![2, 3]);
        assert_eq!(s.r, s.s);
    }

    #[test]
    fn index_sets_of_zero_matrix_are_empty() {
        let inst = QuboInstance::from_integers(&[vec![0; 3], vec![0; 3], vec![0; 3]], &[1, 2, 3])
            .unwrap();
        let s = index_sets(&inst);
        assert!(s.r.iter().all(Vec::is_empty));
        assert_eq!(s.pair_count(), 0);
    }

    #[test]
    fn validation_messages() {
        let r = |v: i64| Rational::from_integer(v);
        let err = QuboInstance::new(vec![vec![r(0), r(1)], vec![r(2), r(0)]], vec![r(0), r(0)])
            .unwrap_err();
        assert_eq!(err, Error::InvalidInstance("asymmetric at (1,2)".into()));
        let err = QuboInstance::new(vec![vec![r(1)]], vec![r(0)]).unwrap_err();
        assert_eq!(err, Error::InvalidInstance("nonzero diagonal at 1".into()));
        assert!(validate(&ex2()).is_ok());
    }

    #[test]
    fn asymmetric_research_mode_keeps_values() {
        let r = |v: i64| Rational::from_integer(v);
        let inst = QuboInstance::new_asymmetric(
            vec![vec![r(0), r(3)], vec![r(-1), r(0)]],
            vec![r(-1), r(-1)],
        )
        .unwrap();
        assert!(inst.is_asymmetric());
        assert_eq!(inst.q(0, 1), r(3));
        assert_eq!(inst.q(1, 0), r(-1));
        let sets = index_sets(&inst);
        assert_eq!(sets.r_plus[0], vec![1]);
        assert_eq!(sets.s_minus[0], vec![1]);
    }
}
