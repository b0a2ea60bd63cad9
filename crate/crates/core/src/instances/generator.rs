//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::{build, Family, ModelId, WeightSet};
use crate::lp::solve_lp;
use crate::qubo::{QuboInstance, Rational};

/// When a draw counts as balanced, judged on the `x` part of the GW LP
/// optimum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BalanceRule {
    /// Every `x_i = 1/2`.
    #[default]
    AllHalf,
    /// Every `x_i ∈ {0, 1/2, 1}` and at least one equals `1/2`.
    HalfIntegralSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub c_range: (i64, i64),
    pub q_range: (i64, i64),
    pub seed: u64,
    pub rule: BalanceRule,
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 10,
            c_range: (-10, 10),
            q_range: (-20, 20),
            seed: 0,
            rule: BalanceRule::AllHalf,
            max_attempts: 10_000,
        }
    }
}

impl GeneratorConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config("balanced generation needs n >= 2".into()));
        }
        check_range("c", self.c_range)?;
        check_range("q", self.q_range)?;
        if self.max_attempts == 0 {
            return Err(Error::Config("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

fn check_range(name: &str, (lo, hi): (i64, i64)) -> Result<()> {
    if lo > hi {
        return Err(Error::Config(format!("{name} range [{lo},{hi}] is empty")));
    }
    Ok(())
}

/// How many draws a balanced instance took.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancedTrace {
    pub attempts: usize,
    pub rejected: usize,
    /// GW LP value of the accepted instance.
    pub lp_value: f64,
}

const HALF_TOL: f64 = 1e-7;

/// `x` part of the GW LP optimum.
pub fn gw_lp_x(inst: &QuboInstance) -> Result<(f64, Vec<f64>)> {
    let m = build(&ModelId::basic(Family::GW), inst, &WeightSet::unit())?;
    let r = solve_lp(&m)?;
    if !r.is_optimal() {
        return Err(Error::NotOptimal(r.status.name().to_string()));
    }
    Ok((r.objective, r.primal[..inst.n()].to_vec()))
}

pub fn satisfies_rule(x: &[f64], rule: BalanceRule) -> bool {
    let near = |v: f64, t: f64| (v - t).abs() <= HALF_TOL;
    match rule {
        BalanceRule::AllHalf => x.iter().all(|&v| near(v, 0.5)),
        BalanceRule::HalfIntegralSet => {
            x.iter().all(|&v| near(v, 0.0) || near(v, 0.5) || near(v, 1.0)) && x.iter().any(|&v| near(v, 0.5))
        }
    }
}

fn draw_dense(rng: &mut ChaCha8Rng, n: usize, c_range: (i64, i64), q_range: (i64, i64)) -> QuboInstance {
    let mut q = vec![vec![Rational::from_integer(0); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = Rational::from_integer(rng.gen_range(q_range.0..=q_range.1));
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    let c = (0..n)
        .map(|_| Rational::from_integer(rng.gen_range(c_range.0..=c_range.1)))
        .collect();
    QuboInstance::new(q, c).expect("symmetric by construction")
}

/// Draws instances until the GW LP optimum satisfies `cfg.rule`.
pub fn generate_balanced(cfg: &GeneratorConfig) -> Result<(QuboInstance, BalancedTrace)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for attempt in 1..=cfg.max_attempts {
        let inst = draw_dense(&mut rng, cfg.n, cfg.c_range, cfg.q_range);
        let (value, x) = gw_lp_x(&inst)?;
        if satisfies_rule(&x, cfg.rule) {
            return Ok((
                inst,
                BalancedTrace {
                    attempts: attempt,
                    rejected: attempt - 1,
                    lp_value: value,
                },
            ));
        }
    }
    Err(Error::AttemptsExhausted(cfg.max_attempts))
}

/// Each upper-triangle pair is structurally nonzero with probability
/// `density`; its value is drawn from `q_range` with zeros redrawn. The
/// matrix is completed symmetrically.
pub fn generate_uniform(
    n: usize,
    c_range: (i64, i64),
    q_range: (i64, i64),
    density: f64,
    seed: u64,
) -> Result<QuboInstance> {
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Config(format!("density {density} is outside (0, 1]")));
    }
    check_range("c", c_range)?;
    check_range("q", q_range)?;
    let only_zero = q_range == (0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = vec![vec![Rational::from_integer(0); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if !rng.gen_bool(density) || only_zero {
                continue;
            }
            let v = loop {
                let v = rng.gen_range(q_range.0..=q_range.1);
                if v != 0 {
                    break v;
                }
            };
            q[i][j] = Rational::from_integer(v);
            q[j][i] = Rational::from_integer(v);
        }
    }
    let c = (0..n)
        .map(|_| Rational::from_integer(rng.gen_range(c_range.0..=c_range.1)))
        .collect();
    QuboInstance::new(q, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::validate;

    #[test]
    fn uniform_is_seeded_and_structural() {
        let a = generate_uniform(6, (-10, 10), (-20, 20), 1.0, 7).unwrap();
        let b = generate_uniform(6, (-10, 10), (-20, 20), 1.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.nonzero_pairs(), 15);
        validate(&a).unwrap();
        assert_ne!(a, generate_uniform(6, (-10, 10), (-20, 20), 1.0, 8).unwrap());
    }

    #[test]
    fn uniform_rejects_bad_density() {
        assert!(generate_uniform(4, (0, 1), (0, 1), 0.0, 1).is_err());
        assert!(generate_uniform(4, (0, 1), (0, 1), 1.5, 1).is_err());
    }

    #[test]
    fn zero_matrix_never_balances() {
        let cfg = GeneratorConfig {
            n: 4,
            q_range: (0, 0),
            max_attempts: 20,
            ..GeneratorConfig::default()
        };
        assert_eq!(generate_balanced(&cfg).unwrap_err(), Error::AttemptsExhausted(20));
    }

    #[test]
    fn config_validation() {
        assert!(GeneratorConfig::new(1, 0).validate().is_err());
        let cfg = GeneratorConfig {
            c_range: (3, 2),
            ..GeneratorConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn half_integral_rule() {
        assert!(satisfies_rule(&[0.5, 0.5], BalanceRule::AllHalf));
        assert!(!satisfies_rule(&[0.5, 1.0], BalanceRule::AllHalf));
        assert!(satisfies_rule(&[0.5, 1.0], BalanceRule::HalfIntegralSet));
        assert!(!satisfies_rule(&[0.0, 1.0], BalanceRule::HalfIntegralSet));
        assert!(!satisfies_rule(&[0.25, 0.5], BalanceRule::HalfIntegralSet));
    }
}
