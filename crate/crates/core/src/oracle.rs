//! Brute-force ground truth and model verification.

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::{build_with, BuildOptions, ModelId, WeightSet};
use crate::instances::{generate_uniform, save_canonical};
use crate::milp::{feasible_integral_enumeration, solve_milp, MilpOptions, MilpStatus};
use crate::qubo::{qubo_value, QuboInstance, Rational};

pub const DEFAULT_CAP: usize = 24;
/// Largest `n` accepted by [`check_precision`].
pub const PRECISION_CAP: usize = 4;
const ARGMAX_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForce {
    pub value: Rational,
    /// Maximizers in lexicographic order, at most 64 of them.
    pub argmax: Vec<Vec<u8>>,
    pub argmax_truncated: bool,
}

/// Exact optimum over all `2^n` assignments.
pub fn brute_force_opt(inst: &QuboInstance) -> Result<BruteForce> {
    brute_force_opt_capped(inst, DEFAULT_CAP)
}

/// Gray-code enumeration on integer data scaled by the common denominator;
/// each step flips one bit and updates the value in `O(n)`.
pub fn brute_force_opt_capped(inst: &QuboInstance, cap: usize) -> Result<BruteForce> {
    let n = inst.n();
    if n > cap || n > 62 {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut lcm: i128 = 1;
    for i in 0..n {
        lcm = lcm.lcm(&(*inst.c(i).denom() as i128));
        for j in 0..n {
            lcm = lcm.lcm(&(*inst.q(i, j).denom() as i128));
        }
    }
    let scale = |r: Rational| -> i128 { *r.numer() as i128 * (lcm / *r.denom() as i128) };
    let pair: Vec<i128> = (0..n * n).map(|k| scale(inst.q(k / n, k % n)) + scale(inst.q(k % n, k / n))).collect();
    let mut field: Vec<i128> = (0..n).map(|i| scale(inst.c(i))).collect();
    let mut bits = vec![0u8; n];
    let mut value: i128 = 0;
    let mut best = 0i128;
    let mut argmax = vec![bits.clone()];
    let mut truncated = false;
    let total: u64 = 1u64 << n;
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        let sign: i128 = if bits[k] == 0 { 1 } else { -1 };
        value += sign * field[k];
        bits[k] ^= 1;
        for j in 0..n {
            if j != k {
                field[j] += sign * pair[j * n + k];
            }
        }
        if value > best {
            best = value;
            argmax.clear();
            argmax.push(bits.clone());
            truncated = false;
        } else if value == best {
            if argmax.len() < ARGMAX_CAP {
                argmax.push(bits.clone());
            } else {
                truncated = true;
            }
        }
    }
    argmax.sort();
    let num = best
        .to_i64()
        .ok_or_else(|| Error::InvalidInstance("objective overflows 64-bit rationals".into()))?;
    let den = lcm
        .to_i64()
        .ok_or_else(|| Error::InvalidInstance("denominators overflow 64-bit rationals".into()))?;
    Ok(BruteForce {
        value: Rational::new(num, den),
        argmax,
        argmax_truncated: truncated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    ValidConfirmed,
    InvalidWitness,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::ValidConfirmed => "VALID_CONFIRMED",
            Verdict::InvalidWitness => "INVALID_WITNESS",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// An instance on which a model's optimum differs from the true optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    /// The instance in canonical text form.
    pub instance: String,
    pub x: Vec<u8>,
    pub model_objective: f64,
    /// QUBO value of `x`.
    pub recomputed: Rational,
    pub true_optimum: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub model: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub instances_tested: usize,
    pub seeds: Vec<u64>,
    /// Instances that could not be decided, with the reason.
    pub failures: Vec<String>,
}

/// One verification instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteInstance {
    pub label: String,
    pub seed: Option<u64>,
    pub instance: QuboInstance,
}

impl SuiteInstance {
    pub fn new(label: impl Into<String>, instance: QuboInstance) -> Self {
        Self {
            label: label.into(),
            seed: None,
            instance,
        }
    }

    pub fn seeded(label: impl Into<String>, seed: u64, instance: QuboInstance) -> Self {
        Self {
            label: label.into(),
            seed: Some(seed),
            instance,
        }
    }
}

enum Outcome {
    Match,
    Mismatch(Witness),
    Failed(String),
}

const MATCH_TOL: f64 = 1e-6;

fn check_one(
    id: &ModelId,
    item: &SuiteInstance,
    w: &WeightSet,
    build: &BuildOptions,
    milp: &MilpOptions,
) -> Outcome {
    let run = || -> Result<Outcome> {
        let truth = brute_force_opt(&item.instance)?;
        let model = build_with(id, &item.instance, w, build)?;
        let r = solve_milp(&model, &item.instance, milp)?;
        if r.status != MilpStatus::Optimal {
            return Ok(Outcome::Failed(format!("{}: MILP status {}", item.label, r.status)));
        }
        let z = r.model_objective.expect("optimal has incumbent");
        let x = r.x.clone().unwrap_or_default();
        let recomputed = qubo_value(&item.instance, &x)?;
        if (z - crate::qubo::to_f64(truth.value)).abs() <= MATCH_TOL {
            Ok(Outcome::Match)
        } else {
            Ok(Outcome::Mismatch(Witness {
                label: item.label.clone(),
                instance: save_canonical(&item.instance),
                x,
                model_objective: z,
                recomputed,
                true_optimum: truth.value,
            }))
        }
    };
    run().unwrap_or_else(|e| Outcome::Failed(format!("{}: {e}", item.label)))
}

/// Solves `id` on every suite instance and compares with the brute-force
/// optimum. The first mismatch in suite order is the witness.
pub fn verify_model(
    id: &ModelId,
    suite: &[SuiteInstance],
    w: &WeightSet,
    build: &BuildOptions,
    milp: &MilpOptions,
) -> VerificationReport {
    let outcomes: Vec<Outcome> = suite.par_iter().map(|item| check_one(id, item, w, build, milp)).collect();
    let mut failures = Vec::new();
    let mut witness = None;
    for o in outcomes {
        match o {
            Outcome::Match => {}
            Outcome::Mismatch(wit) => {
                if witness.is_none() {
                    witness = Some(wit);
                }
            }
            Outcome::Failed(msg) => failures.push(msg),
        }
    }
    let verdict = if witness.is_some() {
        Verdict::InvalidWitness
    } else if failures.is_empty() && !suite.is_empty() {
        Verdict::ValidConfirmed
    } else {
        Verdict::Inconclusive
    };
    VerificationReport {
        model: id.name(),
        verdict,
        witness,
        instances_tested: suite.len(),
        seeds: suite.iter().filter_map(|s| s.seed).collect(),
        failures,
    }
}

/// Randomized counterexample search: instances with `n ∈ {3..6}` and
/// coefficients in `[-10, 10]`, drawn from consecutive seeds. Without a
/// witness the verdict is `Inconclusive`, never valid.
pub fn search_counterexample(
    id: &ModelId,
    w: &WeightSet,
    build: &BuildOptions,
    seed: u64,
    max_instances: usize,
) -> VerificationReport {
    const BATCH: usize = 256;
    let mut tested = 0;
    let mut seeds = Vec::new();
    let mut failures = Vec::new();
    while tested < max_instances {
        let count = BATCH.min(max_instances - tested);
        let suite: Vec<SuiteInstance> = (0..count)
            .map(|k| {
                let s = seed + (tested + k) as u64;
                let n = 3 + (s % 4) as usize;
                let density = if s.is_multiple_of(3) { 0.6 } else { 1.0 };
                let inst = generate_uniform(n, (-10, 10), (-10, 10), density, s).expect("valid generator arguments");
                SuiteInstance::seeded(format!("search-{s}"), s, inst)
            })
            .collect();
        let mut report = verify_model(id, &suite, w, build, &MilpOptions::default());
        tested += count;
        seeds.append(&mut report.seeds);
        failures.append(&mut report.failures);
        if report.witness.is_some() {
            report.instances_tested = tested;
            report.seeds = seeds;
            report.failures = failures;
            return report;
        }
    }
    VerificationReport {
        model: id.name(),
        verdict: Verdict::Inconclusive,
        witness: None,
        instances_tested: tested,
        seeds,
        failures,
    }
}

/// Whether every feasible integral solution has `y_ij = x_i x_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Precision {
    Precise,
    Restricted {
        x: Vec<u8>,
        /// Column values of the offending feasible solution.
        values: Vec<f64>,
        model_objective: f64,
        recomputed: Rational,
    },
}

pub fn check_precision(id: &ModelId, inst: &QuboInstance, w: &WeightSet, build: &BuildOptions) -> Result<Precision> {
    let model = build_with(id, inst, w, build)?;
    let points = feasible_integral_enumeration(&model, inst, PRECISION_CAP)?;
    for p in points {
        if let Some(values) = p.witness {
            return Ok(Precision::Restricted {
                model_objective: model.objective_value(&values),
                recomputed: qubo_value(inst, &p.x)?,
                x: p.x,
                values,
            });
        }
    }
    Ok(Precision::Precise)
}

/// `true` when `value` is a whole number.
pub fn is_integral(value: Rational) -> bool {
    (value - value.trunc()).is_zero()
}
