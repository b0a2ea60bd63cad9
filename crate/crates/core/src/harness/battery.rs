//! The acceptance battery shared by the integration tests and `qubolin suite`.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::suites::{dual_weight_equality_suite, lp_equivalence_suite, random_suite, theorem_aggregations, CheckRow};
use crate::error::{Error, Result};
use crate::formulations::{
    build_with, catalog, expected_constraint_count, full_catalog, BuildOptions, Family, ModelId, WeightSet,
};
use crate::instances::{fixtures, generate_balanced, generate_uniform, satisfies_rule, BalanceRule, GeneratorConfig};
use crate::lp::solve_lp;
use crate::milp::{solve_milp, MilpOptions, MilpStatus};
use crate::model::{count_general_constraints, export_lp, export_mps, import_lp, import_mps, MilpModel};
use crate::oracle::{brute_force_opt, check_precision, verify_model, Precision, SuiteInstance, Verdict};
use crate::qubo::{QuboInstance, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionStatus {
    Pass,
    Fail,
    /// Deliberately out of scope; neither passes nor fails.
    Declared,
}

impl CriterionStatus {
    pub fn name(self) -> &'static str {
        match self {
            CriterionStatus::Pass => "PASS",
            CriterionStatus::Fail => "FAIL",
            CriterionStatus::Declared => "NOT REPRODUCED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub status: CriterionStatus,
    /// One line per sub-check.
    pub details: Vec<String>,
    pub elapsed_ms: u128,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.status != CriterionStatus::Fail
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "criterion {:>2} {:<14} {}", self.id, self.status.name(), self.title)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatteryOptions {
    /// Restrict random instances to `n <= 6`.
    pub quick: bool,
    pub random_count: usize,
    pub seed: u64,
    /// Run only these criteria; empty runs all.
    pub only: Vec<u8>,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self {
            quick: false,
            random_count: 50,
            seed: 20_240_601,
            only: Vec::new(),
        }
    }
}

impl BatteryOptions {
    fn random(&self) -> Vec<(String, QuboInstance)> {
        let mut suite = random_suite(self.random_count, self.seed);
        if self.quick {
            suite.retain(|(_, inst)| inst.n() <= 6);
        }
        suite
    }
}

/// Collects sub-check lines and whether all of them held.
#[derive(Default)]
struct Log {
    ok: bool,
    lines: Vec<String>,
}

impl Log {
    fn new() -> Self {
        Self {
            ok: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        let line = line.into();
        self.ok &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn error(&mut self, what: &str, e: impl fmt::Display) {
        self.check(false, format!("{what}: {e}"));
    }

    fn checks(&mut self, rows: &[CheckRow], what: &str) {
        let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.passed).collect();
        for r in failed.iter().take(10) {
            let why = r.error.clone().unwrap_or_else(|| format!("lhs={} rhs={} margin={:e}", r.lhs, r.rhs, r.margin));
            self.check(false, format!("{what}: {} {} {}: {why}", r.instance, r.subject, r.check));
        }
        let worst = rows.iter().map(|r| r.margin).filter(|m| m.is_finite()).fold(f64::INFINITY, f64::min);
        self.check(
            failed.is_empty(),
            format!("{what}: {}/{} checks hold, smallest margin {worst:e}", rows.len() - failed.len(), rows.len()),
        );
    }
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

/// One expected value from the embedded regression fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionCase {
    /// `milp` compares the MILP optimum with the brute-force optimum;
    /// `lp` checks the LP relaxation value.
    pub kind: String,
    pub model: String,
    pub instance: String,
    /// `unit`, or `;`-separated `kind i j value` entries over unit defaults.
    pub weights: String,
    pub expected: f64,
    pub truth: Option<i64>,
}

impl RegressionCase {
    pub fn weight_set(&self) -> Result<WeightSet> {
        if self.weights == "unit" {
            return Ok(WeightSet::unit());
        }
        WeightSet::parse_text(&format!("default 1\n{}", self.weights.replace(';', "\n")))
    }

    pub fn fixture(&self) -> Result<QuboInstance> {
        fixtures::by_name(&self.instance).ok_or_else(|| Error::Config(format!("unknown fixture {}", self.instance)))
    }

    fn label(&self) -> String {
        match self.weights.as_str() {
            "unit" => format!("{} on {}", self.model, self.instance),
            w => format!("{} on {} [{w}]", self.model, self.instance),
        }
    }
}

/// The counterexample and LP values every build must reproduce exactly.
pub fn regression_cases() -> Vec<RegressionCase> {
    csv::Reader::from_reader(include_str!("regression.csv").as_bytes())
        .deserialize()
        .map(|r| r.expect("embedded fixture parses"))
        .collect()
}

fn milp_value(id: &ModelId, inst: &QuboInstance, w: &WeightSet) -> Result<f64> {
    let opts = BuildOptions {
        allow_invalid: true,
        ..Default::default()
    };
    let m = build_with(id, inst, w, &opts)?;
    let r = solve_milp(&m, inst, &MilpOptions::default())?;
    match (r.status, r.model_objective) {
        (MilpStatus::Optimal, Some(z)) => Ok(z),
        (s, _) => Err(Error::NotOptimal(s.name().to_string())),
    }
}

fn lp_value(id: &ModelId, inst: &QuboInstance, w: &WeightSet) -> Result<f64> {
    let opts = BuildOptions {
        research_asymmetric: inst.is_asymmetric(),
        ..Default::default()
    };
    Ok(solve_lp(&build_with(id, inst, w, &opts)?)?.objective)
}

fn regression(log: &mut Log, kind: &str) {
    for case in regression_cases().into_iter().filter(|c| c.kind == kind) {
        let run = || -> Result<(f64, Option<Rational>)> {
            let (id, inst, w) = (case.model.parse::<ModelId>()?, case.fixture()?, case.weight_set()?);
            if kind == "lp" {
                return Ok((lp_value(&id, &inst, &w)?, None));
            }
            Ok((milp_value(&id, &inst, &w)?, Some(brute_force_opt(&inst)?.value)))
        };
        match run() {
            Ok((z, None)) => log.check(
                (z - case.expected).abs() <= 1e-6,
                format!("{} LP {z} (expected {})", case.label(), case.expected),
            ),
            Ok((z, Some(truth))) => {
                let want_truth = case.truth.map(int);
                let exact = (z - z.round()).abs() < 1e-6 && z.round() == case.expected;
                log.check(
                    exact && Some(truth) == want_truth,
                    format!(
                        "{}: model {z} vs true {truth} (expected {} vs {})",
                        case.label(),
                        case.expected,
                        case.truth.map_or("?".into(), |t| t.to_string())
                    ),
                );
            }
            Err(e) => log.error(&case.label(), e),
        }
    }
}

fn regression_suite(opts: &BatteryOptions) -> Vec<SuiteInstance> {
    let mut suite: Vec<SuiteInstance> = fixtures::symmetric()
        .into_iter()
        .map(|(name, inst)| SuiteInstance::new(name, inst))
        .collect();
    for (k, (label, inst)) in random_suite(opts.random_count, opts.seed).into_iter().enumerate() {
        if !opts.quick || inst.n() <= 6 {
            suite.push(SuiteInstance::seeded(label, opts.seed + k as u64, inst));
        }
    }
    suite
}

fn oracle_equivalence(log: &mut Log, opts: &BatteryOptions) {
    let suite = regression_suite(opts);
    let models = catalog();
    log.check(models.len() >= 28, format!("{} valid catalog models", models.len()));
    let reports: Vec<_> = models
        .iter()
        .map(|id| verify_model(id, &suite, &WeightSet::unit(), &BuildOptions::default(), &MilpOptions::default()))
        .collect();
    for r in reports.iter().filter(|r| r.verdict != Verdict::ValidConfirmed) {
        let why = match (&r.witness, r.failures.first()) {
            (Some(w), _) => format!("{}: model {} vs true {}", w.label, w.model_objective, w.true_optimum),
            (None, Some(f)) => f.clone(),
            (None, None) => String::new(),
        };
        log.check(false, format!("{} {}: {why}", r.model, r.verdict.name()));
    }
    let confirmed = reports.iter().filter(|r| r.verdict == Verdict::ValidConfirmed).count();
    log.check(
        confirmed == reports.len(),
        format!("{confirmed}/{} models match brute force on {} instances", reports.len(), suite.len()),
    );
}

fn lp_equivalence(log: &mut Log, opts: &BatteryOptions) {
    let mut suite = opts.random();
    suite.push(("ex8".to_string(), fixtures::ex8(1)));
    let rows = lp_equivalence_suite(&suite);
    log.checks(&rows, "LP equivalences");
    let best = rows
        .iter()
        .filter(|r| r.check == "GW<=DW" && r.error.is_none())
        .max_by(|a, b| (a.lhs - a.rhs).total_cmp(&(b.lhs - b.rhs)));
    match best {
        Some(r) => log.check(
            r.lhs - r.rhs > 0.5,
            format!("largest DW-GW gap {} on {} (needs > 0.5)", r.lhs - r.rhs, r.instance),
        ),
        None => log.check(false, "no GW<=DW rows"),
    }
}

fn dual_weights(log: &mut Log, opts: &BatteryOptions) {
    let rows = dual_weight_equality_suite(&opts.random(), &theorem_aggregations());
    for check in ["dual-exact=base", "unit>=base", "dual-safe>=base"] {
        let part: Vec<CheckRow> = rows.iter().filter(|r| r.check == check || r.error.is_some()).cloned().collect();
        log.checks(&part, check);
    }
}

fn precision(log: &mut Log, opts: &BatteryOptions) {
    let mut small: Vec<(String, QuboInstance)> = fixtures::symmetric()
        .into_iter()
        .filter(|(_, inst)| inst.n() <= 4)
        .map(|(n, i)| (n.to_string(), i))
        .collect();
    small.extend(opts.random().into_iter().filter(|(_, inst)| inst.n() <= 4));
    let w = WeightSet::unit();
    let b = BuildOptions::default();
    for f in [Family::DW, Family::GW, Family::FT, Family::PK] {
        let id = ModelId::basic(f);
        let imprecise: Vec<String> = small
            .par_iter()
            .filter_map(|(name, inst)| match check_precision(&id, inst, &w, &b) {
                Ok(Precision::Precise) => None,
                Ok(Precision::Restricted { x, .. }) => Some(format!("{name} x={x:?}")),
                Err(e) => Some(format!("{name}: {e}")),
            })
            .collect();
        log.check(
            imprecise.is_empty(),
            format!("{id} precise on {} instances {}", small.len(), imprecise.join("; ")),
        );
    }
    match check_precision(&ModelId::basic(Family::DW).or(), &fixtures::ex1(1), &w, &b) {
        Ok(Precision::Restricted {
            x,
            model_objective,
            recomputed,
            ..
        }) => log.check(
            model_objective == 0.0 && recomputed == int(2),
            format!("ORDW on ex1: feasible x={x:?} with model objective {model_objective}, recomputed {recomputed}"),
        ),
        Ok(Precision::Precise) => log.check(false, "ORDW on ex1: no witness"),
        Err(e) => log.error("ORDW on ex1", e),
    }
}

fn constraint_counts(log: &mut Log, opts: &BatteryOptions) {
    let densities = [0.3, 0.8, 1.0];
    let mut mismatches = Vec::new();
    let build = BuildOptions {
        allow_invalid: true,
        ..Default::default()
    };
    let models = full_catalog();
    for k in 0..20u64 {
        let n = 4 + (k % 7) as usize;
        let inst = match generate_uniform(n, (-20, 20), (-20, 20), densities[(k % 3) as usize], opts.seed + 1000 + k) {
            Ok(i) => i,
            Err(e) => return log.error("generator", e),
        };
        let sets = crate::qubo::index_sets(&inst);
        for id in &models {
            match build_with(id, &inst, &WeightSet::unit(), &build) {
                Ok(m) => {
                    let (got, want) = (count_general_constraints(&m), expected_constraint_count(id, &sets));
                    if got != want {
                        mismatches.push(format!("{id} on instance {k}: {got} vs {want}"));
                    }
                }
                Err(e) => mismatches.push(format!("{id} on instance {k}: {e}")),
            }
        }
    }
    log.check(
        mismatches.is_empty(),
        format!("{} models x 20 instances, {} mismatches {}", models.len(), mismatches.len(), mismatches.join("; ")),
    );
}

fn balanced(log: &mut Log, opts: &BatteryOptions) {
    let cfg = GeneratorConfig::new(10, opts.seed);
    match generate_balanced(&cfg) {
        Ok((inst, trace)) => match crate::instances::gw_lp_x(&inst) {
            Ok((_, x)) => log.check(
                satisfies_rule(&x, BalanceRule::AllHalf) && trace.attempts <= 10_000,
                format!("accepted after {} attempts, GW LP {}", trace.attempts, trace.lp_value),
            ),
            Err(e) => log.error("re-solve", e),
        },
        Err(e) => log.error("balanced generator", e),
    }
}

fn round_trip_gap(m: &MilpModel) -> Result<(f64, f64)> {
    let direct = solve_lp(m)?.objective;
    let via_lp = solve_lp(&import_lp(&export_lp(m)?)?)?.objective;
    let via_mps = solve_lp(&import_mps(&export_mps(m)?)?)?.objective;
    Ok(((via_lp - direct).abs(), (via_mps - direct).abs()))
}

fn export_fidelity(log: &mut Log, opts: &BatteryOptions) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let models = catalog();
    for k in 0..10u64 {
        let id = models.choose(&mut rng).expect("catalog is not empty");
        let n = 3 + (k % 6) as usize;
        let run = || -> Result<(f64, f64)> {
            let inst = generate_uniform(n, (-20, 20), (-20, 20), 0.8, opts.seed + 2000 + k)?;
            round_trip_gap(&build_with(id, &inst, &WeightSet::unit(), &BuildOptions::default())?)
        };
        match run() {
            Ok((a, b)) => log.check(a <= 1e-6 && b <= 1e-6, format!("{id} n={n}: lp diff {a:e}, mps diff {b:e}")),
            Err(e) => log.error(&format!("{id} n={n}"), e),
        }
    }
}

type Runner = fn(&mut Log, &BatteryOptions);

/// Id, title, runner and wall-clock budget in milliseconds.
const CRITERIA: [(u8, &str, Option<Runner>, Option<u128>); 10] = [
    (1, "counterexample regression", Some(|l, _| regression(l, "milp")), Some(1_000)),
    (2, "LP fixtures", Some(|l, _| regression(l, "lp")), Some(1_000)),
    (3, "oracle equivalence of the valid catalog", Some(oracle_equivalence), Some(600_000)),
    (4, "LP equivalence theorems", Some(lp_equivalence), None),
    (5, "dual-weight aggregation equality", Some(dual_weights), None),
    (6, "precision classification", Some(precision), None),
    (7, "constraint-count formulas", Some(constraint_counts), None),
    (8, "balanced generator", Some(balanced), None),
    (9, "export fidelity", Some(export_fidelity), None),
    (10, "performance rankings and large-instance runs", None, None),
];

/// Runs the selected criteria in order.
pub fn run_battery(opts: &BatteryOptions) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|(id, ..)| opts.only.is_empty() || opts.only.contains(id))
        .map(|&(id, title, runner, budget)| {
            let start = Instant::now();
            let (status, details) = match runner {
                Some(run) => {
                    let mut log = Log::new();
                    run(&mut log, opts);
                    if let Some(limit) = budget {
                        let ms = start.elapsed().as_millis();
                        log.check(ms <= limit, format!("finished in {ms} ms (budget {limit} ms)"));
                    }
                    (if log.ok { CriterionStatus::Pass } else { CriterionStatus::Fail }, log.lines)
                }
                None => (
                    CriterionStatus::Declared,
                    vec!["depends on hardware and a commercial solver; only the grid and report form exist".into()],
                ),
            };
            CriterionResult {
                id,
                title: title.to_string(),
                status,
                details,
                elapsed_ms: start.elapsed().as_millis(),
            }
        })
        .collect()
}
