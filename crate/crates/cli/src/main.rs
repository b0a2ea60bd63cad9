use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qubolin_core::formulations::{catalog, expected_constraint_count, full_catalog};
use qubolin_core::harness::{
    emit_csv, emit_jsonl, random_suite, run_battery, weights_for, BatteryOptions, CriterionStatus, GridOptions,
};
use qubolin_core::instances::{
    fixtures, generate_balanced, generate_uniform, load_canonical, parse_orlib, save_canonical, write_orlib,
    GeneratorConfig,
};
use qubolin_core::milp::solve_milp_observed;
use qubolin_core::model::{export_lp, export_mps};
use qubolin_core::oracle::{search_counterexample, SuiteInstance};
use qubolin_core::{
    brute_force_opt, build_with, count_general_constraints, index_sets, run_grid, solve_lp, verify_model,
    BuildOptions, MilpModel, MilpOptions, ModelId, QuboInstance, Verdict, WeightMode, WeightSet,
};

/// Build, solve, verify and compare linearizations of QUBO instances.
#[derive(Parser, Debug)]
#[command(name = "qubolin", version)]
struct Cli {
    /// Worker threads for `compare` and `suite`.
    #[arg(long, global = true, env = "QUBOLIN_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a seeded random instance.
    Generate(GenerateArgs),
    /// Read an instance file and print it in canonical form.
    Parse(ParseArgs),
    /// Build a model and summarize its size.
    Build(ModelArgs),
    /// Write a model as an LP or MPS file.
    Export(ExportArgs),
    /// Solve the LP relaxation of a model.
    SolveLp(SolveLpArgs),
    /// Solve a model by branch and bound.
    SolveMilp(SolveMilpArgs),
    /// Brute-force optimum of an instance.
    Oracle(OracleArgs),
    /// Check a model against the brute-force optimum.
    Verify(VerifyArgs),
    /// Run a model × instance × weight-mode grid.
    Compare(CompareArgs),
    /// Run the acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Args, Debug)]
struct OutArg {
    /// Write the output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InstanceArg {
    /// Instance file (canonical or OR-Library format) or a fixture name.
    #[arg(long)]
    instance: String,
    /// Which instance of a multi-instance OR-Library file, from 1.
    #[arg(long, default_value_t = 1)]
    index: usize,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[command(flatten)]
    instance: InstanceArg,
    /// Catalog model name, e.g. GW, ORPK or "GW(a,g+d)".
    #[arg(long)]
    model: String,
    /// unit, dual-exact, dual-safe or a weight file.
    #[arg(long, default_value = "unit")]
    weights: String,
    /// Permit models known to be invalid and negative weights.
    #[arg(long)]
    allow_invalid: bool,
    /// Accept asymmetric instances.
    #[arg(long)]
    research: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InstanceFormat {
    Canonical,
    Orlib,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelFormat {
    Lp,
    Mps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Jsonl,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of structurally nonzero pairs.
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Keep drawing until the GW relaxation has every x at 1/2.
    #[arg(long)]
    balanced: bool,
    #[arg(long, value_enum, default_value_t = InstanceFormat::Canonical)]
    format: InstanceFormat,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct ParseArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[arg(long, value_enum, default_value_t = InstanceFormat::Canonical)]
    format: InstanceFormat,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = ModelFormat::Lp)]
    format: ModelFormat,
}

#[derive(Args, Debug)]
struct SolveLpArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Also print status, column values and row duals.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct SolveMilpArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Stop at the first incumbent.
    #[arg(long)]
    first_incumbent: bool,
    /// Initial x assignment as a 0/1 string, e.g. 0110.
    #[arg(long)]
    mip_start: Option<String>,
    /// Print progress records to stderr.
    #[arg(long)]
    progress: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Instance to check; without it the fixtures and the seeded random
    /// suite are used.
    #[arg(long)]
    instance: Option<String>,
    #[arg(long)]
    model: String,
    #[arg(long, default_value = "unit")]
    weights: String,
    #[arg(long)]
    allow_invalid: bool,
    /// Search this many random instances for a counterexample instead.
    #[arg(long)]
    search: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Instances (files or fixture names), comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "random")]
    instance: Vec<String>,
    /// Add this many seeded random instances.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Models, comma separated or repeated; `all` is the valid catalog and
    /// `everything` adds the known-invalid models.
    #[arg(long, default_value = "all")]
    model: Vec<String>,
    /// Weight modes, comma separated: unit, dual-exact, dual-safe or a file.
    #[arg(long, value_delimiter = ',', default_value = "unit")]
    weights: Vec<String>,
    #[arg(long)]
    allow_invalid: bool,
    /// Branch-and-bound budget per cell in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Stop each solve at its first incumbent.
    #[arg(long)]
    first_incumbent: bool,
    /// Record wall time per cell.
    #[arg(long)]
    timings: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Use only random instances with n <= 6.
    #[arg(long)]
    quick: bool,
    /// Criteria to run, comma separated; all by default.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArg,
}

/// An error tied to the flag that caused it.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(flag: &str, e: impl std::fmt::Display) -> anyhow::Error {
    UsageError(format!("{flag}: {e}")).into()
}

fn emit(out: &OutArg, text: &str) -> anyhow::Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(spec: &str, index: usize) -> anyhow::Result<QuboInstance> {
    if let Some(inst) = fixtures::by_name(spec) {
        return Ok(inst);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(usage(
            "--instance",
            format!("`{spec}` is neither a file nor a fixture ({})", fixtures::NAMES.join(", ")),
        ));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
    if text.trim_start().starts_with("QUBO") {
        return load_canonical(&text).with_context(|| format!("parsing {spec}"));
    }
    let all = parse_orlib(&text).with_context(|| format!("parsing {spec}"))?;
    let count = all.len();
    all.into_iter()
        .nth(index.wrapping_sub(1))
        .ok_or_else(|| usage("--index", format!("{index} is outside 1..={count}")))
}

fn parse_model(name: &str) -> anyhow::Result<ModelId> {
    name.parse().map_err(|e| usage("--model", e))
}

fn weights(spec: &str, id: &ModelId, inst: &QuboInstance) -> anyhow::Result<(WeightMode, WeightSet)> {
    let mode = match spec {
        "unit" => WeightMode::Unit,
        "dual-exact" => WeightMode::DualExact,
        "dual-safe" => WeightMode::DualMilpSafe,
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| usage("--weights", format!("{path}: {e}")))?;
            let w = WeightSet::parse_text(&text).map_err(|e| usage("--weights", format!("{path}: {e}")))?;
            return Ok((WeightMode::Custom, w));
        }
    };
    Ok((mode, weights_for(id, inst, mode, None)?))
}

struct Built {
    id: ModelId,
    inst: QuboInstance,
    model: MilpModel,
}

fn build_model(args: &ModelArgs, lp_only: bool) -> anyhow::Result<Built> {
    let id = parse_model(&args.model)?;
    let inst = load_instance(&args.instance.instance, args.instance.index)?;
    let (mode, w) = weights(&args.weights, &id, &inst)?;
    let opts = BuildOptions {
        allow_invalid: args.allow_invalid,
        lp_study: lp_only && mode == WeightMode::DualExact,
        research_asymmetric: args.research,
    };
    let model = build_with(&id, &inst, &w, &opts).map_err(|e| match e {
        qubolin_core::Error::InvalidModelRequested(_) => usage("--allow-invalid", e),
        qubolin_core::Error::AsymmetricInstance => usage("--research", e),
        e => anyhow!(e),
    })?;
    Ok(Built { id, inst, model })
}

fn seconds(flag: &str, v: Option<f64>) -> anyhow::Result<Option<Duration>> {
    v.map(|s| Duration::try_from_secs_f64(s).map_err(|e| usage(flag, e))).transpose()
}

fn x_string(x: &[u8]) -> String {
    x.iter().map(|b| char::from(b'0' + b)).collect()
}

fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<u8> {
    let inst = if a.balanced {
        let cfg = GeneratorConfig::new(a.n, a.seed);
        let (inst, trace) = generate_balanced(&cfg).map_err(|e| usage("--n", e))?;
        eprintln!("accepted after {} attempts", trace.attempts);
        inst
    } else {
        generate_uniform(a.n, (-10, 10), (-20, 20), a.density, a.seed).map_err(|e| usage("--density", e))?
    };
    let text = match a.format {
        InstanceFormat::Canonical => save_canonical(&inst),
        InstanceFormat::Orlib => write_orlib(&[inst]),
    };
    emit(&a.out, &text)?;
    Ok(0)
}

fn cmd_parse(a: &ParseArgs) -> anyhow::Result<u8> {
    let inst = load_instance(&a.instance.instance, a.instance.index)?;
    let text = match a.format {
        InstanceFormat::Canonical => save_canonical(&inst),
        InstanceFormat::Orlib => write_orlib(&[inst]),
    };
    emit(&a.out, &text)?;
    Ok(0)
}

fn cmd_build(a: &ModelArgs) -> anyhow::Result<u8> {
    let b = build_model(a, false)?;
    let m = &b.model;
    let mut s = String::new();
    writeln!(s, "model {}", b.id)?;
    writeln!(s, "variables {}", m.num_vars())?;
    writeln!(s, "binaries {}", m.count_binaries())?;
    writeln!(s, "general_constraints {}", count_general_constraints(m))?;
    if !b.inst.is_asymmetric() {
        writeln!(s, "expected_constraints {}", expected_constraint_count(&b.id, &index_sets(&b.inst)))?;
    }
    emit(&a.out, &s)?;
    Ok(0)
}

fn cmd_export(a: &ExportArgs) -> anyhow::Result<u8> {
    let b = build_model(&a.model, false)?;
    let text = match a.format {
        ModelFormat::Lp => export_lp(&b.model)?,
        ModelFormat::Mps => export_mps(&b.model)?,
    };
    emit(&a.model.out, &text)?;
    Ok(0)
}

fn cmd_solve_lp(a: &SolveLpArgs) -> anyhow::Result<u8> {
    let b = build_model(&a.model, true)?;
    let r = solve_lp(&b.model)?;
    let mut s = String::new();
    if r.is_optimal() {
        writeln!(s, "{:?}", r.objective)?;
    } else {
        writeln!(s, "{}", r.status.name())?;
    }
    if a.verbose {
        writeln!(s, "status {}", r.status.name())?;
        writeln!(s, "iterations {}", r.iterations)?;
        writeln!(s, "basis {}", r.basis_fingerprint)?;
        for (v, x) in b.model.variables.iter().zip(&r.primal) {
            writeln!(s, "value {} {x:?}", v.name)?;
        }
        for (c, y) in b.model.constraints.iter().zip(&r.duals) {
            writeln!(s, "dual {} {y:?}", c.name)?;
        }
    }
    emit(&a.model.out, &s)?;
    Ok(0)
}

fn cmd_solve_milp(a: &SolveMilpArgs) -> anyhow::Result<u8> {
    let b = build_model(&a.model, false)?;
    let mip_start = a
        .mip_start
        .as_deref()
        .map(|s| {
            s.chars()
                .map(|ch| match ch {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(usage("--mip-start", format!("`{s}` is not a 0/1 string"))),
                })
                .collect::<anyhow::Result<Vec<u8>>>()
        })
        .transpose()?;
    let opts = MilpOptions {
        time_limit: seconds("--time-limit", a.time_limit)?,
        node_limit: a.node_limit,
        stop_after_first_incumbent: a.first_incumbent,
        mip_start,
    };
    let progress = a.progress;
    let r = solve_milp_observed(&b.model, &b.inst, &opts, &mut |p| {
        if progress {
            eprintln!("{p}");
        }
    })?;
    let mut s = String::new();
    writeln!(s, "status {}", r.status)?;
    if let Some(z) = r.model_objective {
        writeln!(s, "objective {z:?}")?;
    }
    if let Some(v) = r.recomputed {
        writeln!(s, "recomputed {v}")?;
    }
    if let Some(x) = &r.x {
        writeln!(s, "x {}", x_string(x))?;
    }
    writeln!(s, "bound {:?}", r.best_bound)?;
    writeln!(s, "root_bound {:?}", r.root_bound)?;
    writeln!(s, "nodes {}", r.nodes)?;
    emit(&a.model.out, &s)?;
    Ok(0)
}

fn cmd_oracle(a: &OracleArgs) -> anyhow::Result<u8> {
    let inst = load_instance(&a.instance.instance, a.instance.index)?;
    let r = brute_force_opt(&inst).map_err(|e| usage("--instance", e))?;
    let mut s = String::new();
    writeln!(s, "optimum {}", r.value)?;
    for x in &r.argmax {
        writeln!(s, "argmax {}", x_string(x))?;
    }
    if r.argmax_truncated {
        writeln!(s, "argmax truncated")?;
    }
    emit(&a.out, &s)?;
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> anyhow::Result<u8> {
    let id = parse_model(&a.model)?;
    let build = BuildOptions {
        allow_invalid: a.allow_invalid,
        ..Default::default()
    };
    if id.known_invalid() && !a.allow_invalid {
        return Err(usage("--allow-invalid", qubolin_core::Error::InvalidModelRequested(id.name())));
    }
    let suite: Vec<SuiteInstance> = match &a.instance {
        Some(spec) => vec![SuiteInstance::new(spec.clone(), load_instance(spec, 1)?)],
        None => {
            let mut s: Vec<SuiteInstance> =
                fixtures::symmetric().into_iter().map(|(n, i)| SuiteInstance::new(n, i)).collect();
            for (k, (label, inst)) in random_suite(50, a.seed).into_iter().enumerate() {
                s.push(SuiteInstance::seeded(label, a.seed + k as u64, inst));
            }
            s
        }
    };
    let w = match (a.weights.as_str(), suite.first()) {
        ("unit", _) => WeightSet::unit(),
        (spec, Some(first)) if a.instance.is_some() => weights(spec, &id, &first.instance)?.1,
        (spec, _) => return Err(usage("--weights", format!("`{spec}` needs a single --instance"))),
    };
    let report = match a.search {
        Some(count) => search_counterexample(&id, &w, &build, a.seed, count),
        None => verify_model(&id, &suite, &w, &build, &MilpOptions::default()),
    };
    let mut s = String::new();
    writeln!(s, "model {}", report.model)?;
    writeln!(s, "verdict {}", report.verdict.name())?;
    writeln!(s, "instances {}", report.instances_tested)?;
    if let Some(wit) = &report.witness {
        writeln!(
            s,
            "witness {}: model {} vs true {} (x={}, recomputed {})",
            wit.label,
            wit.model_objective,
            wit.true_optimum,
            x_string(&wit.x),
            wit.recomputed
        )?;
        for line in wit.instance.lines() {
            writeln!(s, "  {line}")?;
        }
    }
    for f in &report.failures {
        writeln!(s, "failure {f}")?;
    }
    emit(&a.out, &s)?;
    Ok(match report.verdict {
        Verdict::ValidConfirmed => 0,
        _ => 1,
    })
}

/// Splits on commas outside parentheses, so `GW,PK(a,b)` is two names.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts.retain(|p| !p.is_empty());
    parts
}

fn cmd_compare(a: &CompareArgs) -> anyhow::Result<u8> {
    let mut instances = Vec::new();
    for spec in &a.instance {
        instances.push((spec.clone(), load_instance(spec, 1)?));
    }
    if let Some(count) = a.random {
        instances.extend(random_suite(count, a.seed));
    }
    let mut models = Vec::new();
    for name in a.model.iter().flat_map(|m| split_top_level(m)) {
        match name {
            "all" => models.extend(catalog()),
            "everything" => models.extend(full_catalog()),
            n => models.push(parse_model(n)?),
        }
    }
    let mut modes = Vec::new();
    let mut custom = None;
    for spec in &a.weights {
        modes.push(match spec.as_str() {
            "unit" => WeightMode::Unit,
            "dual-exact" => WeightMode::DualExact,
            "dual-safe" => WeightMode::DualMilpSafe,
            path => {
                let text = std::fs::read_to_string(path).map_err(|e| usage("--weights", format!("{path}: {e}")))?;
                custom = Some(WeightSet::parse_text(&text).map_err(|e| usage("--weights", e))?);
                WeightMode::Custom
            }
        });
    }
    let mut opts = GridOptions {
        allow_invalid: a.allow_invalid,
        timings: a.timings,
        custom,
        ..Default::default()
    }
    .with_time_limit(seconds("--time-limit", a.time_limit)?);
    opts.milp.stop_after_first_incumbent = a.first_incumbent;
    let rows = run_grid(&instances, &models, &modes, &opts);
    let text = match a.format {
        ReportFormat::Csv => emit_csv(&rows)?,
        ReportFormat::Jsonl => emit_jsonl(&rows)?,
    };
    emit(&a.out, &text)?;
    Ok(0)
}

fn cmd_suite(a: &SuiteArgs) -> anyhow::Result<u8> {
    let mut opts = BatteryOptions {
        quick: a.quick,
        only: a.only.clone(),
        ..Default::default()
    };
    if let Some(seed) = a.seed {
        opts.seed = seed;
    }
    if let Some(bad) = opts.only.iter().find(|&&k| !(1..=10).contains(&k)) {
        bail!(usage("--only", format!("no criterion {bad}")));
    }
    let results = run_battery(&opts);
    let mut s = String::new();
    for r in &results {
        writeln!(s, "{r}")?;
        for line in &r.details {
            writeln!(s, "    {line}")?;
        }
    }
    let failed = results.iter().filter(|r| r.status == CriterionStatus::Fail).count();
    writeln!(s, "{} criteria, {failed} failed", results.len())?;
    emit(&a.out, &s)?;
    Ok(u8::from(failed > 0))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let threads = match cli.command {
        Command::Compare(_) | Command::Suite(_) => cli.jobs.unwrap_or(0),
        _ => 1,
    };
    if cli.jobs == Some(0) {
        return Err(usage("--jobs", "must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Parse(a) => cmd_parse(a),
        Command::Build(a) => cmd_build(a),
        Command::Export(a) => cmd_export(a),
        Command::SolveLp(a) => cmd_solve_lp(a),
        Command::SolveMilp(a) => cmd_solve_milp(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Suite(a) => cmd_suite(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
