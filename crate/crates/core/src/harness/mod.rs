//! Model × instance × weight-mode grids and the comparison report.

mod battery;
mod suites;

pub use battery::{regression_cases, run_battery, BatteryOptions, CriterionResult, CriterionStatus, RegressionCase};
pub use suites::{
    aggregated_row_codes, dual_weight_equality_suite, dual_weights, lp_equivalence_suite, random_suite,
    theorem_aggregations, CheckRow,
};

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::{build_with, expected_constraint_count, BuildOptions, ModelId, WeightMode, WeightSet};
use crate::lp::solve_lp;
use crate::milp::{solve_milp, MilpOptions};
use crate::model::count_general_constraints;
use crate::qubo::{index_sets, QuboInstance};

/// One cell of a comparison grid. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub model: String,
    pub weight_mode: String,
    pub lp_value: Option<f64>,
    pub milp_status: String,
    pub model_objective: Option<f64>,
    /// Exact QUBO value of the incumbent's `x`, as `p` or `p/q`.
    pub recomputed: Option<String>,
    pub best_bound: Option<f64>,
    pub gap: Option<f64>,
    pub nodes: usize,
    /// Milliseconds; left empty unless timing was requested.
    pub wall_ms: Option<f64>,
    pub constraints: usize,
    pub expected_constraints: usize,
    /// Why the cell could not be completed.
    pub error: Option<String>,
}

impl ComparisonRow {
    fn empty(instance: &str, model: &ModelId, mode: WeightMode) -> Self {
        Self {
            instance: instance.to_string(),
            model: model.name(),
            weight_mode: mode.name().to_string(),
            lp_value: None,
            milp_status: "ERROR".to_string(),
            model_objective: None,
            recomputed: None,
            best_bound: None,
            gap: None,
            nodes: 0,
            wall_ms: None,
            constraints: 0,
            expected_constraints: 0,
            error: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct GridOptions {
    pub milp: MilpOptions,
    pub allow_invalid: bool,
    /// Record wall time per cell. Off by default so reports are reproducible.
    pub timings: bool,
    /// Weights used for the `Custom` mode.
    pub custom: Option<WeightSet>,
}

impl GridOptions {
    pub fn with_time_limit(mut self, limit: Option<Duration>) -> Self {
        self.milp.time_limit = limit;
        self
    }
}

/// Weights for `id` on `inst` under `mode`. Dual modes take the optimal
/// duals of the rows that `id` aggregates, from the LP of its base model.
pub fn weights_for(id: &ModelId, inst: &QuboInstance, mode: WeightMode, custom: Option<&WeightSet>) -> Result<WeightSet> {
    match mode {
        WeightMode::Unit => Ok(WeightSet::unit()),
        WeightMode::Custom => custom
            .cloned()
            .ok_or_else(|| Error::Config("custom weight mode needs a weight set".into())),
        WeightMode::DualExact => dual_weights(id, inst),
        WeightMode::DualMilpSafe => Ok(dual_weights(id, inst)?.milp_safe()),
    }
}

fn run_cell(name: &str, inst: &QuboInstance, id: &ModelId, mode: WeightMode, opts: &GridOptions) -> ComparisonRow {
    let mut row = ComparisonRow::empty(name, id, mode);
    let start = Instant::now();
    let result = (|| -> Result<()> {
        let w = weights_for(id, inst, mode, opts.custom.as_ref())?;
        let build = BuildOptions {
            allow_invalid: opts.allow_invalid,
            research_asymmetric: inst.is_asymmetric(),
            ..Default::default()
        };
        row.expected_constraints = expected_constraint_count(id, &index_sets(inst));
        let lp_build = BuildOptions { lp_study: true, ..build };
        let relaxed = build_with(id, inst, &w, &lp_build)?;
        row.constraints = count_general_constraints(&relaxed);
        let lp = solve_lp(&relaxed)?;
        row.lp_value = lp.is_optimal().then_some(lp.objective);

        let model = build_with(id, inst, &w, &build)?;
        let r = solve_milp(&model, inst, &opts.milp)?;
        row.milp_status = r.status.name().to_string();
        row.model_objective = r.model_objective;
        row.recomputed = r.recomputed.map(|v| v.to_string());
        row.best_bound = r.best_bound.is_finite().then_some(r.best_bound);
        row.gap = r.gap();
        row.nodes = r.nodes;
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    if opts.timings {
        row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

/// Runs every `(instance, model, mode)` combination. Rows come back in that
/// nesting order regardless of how the cells were scheduled; a failed cell
/// keeps its row with `error` set.
pub fn run_grid(
    instances: &[(String, QuboInstance)],
    models: &[ModelId],
    modes: &[WeightMode],
    opts: &GridOptions,
) -> Vec<ComparisonRow> {
    let cells: Vec<(usize, usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..models.len()).flat_map(move |m| (0..modes.len()).map(move |k| (i, m, k))))
        .collect();
    cells
        .par_iter()
        .map(|&(i, m, k)| run_cell(&instances[i].0, &instances[i].1, &models[m], modes[k], opts))
        .collect()
}

/// RFC-4180 CSV with one header line.
pub fn emit_csv(rows: &[ComparisonRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// One JSON object per line, same fields as the CSV.
pub fn emit_jsonl(rows: &[ComparisonRow]) -> Result<String> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

const CSV_HEADER: [&str; 14] = [
    "instance",
    "model",
    "weight_mode",
    "lp_value",
    "milp_status",
    "model_objective",
    "recomputed",
    "best_bound",
    "gap",
    "nodes",
    "wall_ms",
    "constraints",
    "expected_constraints",
    "error",
];

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        column: 0,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{catalog, Family};
    use crate::instances::fixtures;

    fn named(name: &str, inst: QuboInstance) -> Vec<(String, QuboInstance)> {
        vec![(name.to_string(), inst)]
    }

    #[test]
    fn ex8_lp_values() {
        let models = [ModelId::basic(Family::GW), ModelId::basic(Family::DW)];
        let rows = run_grid(&named("ex8", fixtures::ex8(1)), &models, &[WeightMode::Unit], &GridOptions::default());
        assert_eq!(rows.len(), 2);
        assert!((rows[0].lp_value.unwrap() - 1.0).abs() < 1e-9);
        assert!((rows[1].lp_value.unwrap() - 1.5).abs() < 1e-9);
        for r in &rows {
            assert_eq!(r.milp_status, "OPTIMAL");
            assert_eq!(r.recomputed.as_deref(), Some("1"));
            assert_eq!(r.constraints, r.expected_constraints);
            assert!(r.gap.unwrap() >= -1e-6);
            assert!(r.wall_ms.is_none());
        }
    }

    #[test]
    fn single_variable_instance() {
        let inst = QuboInstance::from_integers(&[vec![0]], &[3]).unwrap();
        let rows = run_grid(&named("n1", inst), &catalog(), &[WeightMode::Unit], &GridOptions::default());
        for r in &rows {
            assert_eq!(r.error, None, "{}", r.model);
            assert!((r.lp_value.unwrap() - 3.0).abs() < 1e-9, "{}", r.model);
            assert!((r.model_objective.unwrap() - 3.0).abs() < 1e-9, "{}", r.model);
        }
    }

    #[test]
    fn failures_are_kept() {
        let bad = ModelId::basic(Family::DW).with(crate::formulations::Agg2::DwBeta);
        let rows = run_grid(&named("ex3", fixtures::ex3()), &[bad], &[WeightMode::Unit], &GridOptions::default());
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error.as_deref().unwrap().contains("known to be invalid"));
    }

    #[test]
    fn csv_shape_and_round_trip() {
        assert_eq!(emit_csv(&[]).unwrap().lines().count(), 1);
        let rows = run_grid(
            &named("ex2", fixtures::ex2()),
            &[ModelId::basic(Family::PK)],
            &[WeightMode::Unit],
            &GridOptions::default(),
        );
        let text = emit_csv(&rows).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("instance,model,weight_mode,lp_value,"));
        assert_eq!(parse_csv(&text).unwrap(), rows);
        let mut quoted = rows[0].clone();
        quoted.error = Some("a, \"b\"".into());
        assert_eq!(parse_csv(&emit_csv(&[quoted.clone()]).unwrap()).unwrap(), vec![quoted]);
    }

    #[test]
    fn jsonl_has_one_line_per_row() {
        let rows = run_grid(
            &named("ex8", fixtures::ex8(1)),
            &[ModelId::basic(Family::GW)],
            &[WeightMode::Unit, WeightMode::DualExact],
            &GridOptions::default(),
        );
        let text = emit_jsonl(&rows).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back: ComparisonRow = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(back, rows[0]);
    }
}
