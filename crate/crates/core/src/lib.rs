//! Explicit MILP linearizations of quadratic unconstrained binary
//! optimization: model construction, LP and branch-and-bound solving,
//! brute-force verification and comparison reports.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod formulations;
pub mod harness;
pub mod instances;
pub mod lp;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod qubo;

pub use error::{Error, Result};
pub use formulations::{build, build_with, BuildOptions, ModelId, WeightKind, WeightMode, WeightSet};
pub use harness::{run_grid, ComparisonRow, GridOptions};
pub use lp::{extract_duals, solve_lp, LpResult, LpStatus};
pub use milp::{solve_milp, MilpOptions, MilpResult, MilpStatus};
pub use model::{count_general_constraints, MilpModel};
pub use oracle::{brute_force_opt, check_precision, verify_model, VerificationReport, Verdict};
pub use qubo::{index_sets, qubo_value, IndexSets, QuboInstance, Rational};
