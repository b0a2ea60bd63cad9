//! The catalog of explicit linearizations and the model builder.

pub mod builder;
pub mod counts;
pub mod id;
pub mod weights;

pub use builder::{
    build, build_disaggregated, build_spec, build_with, model_spec, required_weights, weight_kind_of, Block,
    BuildOptions, ModelSpec, Subset, YPolicy,
};
pub use counts::{expected_constraint_count, PatternStats};
pub use id::{catalog, full_catalog, invalid_catalog, Agg1, Agg2, Family, ModelId, Restriction, Variant};
pub use weights::{WeightKind, WeightMode, WeightSet};
