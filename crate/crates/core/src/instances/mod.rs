//! Instance fixtures, generators and file formats.

pub mod canonical;
pub mod fixtures;
pub mod generator;
pub mod orlib;

pub use canonical::{load_canonical, save_canonical};
pub use generator::{
    generate_balanced, generate_uniform, gw_lp_x, satisfies_rule, BalanceRule, BalancedTrace, GeneratorConfig,
};
pub use orlib::{parse_orlib, write_orlib};
