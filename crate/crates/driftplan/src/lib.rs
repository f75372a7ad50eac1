//! File formats, exports and the command-line driver for `driftplan-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod exports;
pub mod field_format;
pub mod plan_file;
pub mod stamp;

pub use config::PlannerConfig;
pub use error::{Error, Result};
pub use field_format::{parse_field, write_field};
pub use plan_file::{read_plan, write_plan, LoadedPlan};
pub use stamp::config_hash;
