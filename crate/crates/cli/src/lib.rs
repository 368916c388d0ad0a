//! Scenario files, drivers and output writers around `ghostsim-core`.
//!
//! A run goes `parse_scenario` → [`run_scenario`] → [`export_results`];
//! the `ghostsim` binary adds argument handling, thread-pool setup and exit
//! codes.

pub mod error;
pub mod export;
pub mod plan;
pub mod presets;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod svg;
pub mod units;

pub use error::RunError;
pub use export::export_results;
pub use report::MetricsReport;
pub use runner::{run_scenario, Overrides, RunOutput};
pub use scenario::{parse_scenario, ConfigError, Method, ScenarioConfig, ScenarioKind};
