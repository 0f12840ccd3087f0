//! Batch front end for `cbgame-core`: scenario configs, a parallel Monte
//! Carlo driver, and CSV/JSON reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod report;
pub mod scenario;

pub use config::{parse_config, parse_config_str, ScenarioConfig};
pub use error::{CliError, Result};
pub use output::{emit_outputs, Format, Manifest};
pub use report::{Cell, ReportSet, Table};
pub use scenario::{run_scenario, Command};
