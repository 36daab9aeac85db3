//! Command-line front end for `piezobeam`: configuration, the `freq`,
//! `compare`, `sweep`, `calibrate` and `fem-report` commands, and their
//! CSV/JSON reports.

pub mod commands;
pub mod config;
pub mod format;

pub use commands::{
    cmd_calibrate, cmd_compare, cmd_fem_report, cmd_freq, cmd_sweep, Options, Report,
};
pub use config::{ConfigError, RunConfig};
pub use format::{fmt_sci, Table};
