//! Experiment runner: configuration, ε-sweeps against the finite-difference
//! oracle, report writers and the acceptance suite.

pub mod config;
pub mod oracle;
pub mod output;
pub mod sweep;
pub mod validate;

pub use config::{ExperimentConfig, FdSettings, GridSpec, Mode};
pub use sweep::{run_sweep, write_sweep_csv, SweepInput, SweepReport, SweepRow};
pub use validate::{run_criterion, run_validate, ValidateOptions, ValidationReport};
