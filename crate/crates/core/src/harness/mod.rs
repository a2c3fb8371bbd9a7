//! Experiment configuration, multi-seed runs, CSV output and self-checks.

pub mod config;
pub mod csv_io;
pub mod run;
pub mod verify;

pub use config::{parse_config, ExperimentConfig, InitialPoint, ProblemSpec};
pub use csv_io::{emit_csv, parse_csv, to_csv_string};
pub use run::{aggregate, run_experiment, run_seeds, AggregateRecord, AggregateRow, SeedFailure};
pub use verify::{run_verification, VerifyOptions, VerifyReport};
