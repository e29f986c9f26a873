//! Experiment runner: reads a run configuration, executes one reconstruction experiment
//! and writes images, sinograms, streak reports and a run log.

pub mod config;
pub mod pipeline;
pub mod run;

pub use config::{Overrides, RunConfig, Select};
pub use run::{run, RunError};
