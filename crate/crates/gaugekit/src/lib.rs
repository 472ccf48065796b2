//! File formats, traces, the sparse robust regression experiment and the
//! `gaugekit` command line, on top of [`gaugekit_core`].

pub mod cli;
pub mod error;
pub mod experiment;
pub mod format;
pub mod trace;

pub use error::{Error, Result};
pub use experiment::{
    run_once, run_sparse_robust_experiment, ExperimentConfig, ExperimentRun, SideConfig, SideRun,
};
pub use format::{ExtReal, FnJson, PointFile, ProblemFile, SolutionFile};
