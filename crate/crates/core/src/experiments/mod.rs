//! Batch experiments: t-sweeps of the uniform estimates, the cutoff and neck
//! diagnostics, weight-crossing and region tables, and norm identities.
//!
//! Every run returns a [`SweepResult`] whose summary passes or fails solely on
//! the tolerances declared in its [`ExperimentConfig`].

mod config;
mod result;
mod run;

pub use config::{
    load_run_file, parse_run_file, AtlasConfig, EmitFormat, ExperimentConfig, ExperimentKind, ModelRef, Outputs,
    Tolerances,
};
pub use result::{class_name, Check, Summary, SweepResult, CLASS_NAMES};
pub use run::{region_atlas, run, sweep_family, DEEP_LOG_T};
