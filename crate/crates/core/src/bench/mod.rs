//! Causal-ToolBench: synthetic tool-use decisions with planted effects.
//!
//! Each instance proposes one family's action, commits a causal graph over
//! the observed covariates, and carries an observational frame plus a
//! paired randomized frame drawn from the same structural model.

mod benchmark;
mod family;
mod instance;
mod recovery;
mod scm;

pub use benchmark::{
    build_benchmark, label_schedule, read_jsonl, write_jsonl, Benchmark, BenchmarkSpec, CounterbalanceReport,
    CounterbalanceRow,
};
pub use family::{CovariateTemplate, Family, Regime};
pub use instance::{sample_instance, ActionFrame, CoefficientGrid, InstanceId, Label, SampleOptions, ScmInstance};
pub use recovery::{recovery_check, RecoveryReport};
pub use scm::{association_bias, generate_frame, mean_logistic_slope, Confounder, ScmSpec};
