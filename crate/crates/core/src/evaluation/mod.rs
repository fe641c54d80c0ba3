//! Scoring, seed-level aggregation, statistics, sweeps and reports.

mod aggregate;
mod report;
mod scoring;
mod stats;
mod sweeps;

pub use aggregate::{
    aggregate, regime_diagnostics, run_methods, ConstrainedStatus, MethodSummary, MethodVerdicts, RegimeDiagnostics,
    SeedMean,
};
pub use report::{
    pairwise_wilcoxon, render_markdown, write_pairwise_csv, write_summary_csv, write_sweep_csv, PairwiseRow,
};
pub use scoring::{score, score_decision, OutcomeClass, ScoreRecord, ScoreWeights};
pub use stats::{
    bootstrap_ci, quantile_sorted, rule_of_three, seed_bootstrap_ci, wilcoxon_exact, WilcoxonResult, BOOTSTRAP_KEY,
    BOOTSTRAP_RESAMPLES,
};
pub use sweeps::{
    misspec_sweep, misspecify, strength_sweep, summarize_regime, weight_sweep, SweepKind, SweepRow, C_EXP_GRID,
    MISSPEC_FRACTIONS, STRENGTH_GRID, W_MISS_GRID,
};
