//! Causal intervention verification for tool-using agents.
//!
//! A proposed state-changing action is mapped to the query
//! `E[Y | do(T = t*)]` over a committed causal graph. The verifier checks
//! whether that query is identifiable (backdoor or frontdoor), estimates the
//! effect with a one-sided lower confidence bound, and returns one of four
//! verdicts: `EXECUTE`, `REJECT`, `EXPERIMENT` or `ABSTAIN`. Every `EXECUTE`
//! on an interventional action carries a [`verifier::Certificate`] that can be
//! replayed against the stored data.
//!
//! The crate also ships the synthetic benchmark used to stress the verifier:
//! six counterbalanced workflow families sampled from parametric structural
//! causal models under moderate and adversarial hidden confounding, a suite
//! of baseline verdict providers, scoring, seed-level bootstrap aggregation,
//! exact Wilcoxon tests and sensitivity sweeps.
//!
//! Module map:
//! - [`graph`]: committed graphs, d-separation, identification, latent relabelling
//! - [`data`]: data frames and their canonical byte serialization
//! - [`bench`]: benchmark generation (SCMs, instances, counterbalance)
//! - [`estimation`]: OLS effects, one-sided LCBs, provenance hashing
//! - [`verifier`]: triage rules, certificates, two-stage experiments
//! - [`baselines`]: comparison methods and recorded-verdict replay
//! - [`evaluation`]: scoring, aggregation, statistics, sweeps, reports
//! - [`pipeline`]: run configuration and the commands behind the `civex` binary

pub mod baselines;
pub mod bench;
pub mod data;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod graph;
pub mod pipeline;
pub mod rng;
pub mod verifier;

pub use error::{Error, Result};
