use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scoring::{score_decision, OutcomeClass, ScoreWeights};
use super::stats::seed_bootstrap_ci;
use crate::baselines::{decide, MethodContext, MethodId};
use crate::bench::{Regime, ScmInstance};
use crate::estimation::unadjusted_difference;
use crate::verifier::{Decision, TwoStage};

/// Verdict traces of one method, aligned with the instance slice it ran on.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodVerdicts {
    pub method: MethodId,
    pub traces: Vec<TwoStage>,
}

impl MethodVerdicts {
    pub fn terminal_decisions(&self) -> Vec<Decision> {
        self.traces.iter().map(|t| t.terminal.decision).collect()
    }
}

/// Runs every method on every instance. Instances are processed in
/// parallel; output order always matches `instances`.
pub fn run_methods(instances: &[ScmInstance], methods: &[MethodId], ctx: &MethodContext) -> Vec<MethodVerdicts> {
    methods
        .iter()
        .map(|m| MethodVerdicts {
            method: m.clone(),
            traces: instances.par_iter().map(|inst| decide(m, inst, ctx)).collect(),
        })
        .collect()
}

/// Observational-association statistics of a set of instances.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegimeDiagnostics {
    pub n: usize,
    /// Mean unadjusted difference in means on the observational frames.
    pub mean_delta_hat: f64,
    /// Mean of `delta_hat - theta`.
    pub mean_bias: f64,
    /// Share of instances that are harmful yet show a positive association.
    pub trap_fraction: f64,
    /// Share of instances whose association sign differs from `theta`.
    pub sign_flip_fraction: f64,
    pub harmful_fraction: f64,
}

pub fn regime_diagnostics<'a>(instances: impl IntoIterator<Item = &'a ScmInstance>) -> RegimeDiagnostics {
    let (mut n, mut sum_d, mut sum_b, mut traps, mut flips, mut harmful) = (0usize, 0.0, 0.0, 0usize, 0usize, 0usize);
    for inst in instances {
        let Ok(est) = unadjusted_difference(&inst.observational, "T", "Y", 0.05) else {
            continue;
        };
        let theta = inst.spec.theta;
        n += 1;
        sum_d += est.theta_hat;
        sum_b += est.theta_hat - theta;
        harmful += usize::from(theta < 0.0);
        traps += usize::from(theta < 0.0 && est.theta_hat > 0.0);
        flips += usize::from(est.theta_hat.signum() != theta.signum());
    }
    let nf = n.max(1) as f64;
    RegimeDiagnostics {
        n,
        mean_delta_hat: sum_d / nf,
        mean_bias: sum_b / nf,
        trap_fraction: traps as f64 / nf,
        sign_flip_fraction: flips as f64 / nf,
        harmful_fraction: harmful as f64 / nf,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstrainedStatus {
    Qualified,
    Disqualified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMean {
    pub seed: u64,
    pub n: usize,
    pub mean_utility: f64,
    pub false_exec: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: MethodId,
    pub regime: Regime,
    pub n_instances: usize,
    pub n_execute: usize,
    pub false_exec: usize,
    pub false_exec_per_instance: f64,
    /// `None` when the method never executed.
    pub false_exec_per_execute: Option<f64>,
    pub correct_exec_rate: f64,
    pub correct_refusal_rate: f64,
    pub accuracy: f64,
    pub mean_utility: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed_means: Vec<SeedMean>,
    pub constrained: ConstrainedStatus,
    /// Records cover only some of the run's seeds.
    pub partial: bool,
    pub diagnostics: RegimeDiagnostics,
}

impl MethodSummary {
    pub fn seeds_covered(&self) -> usize {
        self.seed_means.len()
    }
}

/// Scores and folds one method's decisions on one regime.
///
/// `pairs` must be in instance-id order; sums run in that order.
pub fn aggregate(
    method: &MethodId,
    regime: Regime,
    pairs: &[(&ScmInstance, Decision)],
    weights: &ScoreWeights,
    run_seeds: usize,
) -> MethodSummary {
    let mut per_seed: BTreeMap<u64, (usize, f64, usize)> = BTreeMap::new();
    let (mut total, mut n_exec, mut fe, mut ce, mut cr) = (0.0, 0usize, 0usize, 0usize, 0usize);
    for (inst, decision) in pairs {
        let (u, class) = score_decision(*decision, inst.spec.theta, weights);
        total += u;
        let cell = per_seed.entry(inst.id.seed).or_default();
        cell.0 += 1;
        cell.1 += u;
        match class {
            OutcomeClass::CorrectExec => {
                n_exec += 1;
                ce += 1;
            }
            OutcomeClass::FalseExec => {
                n_exec += 1;
                fe += 1;
                cell.2 += 1;
            }
            OutcomeClass::CorrectRefusal => cr += 1,
            OutcomeClass::MissedOpportunity => {}
        }
    }
    let n = pairs.len();
    let nf = n.max(1) as f64;
    let seed_means: Vec<SeedMean> = per_seed
        .into_iter()
        .map(|(seed, (k, sum, f))| SeedMean {
            seed,
            n: k,
            mean_utility: sum / k as f64,
            false_exec: f,
        })
        .collect();
    let values: Vec<f64> = seed_means.iter().map(|s| s.mean_utility).collect();
    let (ci_lo, ci_hi) = seed_bootstrap_ci(&values).unwrap_or((f64::NAN, f64::NAN));
    let constrained = if seed_means.iter().any(|s| s.false_exec > 0) {
        ConstrainedStatus::Disqualified
    } else {
        ConstrainedStatus::Qualified
    };
    MethodSummary {
        method: method.clone(),
        regime,
        n_instances: n,
        n_execute: n_exec,
        false_exec: fe,
        false_exec_per_instance: fe as f64 / nf,
        false_exec_per_execute: (n_exec > 0).then(|| fe as f64 / n_exec as f64),
        correct_exec_rate: ce as f64 / nf,
        correct_refusal_rate: cr as f64 / nf,
        accuracy: (ce + cr) as f64 / nf,
        mean_utility: total / nf,
        ci_lo,
        ci_hi,
        partial: seed_means.len() < run_seeds,
        seed_means,
        constrained,
        diagnostics: regime_diagnostics(pairs.iter().map(|(i, _)| *i)),
    }
}
