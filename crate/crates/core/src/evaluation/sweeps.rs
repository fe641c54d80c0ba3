use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, run_methods, MethodSummary, MethodVerdicts};
use super::scoring::ScoreWeights;
use crate::baselines::{MethodContext, MethodId};
use crate::bench::{build_benchmark, BenchmarkSpec, Regime, ScmInstance};
use crate::error::{Error, Result};
use crate::graph::relabel_latent;
use crate::rng;
use crate::verifier::{Decision, VerifierConfig};

pub const STRENGTH_GRID: [f64; 8] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
pub const W_MISS_GRID: [f64; 5] = [0.0, 0.1, 0.3, 0.5, 1.0];
pub const C_EXP_GRID: [f64; 4] = [0.0, 0.05, 0.25, 1.0];
pub const MISSPEC_FRACTIONS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Strength,
    Weights,
    Misspec,
}

impl SweepKind {
    pub fn tag(self) -> &'static str {
        match self {
            SweepKind::Strength => "strength",
            SweepKind::Weights => "weights",
            SweepKind::Misspec => "misspec",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strength" | "adversarial_strength" => Ok(SweepKind::Strength),
            "weights" | "utility_weights" => Ok(SweepKind::Weights),
            "misspec" | "misspecification" => Ok(SweepKind::Misspec),
            other => Err(Error::Input(format!("unknown sweep `{other}`"))),
        }
    }
}

/// One grid point for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: SweepKind,
    pub strength: Option<f64>,
    pub fraction: Option<f64>,
    pub weights: ScoreWeights,
    pub summary: MethodSummary,
}

/// Scores `verdicts` on the instances of `regime`, in id order.
pub fn summarize_regime(
    instances: &[ScmInstance],
    verdicts: &MethodVerdicts,
    regime: Regime,
    weights: &ScoreWeights,
    run_seeds: usize,
    keep_seed: impl Fn(u64) -> bool,
) -> MethodSummary {
    let pairs: Vec<(&ScmInstance, Decision)> = instances
        .iter()
        .zip(&verdicts.traces)
        .filter(|(i, _)| i.id.regime == regime && keep_seed(i.id.seed))
        .map(|(i, t)| (i, t.terminal.decision))
        .collect();
    aggregate(&verdicts.method, regime, &pairs, weights, run_seeds)
}

fn builtin(methods: &[MethodId]) -> Vec<MethodId> {
    methods
        .iter()
        .filter(|m| !matches!(m, MethodId::Replay(_)))
        .cloned()
        .collect()
}

/// Regenerates the adversarial benchmark at each strength and re-runs every
/// built-in method. Instance streams do not depend on the strength, so
/// grid points differ only through the hidden coefficients.
pub fn strength_sweep(
    base: &BenchmarkSpec,
    methods: &[MethodId],
    verifier: &VerifierConfig,
    weights: &ScoreWeights,
) -> Result<Vec<SweepRow>> {
    let methods = builtin(methods);
    let mut rows = Vec::new();
    for s in STRENGTH_GRID {
        let spec = BenchmarkSpec {
            adversarial_strength: s,
            regimes: vec![Regime::Adversarial],
            ..base.clone()
        };
        let bench = build_benchmark(&spec)?;
        let ctx = MethodContext::new(verifier.clone(), &bench.instances);
        for v in run_methods(&bench.instances, &methods, &ctx) {
            rows.push(SweepRow {
                kind: SweepKind::Strength,
                strength: Some(s),
                fraction: None,
                weights: *weights,
                summary: summarize_regime(
                    &bench.instances,
                    &v,
                    Regime::Adversarial,
                    weights,
                    spec.seeds.len(),
                    |_| true,
                ),
            });
        }
    }
    Ok(rows)
}

/// Re-scores cached verdicts on the 5 x 4 weight grid. Decisions never
/// depend on the weights, so nothing is re-run.
pub fn weight_sweep(
    instances: &[ScmInstance],
    verdicts: &[MethodVerdicts],
    regimes: &[Regime],
    run_seeds: usize,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for w_miss in W_MISS_GRID {
        for c_exp in C_EXP_GRID {
            let weights = ScoreWeights { w_miss, c_exp };
            for &regime in regimes {
                for v in verdicts {
                    rows.push(SweepRow {
                        kind: SweepKind::Weights,
                        strength: None,
                        fraction: None,
                        weights,
                        summary: summarize_regime(instances, v, regime, &weights, run_seeds, |_| true),
                    });
                }
            }
        }
    }
    rows
}

/// Copies of `instances` whose committed graphs have `fraction` of their
/// observed confounders relabelled latent. The shuffle stream is keyed by
/// instance only, so dropped sets are nested across fractions.
pub fn misspecify(instances: &[ScmInstance], fraction: f64) -> Result<Vec<ScmInstance>> {
    instances
        .iter()
        .map(|inst| {
            let observed = inst.graph.observed_confounders();
            let mut stream = rng::keyed(inst.id.key_parts().into_iter().chain([b"misspec".to_vec()]));
            let graph = relabel_latent(&inst.graph, &observed, fraction, &mut stream)?;
            Ok(ScmInstance { graph, ..inst.clone() })
        })
        .collect()
}

/// Runs the moderate benchmark with committed graphs misspecified at each
/// relabel fraction.
pub fn misspec_sweep(
    base: &BenchmarkSpec,
    methods: &[MethodId],
    verifier: &VerifierConfig,
    weights: &ScoreWeights,
) -> Result<Vec<SweepRow>> {
    let methods = builtin(methods);
    let spec = BenchmarkSpec {
        regimes: vec![Regime::Moderate],
        ..base.clone()
    };
    let bench = build_benchmark(&spec)?;
    let mut rows = Vec::new();
    for f in MISSPEC_FRACTIONS {
        let instances = misspecify(&bench.instances, f)?;
        let ctx = MethodContext::new(verifier.clone(), &instances);
        for v in run_methods(&instances, &methods, &ctx) {
            rows.push(SweepRow {
                kind: SweepKind::Misspec,
                strength: None,
                fraction: Some(f),
                weights: *weights,
                summary: summarize_regime(&instances, &v, Regime::Moderate, weights, spec.seeds.len(), |_| true),
            });
        }
    }
    Ok(rows)
}
