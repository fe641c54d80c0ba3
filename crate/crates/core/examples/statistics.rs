//! Seed-level bootstrap intervals, pairwise exact Wilcoxon tests and the
//! rule-of-three bound for the default run.

use civex::baselines::{MethodContext, MethodId};
use civex::bench::{build_benchmark, BenchmarkSpec, Regime};
use civex::evaluation::{pairwise_wilcoxon, rule_of_three, run_methods, summarize_regime, ScoreWeights};
use civex::verifier::VerifierConfig;

fn main() -> civex::Result<()> {
    let spec = BenchmarkSpec::default();
    let bench = build_benchmark(&spec)?;
    let methods = [
        MethodId::Civex,
        MethodId::CausalNoExperiment,
        MethodId::PolicyGate,
        MethodId::AlwaysAbstain,
    ];
    let ctx = MethodContext::new(VerifierConfig::default(), &bench.instances);
    let verdicts = run_methods(&bench.instances, &methods, &ctx);
    let w = ScoreWeights::default();
    let summaries: Vec<_> = Regime::ALL
        .into_iter()
        .flat_map(|r| verdicts.iter().map(move |v| (r, v)))
        .map(|(r, v)| summarize_regime(&bench.instances, v, r, &w, spec.seeds.len(), |_| true))
        .collect();
    for s in &summaries {
        let seeds: Vec<String> = s.seed_means.iter().map(|m| format!("{:+.2}", m.mean_utility)).collect();
        println!(
            "{:<12} {:<20} {:+.3} [{:+.3}, {:+.3}]  seeds {}",
            s.regime.tag(),
            s.method.name(),
            s.mean_utility,
            s.ci_lo,
            s.ci_hi,
            seeds.join(" ")
        );
    }
    for row in pairwise_wilcoxon(&summaries) {
        println!("{row:?}");
    }
    println!(
        "rule of three: 1890 clean -> {:.4}, 7 clean seeds -> {:.3}",
        rule_of_three(1890).unwrap(),
        rule_of_three(7).unwrap()
    );
    Ok(())
}
