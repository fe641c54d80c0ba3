//! Builds the default benchmark, runs every built-in method and prints the
//! moderate and adversarial result tables.

use std::time::Instant;

use civex::baselines::{MethodContext, MethodId};
use civex::bench::{build_benchmark, BenchmarkSpec, Regime};
use civex::evaluation::{render_markdown, run_methods, summarize_regime, ScoreWeights};
use civex::verifier::VerifierConfig;

fn main() -> civex::Result<()> {
    let start = Instant::now();
    let spec = BenchmarkSpec::default();
    let bench = build_benchmark(&spec)?;
    println!(
        "generated {} instances in {:.1?}",
        bench.instances.len(),
        start.elapsed()
    );

    let ctx = MethodContext::new(VerifierConfig::default(), &bench.instances);
    let verdicts = run_methods(&bench.instances, &MethodId::BUILTIN, &ctx);
    let weights = ScoreWeights::default();
    let mut summaries = Vec::new();
    for regime in Regime::ALL {
        for v in &verdicts {
            summaries.push(summarize_regime(
                &bench.instances,
                v,
                regime,
                &weights,
                spec.seeds.len(),
                |_| true,
            ));
        }
    }
    println!("{}", render_markdown(&summaries, &[]));
    for s in summaries.iter().filter(|s| s.method == MethodId::PolicyGate) {
        println!("{}: {:?}", s.regime, s.diagnostics);
    }
    println!("total {:.1?}", start.elapsed());
    Ok(())
}
