//! Relabels a growing share of each committed graph's observed confounders
//! as latent and shows CIVeX trading executions for experiments.

use civex::baselines::MethodId;
use civex::bench::BenchmarkSpec;
use civex::evaluation::{misspec_sweep, ScoreWeights};
use civex::verifier::VerifierConfig;

fn main() -> civex::Result<()> {
    let spec = BenchmarkSpec {
        seeds: (42..=46).collect(),
        ..BenchmarkSpec::default()
    };
    let methods = [MethodId::Civex, MethodId::CausalNoExperiment, MethodId::PolicyGate];
    let rows = misspec_sweep(&spec, &methods, &VerifierConfig::default(), &ScoreWeights::default())?;
    println!(
        "{:>8} {:>20} {:>9} {:>9} {:>9}",
        "fraction", "method", "executes", "false", "utility"
    );
    for r in &rows {
        let s = &r.summary;
        println!(
            "{:>8.2} {:>20} {:>9} {:>9} {:>+9.3}",
            r.fraction.unwrap_or_default(),
            s.method.name(),
            s.n_execute,
            s.false_exec,
            s.mean_utility
        );
    }
    Ok(())
}
