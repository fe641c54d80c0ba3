//! The two-stage protocol on adversarial instances: stage 1 sees the
//! latent-confounded graph and asks for an experiment, stage 2 decides on
//! the randomized frame.

use civex::bench::{build_benchmark, BenchmarkSpec, Regime};
use civex::verifier::{run_two_stage, triage, VerifierConfig};

fn main() -> civex::Result<()> {
    let bench = build_benchmark(&BenchmarkSpec {
        seeds: vec![42],
        regimes: vec![Regime::Adversarial],
        ..BenchmarkSpec::default()
    })?;
    let cfg = VerifierConfig::default();
    for inst in bench.instances.iter().step_by(16) {
        let trace = run_two_stage(inst, |f, g, e| triage(f, g, e, &cfg));
        let stage2 = trace.stage2.as_ref().map_or("-".to_owned(), |v| v.decision.to_string());
        let lcb = trace.terminal.certificate.as_ref().map(|c| c.lcb_alpha);
        println!(
            "{:<40} theta {:+.2}  stage1 {:<10} stage2 {:<8} terminal {:<8} lcb {:?}",
            inst.id.to_string(),
            inst.spec.theta,
            trace.stage1.decision.to_string(),
            stage2,
            trace.terminal.decision.to_string(),
            lcb
        );
    }
    Ok(())
}
