//! Recorded verdicts from an external provider scored alongside CIVeX.
//! The shard here is synthesized from a keyword rule and covers only
//! two of the seven seeds; missing instances count as abstentions.

use civex::baselines::{MethodContext, MethodId, ReplayStore};
use civex::bench::{build_benchmark, BenchmarkSpec, Regime};
use civex::evaluation::{run_methods, summarize_regime, ScoreWeights};
use civex::verifier::VerifierConfig;

fn main() -> civex::Result<()> {
    let spec = BenchmarkSpec::default();
    let bench = build_benchmark(&spec)?;
    let mut shard = String::from("seed,regime,family,index,stage1,terminal\n");
    for inst in bench.instances.iter().filter(|i| i.id.seed <= 43) {
        let verdict = if inst.frame.reversible { "EXECUTE" } else { "ABSTAIN" };
        shard.push_str(&format!(
            "{},{},{},{},{verdict},{verdict}\n",
            inst.id.seed,
            inst.id.regime.tag(),
            inst.id.family.name(),
            inst.id.index
        ));
    }
    let mut ctx = MethodContext::new(VerifierConfig::default(), &bench.instances);
    let mut store = ReplayStore::default();
    store.insert_shard("reversible-only", ReplayStore::parse_shard(&shard)?);
    println!("shard covers seeds {:?}", store.seeds_covered("reversible-only"));
    ctx.replay = store;

    let methods = [MethodId::Civex, MethodId::Replay("reversible-only".into())];
    let verdicts = run_methods(&bench.instances, &methods, &ctx);
    let w = ScoreWeights::default();
    for regime in Regime::ALL {
        for v in &verdicts {
            let s = summarize_regime(&bench.instances, v, regime, &w, spec.seeds.len(), |seed| seed <= 43);
            println!(
                "{:<12} {:<24} false-exec {:>5.1}%  utility {:+.3}",
                regime.tag(),
                s.method.name(),
                100.0 * s.false_exec_per_instance,
                s.mean_utility
            );
        }
    }
    Ok(())
}
