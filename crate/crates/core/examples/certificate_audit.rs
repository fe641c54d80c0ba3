//! Runs CIVeX on one seed, replays every certificate it issued, then shows
//! that changing one data row or one certificate field breaks the replay.

use civex::baselines::{decide, MethodContext, MethodId};
use civex::bench::{build_benchmark, BenchmarkSpec};
use civex::data::DataFrame;
use civex::verifier::{verify_certificate, EvidenceKind, VerifierConfig};

fn main() -> civex::Result<()> {
    let bench = build_benchmark(&BenchmarkSpec {
        seeds: vec![7],
        ..BenchmarkSpec::default()
    })?;
    let ctx = MethodContext::new(VerifierConfig::default(), &bench.instances);
    let mut issued = Vec::new();
    for inst in &bench.instances {
        if let Some(cert) = decide(&MethodId::Civex, inst, &ctx).terminal.certificate {
            let data = match cert.evidence {
                EvidenceKind::Observational => &inst.observational,
                EvidenceKind::Randomized => &inst.experimental,
            };
            verify_certificate(&cert, data)?;
            issued.push((cert, data));
        }
    }
    println!("{} certificates issued and replayed", issued.len());

    let (cert, data) = &issued[0];
    let mut text = data.canonical_string();
    let last = text.pop().map_or(' ', |c| c);
    text.push(if last == '1' { '2' } else { '1' });
    let edited = DataFrame::parse_canonical(&text)?;
    println!("edited data: {}", verify_certificate(cert, &edited).unwrap_err());

    let mut forged = cert.clone();
    forged.lcb_alpha += 0.5;
    println!("raised bound: {}", verify_certificate(&forged, data).unwrap_err());
    Ok(())
}
