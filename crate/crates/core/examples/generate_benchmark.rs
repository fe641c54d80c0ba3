//! Generates a small benchmark, writes it as JSONL and prints the
//! counterbalance table and per-regime association diagnostics.
//!
//! ```text
//! cargo run --example generate_benchmark -- [out.jsonl]
//! ```

use std::fs::File;
use std::io::BufWriter;

use civex::bench::{build_benchmark, write_jsonl, BenchmarkSpec, Regime};
use civex::evaluation::regime_diagnostics;

fn main() -> civex::Result<()> {
    let spec = BenchmarkSpec {
        seeds: vec![42, 43],
        ..BenchmarkSpec::default()
    };
    let bench = build_benchmark(&spec)?;
    println!("{} instances", bench.instances.len());
    for row in bench.counterbalance.aggregated() {
        println!("{row:?}");
    }
    for regime in Regime::ALL {
        let d = regime_diagnostics(bench.instances.iter().filter(|i| i.id.regime == regime));
        println!(
            "{regime}: n={} mean association {:+.3}, bias {:+.3}, sign flips {:.1}%",
            d.n,
            d.mean_delta_hat,
            d.mean_bias,
            100.0 * d.sign_flip_fraction
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        let file = File::create(&path).map_err(|e| civex::Error::io(&path, e))?;
        write_jsonl(&bench.instances, BufWriter::new(file))?;
        println!("wrote {path}");
    }
    Ok(())
}
