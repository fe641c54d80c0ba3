//! The add-index example: two observed confounders, a reversible cheap
//! action and enough data to certify a positive effect.

use civex::bench::{generate_frame, ActionFrame, Confounder, Family, ScmSpec};
use civex::graph::CausalGraph;
use civex::rng;
use civex::verifier::{triage, verify_certificate, Evidence, VerifierConfig};

fn main() -> civex::Result<()> {
    let confounder = |name: &str, g, b| Confounder {
        name: name.into(),
        mean: 100.0,
        sd: 20.0,
        treat_coef: g,
        outcome_coef: b,
        hidden: false,
    };
    let truth = ScmSpec {
        family: Family::DbIndex,
        theta: 1.8,
        intercept: 0.0,
        confounders: vec![
            confounder("query_volume", 0.9, 0.6),
            confounder("write_volume", -0.4, 0.3),
        ],
        noise_sd: 1.0,
        safe: true,
    };
    let data = generate_frame(&truth, 400, false, &mut rng::keyed(["worked-example"]))?;

    let graph = CausalGraph::new("T", "Y")
        .with_confounder("query_volume")
        .with_confounder("write_volume")
        .with_edge("T", "Y");
    let frame = ActionFrame {
        tool: "add_index".into(),
        target_variable: "T".into(),
        target_value: 1.0,
        utility_variable: "Y".into(),
        cost: 0.05,
        reversible: true,
        interventional: true,
    };

    let verdict = triage(
        &frame,
        &[graph],
        Evidence::Observational(&data),
        &VerifierConfig::default(),
    );
    println!("decision: {} (rule {:?})", verdict.decision, verdict.rule);
    if let Some(cert) = &verdict.certificate {
        println!("{}", serde_json::to_string_pretty(cert)?);
        verify_certificate(cert, &data)?;
        println!("certificate replays against the data");
    }
    Ok(())
}
