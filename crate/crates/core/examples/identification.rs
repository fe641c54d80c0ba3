//! Identification on textbook graphs: backdoor, frontdoor, M-bias and a
//! latent confounder with no mediator.

use civex::graph::{d_separated, identify, CausalGraph};

fn main() -> civex::Result<()> {
    let graphs = [
        (
            "confounded",
            CausalGraph::new("T", "Y").with_confounder("Z").with_edge("T", "Y"),
        ),
        (
            "frontdoor",
            CausalGraph::new("T", "Y")
                .with_edge("T", "M")
                .with_edge("M", "Y")
                .with_bidirected("T", "Y"),
        ),
        (
            "m-bias",
            CausalGraph::new("T", "Y")
                .with_edge("T", "Y")
                .with_edge("A", "T")
                .with_edge("A", "C")
                .with_edge("B", "C")
                .with_edge("B", "Y"),
        ),
        (
            "latent",
            CausalGraph::new("T", "Y").with_edge("T", "Y").with_bidirected("T", "Y"),
        ),
    ];
    for (name, g) in &graphs {
        let r = identify(g)?;
        println!(
            "{name:<11} {:?}\n            {}\n            digest {}",
            r.status,
            r.proof_note,
            &g.digest()[..16]
        );
    }
    let m_bias = &graphs[2].1;
    println!("A _||_ B         : {}", d_separated(m_bias, &["A"], &["B"], &[])?);
    println!("A _||_ B | C     : {}", d_separated(m_bias, &["A"], &["B"], &["C"])?);
    Ok(())
}
