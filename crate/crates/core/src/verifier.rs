//! The four-way triage, certificates and the two-stage experiment protocol.
//!
//! Rules, in order:
//!
//! 1. Non-interventional actions pass; malformed or forbidden ones are rejected.
//! 2. Every committed graph is run through identification.
//! 3. If all graphs are identified, the worst-case (minimum) LCB across graphs
//!    must clear `tau_u` and the action cost must not exceed `tau_r`; the
//!    verdict is then `EXECUTE` with a certificate, otherwise `REJECT`.
//! 4. If any graph is not identified, cheap reversible actions go to
//!    `EXPERIMENT` and everything else to `ABSTAIN`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::{ActionFrame, ScmInstance};
use crate::data::DataFrame;
use crate::error::{Error, Result};
use crate::estimation::{adjusted_effect, frontdoor_effect, provenance_hash, unadjusted_difference, EffectEstimate};
use crate::graph::{identify, CausalGraph, IdStatus, IdentificationResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifierConfig {
    pub alpha: f64,
    pub tau_u: f64,
    pub tau_r: f64,
    /// Map Rule 4's `EXPERIMENT` to `ABSTAIN`.
    pub cert_only: bool,
    /// Tools whose risk class is forbidden outright.
    pub forbidden_tools: Vec<String>,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            alpha: 0.05,
            tau_u: 0.0,
            tau_r: 0.5,
            cert_only: false,
            forbidden_tools: Vec::new(),
        }
    }
}

impl VerifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} is outside (0, 1)", self.alpha)));
        }
        if !(self.tau_r >= 0.0) {
            return Err(Error::Config(format!("tau_r {} is negative", self.tau_r)));
        }
        if !self.tau_u.is_finite() {
            return Err(Error::Config("tau_u must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Execute,
    Reject,
    Experiment,
    Abstain,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Execute => "EXECUTE",
            Decision::Reject => "REJECT",
            Decision::Experiment => "EXPERIMENT",
            Decision::Abstain => "ABSTAIN",
        }
    }

    /// `REJECT` and `ABSTAIN` both decline the action.
    pub fn is_refusal(self) -> bool {
        matches!(self, Decision::Reject | Decision::Abstain)
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Decision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "EXECUTE" => Ok(Decision::Execute),
            "REJECT" => Ok(Decision::Reject),
            "EXPERIMENT" => Ok(Decision::Experiment),
            "ABSTAIN" => Ok(Decision::Abstain),
            other => Err(Error::Input(format!("unknown decision `{other}`"))),
        }
    }
}

/// Labelled assumptions a certificate rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    A1,
    A2,
    A3,
    A4,
    A5,
}

impl Assumption {
    pub fn description(self) -> &'static str {
        match self {
            Assumption::A1 => "SUTVA / no interference",
            Assumption::A2 => "committed graph is a correct DAG of the underlying SCM",
            Assumption::A3 => "positivity / overlap on the adjustment set",
            Assumption::A4 => "estimator consistency and one-sided CI validity",
            Assumption::A5 => "instances are iid draws",
        }
    }
}

/// How the data behind an estimate was collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    Observational,
    /// Treatment randomly assigned; the effect is the plain difference in means.
    Randomized,
}

#[derive(Debug, Clone, Copy)]
pub enum Evidence<'a> {
    Observational(&'a DataFrame),
    Randomized(&'a DataFrame),
}

impl<'a> Evidence<'a> {
    pub fn kind(&self) -> EvidenceKind {
        match self {
            Evidence::Observational(_) => EvidenceKind::Observational,
            Evidence::Randomized(_) => EvidenceKind::Randomized,
        }
    }

    pub fn data(&self) -> &'a DataFrame {
        match self {
            Evidence::Observational(d) | Evidence::Randomized(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphCommitment {
    /// Canonical JSON of the graph.
    pub canonical: String,
    pub digest: String,
}

impl GraphCommitment {
    pub fn of(g: &CausalGraph) -> Self {
        GraphCommitment {
            canonical: g.canonical_json(),
            digest: g.digest(),
        }
    }
}

/// `C = (G, A, pi, theta_hat, LCB, prov, risk)` plus what a replay needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// The graph whose LCB was the minimum across the committed set.
    pub graph_commitment: GraphCommitment,
    /// Digests of every committed graph, in input order.
    pub considered_graphs: Vec<String>,
    pub assumptions: Vec<Assumption>,
    pub proof: IdentificationResult,
    pub evidence: EvidenceKind,
    pub tool: String,
    pub treatment: String,
    pub outcome: String,
    pub theta_hat: f64,
    pub std_err: f64,
    pub lcb_alpha: f64,
    pub alpha: f64,
    pub tau_u: f64,
    pub tau_r: f64,
    pub n_rows: usize,
    pub provenance: String,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    /// Triage rule that produced the verdict; `None` for providers that do
    /// not run the triage.
    pub rule: Option<u8>,
    pub certificate: Option<Certificate>,
    pub refusal_reason: Option<String>,
    /// Free-text audit rationale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn execute(rule: Option<u8>, certificate: Option<Certificate>) -> Self {
        Verdict {
            decision: Decision::Execute,
            rule,
            certificate,
            refusal_reason: None,
            note: None,
        }
    }

    pub fn refuse(decision: Decision, rule: Option<u8>, reason: impl Into<String>) -> Self {
        Verdict {
            decision,
            rule,
            certificate: None,
            refusal_reason: Some(reason.into()),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn malformed(frame: &ActionFrame, graphs: &[CausalGraph]) -> Option<String> {
    if frame.tool.trim().is_empty() {
        return Some("malformed action: missing tool name".into());
    }
    if !(frame.cost >= 0.0) || !frame.cost.is_finite() {
        return Some(format!(
            "malformed action: cost {} is not a non-negative number",
            frame.cost
        ));
    }
    if graphs.is_empty() {
        return Some("malformed action: no committed graph".into());
    }
    for g in graphs {
        if g.treatment() != frame.target_variable {
            return Some(format!(
                "malformed action: target `{}` is not the graph treatment `{}`",
                frame.target_variable,
                g.treatment()
            ));
        }
        if g.outcome() != frame.utility_variable {
            return Some(format!(
                "malformed action: utility `{}` is not the graph outcome `{}`",
                frame.utility_variable,
                g.outcome()
            ));
        }
    }
    None
}

/// Effect estimate licensed by `proof` on `evidence`.
pub fn estimate_for(
    proof: &IdentificationResult,
    treatment: &str,
    outcome: &str,
    evidence: Evidence<'_>,
    alpha: f64,
) -> Result<EffectEstimate> {
    let d = evidence.data();
    let est = match (evidence.kind(), &proof.status) {
        (EvidenceKind::Randomized, _) => unadjusted_difference(d, treatment, outcome, alpha)?,
        (_, IdStatus::Backdoor { adjustment_set }) => adjusted_effect(d, treatment, outcome, adjustment_set, alpha)?,
        (_, IdStatus::Frontdoor { mediators }) => frontdoor_effect(d, treatment, outcome, mediators, alpha)?,
        (_, IdStatus::NotIdentified) => {
            return Err(Error::Input("cannot estimate a query that is not identified".into()))
        }
    };
    Ok(est)
}

/// Runs Rules 1 to 4 on one action.
pub fn triage(frame: &ActionFrame, graphs: &[CausalGraph], evidence: Evidence<'_>, cfg: &VerifierConfig) -> Verdict {
    // Rule 1.
    if !frame.interventional {
        return Verdict::execute(Some(1), None);
    }
    if let Some(reason) = malformed(frame, graphs) {
        return Verdict::refuse(Decision::Reject, Some(1), reason);
    }
    if cfg.forbidden_tools.contains(&frame.tool) {
        return Verdict::refuse(
            Decision::Reject,
            Some(1),
            format!("tool `{}` is in a forbidden risk class", frame.tool),
        );
    }

    // Rule 2.
    let mut proofs = Vec::with_capacity(graphs.len());
    for g in graphs {
        match identify(g) {
            Ok(p) => proofs.push(p),
            Err(e) => return Verdict::refuse(Decision::Reject, Some(1), format!("malformed graph: {e}")),
        }
    }

    // Rule 4.
    if let Some(k) = proofs.iter().position(|p| !p.is_identified()) {
        let why = format!(
            "query not identified under graph {} ({}); A2 cannot license an estimate",
            k, proofs[k].proof_note
        );
        let cheap = frame.cost <= cfg.tau_r;
        return match (cheap, frame.reversible, cfg.cert_only) {
            (true, true, false) => Verdict::refuse(
                Decision::Experiment,
                Some(4),
                format!("{why}; a reversible experiment can resolve it"),
            ),
            (true, true, true) => {
                Verdict::refuse(Decision::Abstain, Some(4), format!("{why}; experiment branch disabled"))
            }
            (false, _, _) => Verdict::refuse(
                Decision::Abstain,
                Some(4),
                format!("{why}; cost {} exceeds tau_r {}", frame.cost, cfg.tau_r),
            ),
            (true, false, _) => Verdict::refuse(Decision::Abstain, Some(4), format!("{why}; action is irreversible")),
        };
    }

    // Rule 3.
    let mut worst: Option<(usize, EffectEstimate)> = None;
    for (k, (g, proof)) in graphs.iter().zip(&proofs).enumerate() {
        let est = match estimate_for(proof, g.treatment(), g.outcome(), evidence, cfg.alpha) {
            Ok(e) => e,
            Err(e) => return Verdict::refuse(Decision::Abstain, Some(3), format!("estimation failure: {e}")),
        };
        if worst.as_ref().is_none_or(|(_, w)| est.lcb < w.lcb) {
            worst = Some((k, est));
        }
    }
    let (k, est) = worst.expect("at least one graph");
    if est.lcb < cfg.tau_u {
        return Verdict::refuse(
            Decision::Reject,
            Some(3),
            format!("LCB {:.4} is below tau_u {}", est.lcb, cfg.tau_u),
        );
    }
    if frame.cost > cfg.tau_r {
        return Verdict::refuse(
            Decision::Reject,
            Some(3),
            format!("cost {} overruns the risk threshold tau_r {}", frame.cost, cfg.tau_r),
        );
    }
    let certificate = Certificate {
        graph_commitment: GraphCommitment::of(&graphs[k]),
        considered_graphs: graphs.iter().map(CausalGraph::digest).collect(),
        assumptions: vec![Assumption::A1, Assumption::A2, Assumption::A3, Assumption::A4],
        proof: proofs[k].clone(),
        evidence: evidence.kind(),
        tool: frame.tool.clone(),
        treatment: graphs[k].treatment().to_owned(),
        outcome: graphs[k].outcome().to_owned(),
        theta_hat: est.theta_hat,
        std_err: est.std_err,
        lcb_alpha: est.lcb,
        alpha: cfg.alpha,
        tau_u: cfg.tau_u,
        tau_r: cfg.tau_r,
        n_rows: est.n,
        provenance: provenance_hash(evidence.data()),
        risk: frame.cost,
    };
    Verdict::execute(Some(3), Some(certificate))
}

fn mismatch(field: &str, detail: impl Into<String>) -> Error {
    Error::CertificateMismatch {
        field: field.to_owned(),
        detail: detail.into(),
    }
}

/// Replays a certificate against the stored data: graph digest, proof,
/// provenance digest, thresholds, and a bit-exact re-estimate.
pub fn verify_certificate(cert: &Certificate, data: &DataFrame) -> Result<()> {
    let graph: CausalGraph = serde_json::from_str(&cert.graph_commitment.canonical)
        .map_err(|e| mismatch("graph_commitment", format!("unparseable graph: {e}")))?;
    if graph.canonical_json() != cert.graph_commitment.canonical || graph.digest() != cert.graph_commitment.digest {
        return Err(mismatch(
            "graph_commitment",
            "digest does not match the committed graph",
        ));
    }
    if !cert.considered_graphs.contains(&cert.graph_commitment.digest) {
        return Err(mismatch(
            "considered_graphs",
            "worst-case graph is not among the considered graphs",
        ));
    }
    let proof = identify(&graph).map_err(|e| mismatch("proof", e.to_string()))?;
    if proof != cert.proof || !proof.is_identified() {
        return Err(mismatch("proof", "identification does not reproduce"));
    }
    let digest = provenance_hash(data);
    if digest != cert.provenance {
        return Err(mismatch(
            "provenance",
            format!("data digest {digest} != {}", cert.provenance),
        ));
    }
    if cert.lcb_alpha < cert.tau_u {
        return Err(mismatch("lcb_alpha", "bound is below tau_u"));
    }
    if cert.risk > cert.tau_r {
        return Err(mismatch("risk", "risk exceeds tau_r"));
    }
    let evidence = match cert.evidence {
        EvidenceKind::Observational => Evidence::Observational(data),
        EvidenceKind::Randomized => Evidence::Randomized(data),
    };
    let est = estimate_for(&proof, &cert.treatment, &cert.outcome, evidence, cert.alpha)
        .map_err(|e| mismatch("theta_hat", e.to_string()))?;
    if est.theta_hat.to_bits() != cert.theta_hat.to_bits() {
        return Err(mismatch(
            "theta_hat",
            format!("{} != {}", est.theta_hat, cert.theta_hat),
        ));
    }
    if est.lcb.to_bits() != cert.lcb_alpha.to_bits() {
        return Err(mismatch("lcb_alpha", format!("{} != {}", est.lcb, cert.lcb_alpha)));
    }
    Ok(())
}

/// Stage trace of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStage {
    pub stage1: Verdict,
    pub stage2: Option<Verdict>,
    pub terminal: Verdict,
}

/// Runs `decide` on the committed graph and observational data. An
/// `EXPERIMENT` verdict is resolved by re-invoking `decide` on the graph
/// with its bidirected edges dropped and the paired randomized frame, or
/// becomes `ABSTAIN` when no safe experiment is available.
pub fn run_two_stage<F>(inst: &ScmInstance, mut decide: F) -> TwoStage
where
    F: FnMut(&ActionFrame, &[CausalGraph], Evidence<'_>) -> Verdict,
{
    let stage1 = decide(
        &inst.frame,
        std::slice::from_ref(&inst.graph),
        Evidence::Observational(&inst.observational),
    );
    if stage1.decision != Decision::Experiment {
        return TwoStage {
            terminal: stage1.clone(),
            stage1,
            stage2: None,
        };
    }
    if !inst.safe_experiment_available {
        let terminal = Verdict::refuse(
            Decision::Abstain,
            stage1.rule,
            "experiment requested but no safe experiment is available",
        );
        return TwoStage {
            stage1,
            stage2: None,
            terminal,
        };
    }
    let resolved = inst.graph.without_bidirected();
    let stage2 = decide(
        &inst.frame,
        std::slice::from_ref(&resolved),
        Evidence::Randomized(&inst.experimental),
    );
    let terminal = if stage2.decision == Decision::Experiment {
        Verdict::refuse(Decision::Abstain, stage2.rule, "experiment requested twice")
    } else {
        stage2.clone()
    };
    TwoStage {
        stage1,
        stage2: Some(stage2),
        terminal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(reversible: bool) -> ActionFrame {
        ActionFrame {
            tool: "add_index".into(),
            target_variable: "T".into(),
            target_value: 1.0,
            utility_variable: "Y".into(),
            cost: 0.05,
            reversible,
            interventional: true,
        }
    }

    fn latent_graph() -> CausalGraph {
        CausalGraph::new("T", "Y").with_edge("T", "Y").with_bidirected("T", "Y")
    }

    fn data() -> DataFrame {
        let t: Vec<f64> = (0..40).map(|i| (i % 2) as f64).collect();
        let y: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(i, v)| 2.0 * v + (i % 5) as f64 * 0.1)
            .collect();
        DataFrame::from_columns(vec![("T".into(), t), ("Y".into(), y)]).unwrap()
    }

    #[test]
    fn latent_reversible_goes_to_experiment() {
        let d = data();
        let v = triage(
            &frame(true),
            &[latent_graph()],
            Evidence::Observational(&d),
            &VerifierConfig::default(),
        );
        assert_eq!(v.decision, Decision::Experiment);
        assert_eq!(v.rule, Some(4));
        let v = triage(
            &frame(false),
            &[latent_graph()],
            Evidence::Observational(&d),
            &VerifierConfig::default(),
        );
        assert_eq!(v.decision, Decision::Abstain);
        let cfg = VerifierConfig {
            cert_only: true,
            ..VerifierConfig::default()
        };
        let v = triage(&frame(true), &[latent_graph()], Evidence::Observational(&d), &cfg);
        assert_eq!(v.decision, Decision::Abstain);
    }

    #[test]
    fn non_interventional_passes_without_certificate() {
        let mut f = frame(true);
        f.interventional = false;
        let v = triage(&f, &[], Evidence::Observational(&data()), &VerifierConfig::default());
        assert_eq!(
            (v.decision, v.rule, v.certificate.is_none()),
            (Decision::Execute, Some(1), true)
        );
    }

    #[test]
    fn malformed_and_forbidden_are_rejected() {
        let d = data();
        let g = CausalGraph::new("T", "Y").with_edge("T", "Y");
        let mut f = frame(true);
        f.cost = -1.0;
        assert_eq!(
            triage(
                &f,
                std::slice::from_ref(&g),
                Evidence::Observational(&d),
                &VerifierConfig::default()
            )
            .decision,
            Decision::Reject
        );
        let mut f = frame(true);
        f.utility_variable = "Z".into();
        assert_eq!(
            triage(
                &f,
                std::slice::from_ref(&g),
                Evidence::Observational(&d),
                &VerifierConfig::default()
            )
            .decision,
            Decision::Reject
        );
        let cfg = VerifierConfig {
            forbidden_tools: vec!["add_index".into()],
            ..VerifierConfig::default()
        };
        assert_eq!(
            triage(&frame(true), &[g], Evidence::Observational(&d), &cfg).decision,
            Decision::Reject
        );
    }

    #[test]
    fn lcb_at_threshold_executes_and_replays() {
        let d = data();
        let g = CausalGraph::new("T", "Y").with_edge("T", "Y");
        let est = unadjusted_difference(&d, "T", "Y", 0.05).unwrap();
        let cfg = VerifierConfig {
            tau_u: est.lcb,
            ..VerifierConfig::default()
        };
        let v = triage(&frame(true), &[g], Evidence::Observational(&d), &cfg);
        assert_eq!(v.decision, Decision::Execute);
        let cert = v.certificate.unwrap();
        verify_certificate(&cert, &d).unwrap();
        let tampered = d.with_rows_swapped(0, 1);
        assert!(matches!(
            verify_certificate(&cert, &tampered),
            Err(Error::CertificateMismatch { field, .. }) if field == "provenance"
        ));
    }

    #[test]
    fn costly_action_is_rejected_after_clearing_lcb() {
        let d = data();
        let g = CausalGraph::new("T", "Y").with_edge("T", "Y");
        let mut f = frame(true);
        f.cost = 0.9;
        let v = triage(&f, &[g], Evidence::Observational(&d), &VerifierConfig::default());
        assert_eq!(v.decision, Decision::Reject);
        assert!(v.refusal_reason.unwrap().contains("risk threshold"));
    }

    #[test]
    fn decision_strings() {
        for d in [
            Decision::Execute,
            Decision::Reject,
            Decision::Experiment,
            Decision::Abstain,
        ] {
            assert_eq!(d.as_str().parse::<Decision>().unwrap(), d);
            assert_eq!(serde_json::to_string(&d).unwrap(), format!("\"{d}\""));
        }
    }
}
