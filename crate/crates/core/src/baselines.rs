//! Comparison verdict providers and recorded-verdict replay.
//!
//! Every provider sees the same redacted view of an instance: the action
//! frame, the committed graph and the data. Only [`MethodId::OracleScm`]
//! is handed the planted effect, and it is handed nothing else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::{ActionFrame, Family, InstanceId, Regime, ScmInstance};
use crate::data::DataFrame;
use crate::error::{Error, Result};
use crate::estimation::{adjusted_effect, unadjusted_difference, z_quantile};
use crate::graph::CausalGraph;
use crate::verifier::{run_two_stage, triage, Decision, Evidence, TwoStage, Verdict, VerifierConfig};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    OracleScm,
    Civex,
    CivexCertOnly,
    CausalNoExperiment,
    ContextOnlyNoCausal,
    ObservationalAssociation,
    AlwaysAbstain,
    PolicyGate,
    SchemaGate,
    SemanticOntologyGate,
    FamilyMajorityClassifier,
    NameOnlyClassifier,
    Replay(String),
}

impl MethodId {
    /// Every built-in method, in report order.
    pub const BUILTIN: [MethodId; 12] = [
        MethodId::OracleScm,
        MethodId::Civex,
        MethodId::CivexCertOnly,
        MethodId::CausalNoExperiment,
        MethodId::ContextOnlyNoCausal,
        MethodId::ObservationalAssociation,
        MethodId::AlwaysAbstain,
        MethodId::PolicyGate,
        MethodId::SchemaGate,
        MethodId::SemanticOntologyGate,
        MethodId::FamilyMajorityClassifier,
        MethodId::NameOnlyClassifier,
    ];

    pub fn name(&self) -> String {
        match self {
            MethodId::OracleScm => "OracleSCM".into(),
            MethodId::Civex => "CIVeX".into(),
            MethodId::CivexCertOnly => "CIVeX-CertOnly".into(),
            MethodId::CausalNoExperiment => "CausalNoExperiment".into(),
            MethodId::ContextOnlyNoCausal => "ContextOnlyNoCausal".into(),
            MethodId::ObservationalAssociation => "ObservationalAssociation".into(),
            MethodId::AlwaysAbstain => "AlwaysAbstain".into(),
            MethodId::PolicyGate => "PolicyGate".into(),
            MethodId::SchemaGate => "SchemaGate".into(),
            MethodId::SemanticOntologyGate => "SemanticOntologyGate".into(),
            MethodId::FamilyMajorityClassifier => "FamilyMajorityClassifier".into(),
            MethodId::NameOnlyClassifier => "NameOnlyClassifier".into(),
            MethodId::Replay(tag) => format!("Replay:{tag}"),
        }
    }

    /// Execute-unless-forbidden gates.
    pub fn is_policy_gate(&self) -> bool {
        matches!(
            self,
            MethodId::PolicyGate
                | MethodId::SchemaGate
                | MethodId::SemanticOntologyGate
                | MethodId::FamilyMajorityClassifier
        )
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(tag) = s.strip_prefix("Replay:") {
            if tag.is_empty() {
                return Err(Error::UnknownMethod(s.to_owned()));
            }
            return Ok(MethodId::Replay(tag.to_owned()));
        }
        MethodId::BUILTIN
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_owned()))
    }
}

impl Serialize for MethodId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for MethodId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// What a non-oracle provider is allowed to see at one stage.
#[derive(Debug, Clone, Copy)]
pub struct DecisionInput<'a> {
    pub id: InstanceId,
    pub frame: &'a ActionFrame,
    pub graphs: &'a [CausalGraph],
    pub evidence: Evidence<'a>,
}

/// Family-pooled association statistics for one (seed, regime, family).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledStat {
    pub delta_hat: f64,
    pub lcb: f64,
    pub instances: usize,
}

/// Pooled association per (seed, regime, family): the mean over instances
/// of each observational frame's treated-minus-control outcome mean, with
/// a one-sided bound from the spread of those per-instance differences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PooledAssociation {
    cells: BTreeMap<(u64, Regime, Family), PooledStat>,
}

impl PooledAssociation {
    pub fn from_frames<'a>(frames: impl IntoIterator<Item = (InstanceId, &'a DataFrame)>, alpha: f64) -> Self {
        let mut diffs: BTreeMap<(u64, Regime, Family), Vec<f64>> = BTreeMap::new();
        for (id, d) in frames {
            let (Some(t), Some(y)) = (d.column("T"), d.column("Y")) else {
                continue;
            };
            let arm = |v: f64| {
                let ys: Vec<f64> = t
                    .iter()
                    .zip(&y)
                    .filter(|(ti, _)| **ti == v)
                    .map(|(_, yi)| *yi)
                    .collect();
                (!ys.is_empty()).then(|| ys.iter().sum::<f64>() / ys.len() as f64)
            };
            if let (Some(m1), Some(m0)) = (arm(1.0), arm(0.0)) {
                diffs.entry((id.seed, id.regime, id.family)).or_default().push(m1 - m0);
            }
        }
        let z = z_quantile(alpha);
        let cells = diffs
            .into_iter()
            .map(|(k, v)| {
                let m = v.len() as f64;
                let mean = v.iter().sum::<f64>() / m;
                let se = if v.len() > 1 {
                    (v.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
                } else {
                    f64::INFINITY
                };
                (
                    k,
                    PooledStat {
                        delta_hat: mean,
                        lcb: mean - z * se,
                        instances: v.len(),
                    },
                )
            })
            .collect();
        PooledAssociation { cells }
    }

    pub fn from_instances(instances: &[ScmInstance], alpha: f64) -> Self {
        Self::from_frames(instances.iter().map(|i| (i.id, &i.observational)), alpha)
    }

    pub fn get(&self, id: &InstanceId) -> Option<PooledStat> {
        self.cells.get(&(id.seed, id.regime, id.family)).copied()
    }
}

/// One recorded verdict pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordedVerdict {
    pub stage1: Decision,
    pub terminal: Decision,
}

const SHARD_COLUMNS: [&str; 6] = ["seed", "regime", "family", "index", "stage1", "terminal"];

#[derive(Debug, Deserialize)]
struct ReplayRow {
    seed: u64,
    regime: String,
    family: String,
    index: usize,
    stage1: String,
    terminal: String,
}

/// Recorded verdicts keyed by tag and instance id. A shard is loaded whole
/// or not at all.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayStore {
    tags: BTreeMap<String, BTreeMap<InstanceId, RecordedVerdict>>,
    /// Shards that failed to load, with the reason.
    pub rejected: Vec<(String, String)>,
}

impl ReplayStore {
    /// Parses one shard's CSV text. Unknown columns are ignored.
    pub fn parse_shard(text: &str) -> Result<Vec<(InstanceId, RecordedVerdict)>> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        for col in SHARD_COLUMNS {
            if !header.iter().any(|h| h == col) {
                return Err(Error::Input(format!("replay shard has no `{col}` column")));
            }
        }
        let mut out = Vec::new();
        for row in reader.deserialize::<ReplayRow>() {
            let row = row?;
            let regime: Regime = row.regime.parse()?;
            let family: Family = row.family.parse()?;
            out.push((
                InstanceId::new(row.seed, regime, family, row.index),
                RecordedVerdict {
                    stage1: row.stage1.parse()?,
                    terminal: row.terminal.parse()?,
                },
            ));
        }
        Ok(out)
    }

    pub fn insert_shard(&mut self, tag: &str, rows: Vec<(InstanceId, RecordedVerdict)>) {
        self.tags.entry(tag.to_owned()).or_default().extend(rows);
    }

    /// Registers `tag` with no verdicts, so every lookup misses.
    pub fn ensure_tag(&mut self, tag: &str) {
        self.tags.entry(tag.to_owned()).or_default();
    }

    /// Loads every `*.csv` under `dir` into `tag`, in file-name order.
    pub fn load_dir(&mut self, tag: &str, dir: &Path) -> Result<()> {
        self.ensure_tag(tag);
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        for path in files {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            match Self::parse_shard(&text) {
                Ok(rows) => self.insert_shard(tag, rows),
                Err(e) => self.rejected.push((path.display().to_string(), e.to_string())),
            }
        }
        Ok(())
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.contains_key(tag)
    }

    pub fn lookup(&self, tag: &str, id: &InstanceId) -> Option<RecordedVerdict> {
        self.tags.get(tag)?.get(id).copied()
    }

    /// Seeds with at least one recorded verdict under `tag`.
    pub fn seeds_covered(&self, tag: &str) -> BTreeSet<u64> {
        self.tags
            .get(tag)
            .map(|m| m.keys().map(|id| id.seed).collect())
            .unwrap_or_default()
    }
}

/// Shared, read-only state for a batch of decisions.
#[derive(Debug, Clone, Default)]
pub struct MethodContext {
    pub verifier: VerifierConfig,
    pub pooled: PooledAssociation,
    pub replay: ReplayStore,
    /// Use each instance's own frame for ObservationalAssociation instead
    /// of the family-pooled statistic.
    pub association_per_instance: bool,
}

impl MethodContext {
    pub fn new(verifier: VerifierConfig, instances: &[ScmInstance]) -> Self {
        MethodContext {
            pooled: PooledAssociation::from_instances(instances, verifier.alpha),
            verifier,
            replay: ReplayStore::default(),
            association_per_instance: false,
        }
    }
}

fn gate(input: &DecisionInput<'_>, cfg: &VerifierConfig, note: &str) -> Verdict {
    if cfg.forbidden_tools.contains(&input.frame.tool) {
        Verdict::refuse(
            Decision::Reject,
            None,
            format!("tool `{}` is on the forbidden list", input.frame.tool),
        )
        .with_note(note)
    } else {
        Verdict::execute(None, None).with_note(note)
    }
}

fn name_only(frame: &ActionFrame) -> Verdict {
    match Family::from_tool(&frame.tool) {
        Some(Family::Cache | Family::LogRetention) => {
            Verdict::execute(None, None).with_note(format!("`{}` is on the benign-name allow list", frame.tool))
        }
        _ => Verdict::refuse(
            Decision::Abstain,
            None,
            format!("`{}` is not on the benign-name allow list", frame.tool),
        ),
    }
}

/// One stage of a non-oracle, non-replay method.
pub fn decide_stage(method: &MethodId, input: DecisionInput<'_>, ctx: &MethodContext) -> Verdict {
    let cfg = &ctx.verifier;
    let d = input.evidence.data();
    let (t, y) = (
        input.frame.target_variable.as_str(),
        input.frame.utility_variable.as_str(),
    );
    match method {
        MethodId::Civex => triage(input.frame, input.graphs, input.evidence, cfg),
        MethodId::CivexCertOnly | MethodId::CausalNoExperiment => {
            let cert_only = VerifierConfig {
                cert_only: true,
                ..cfg.clone()
            };
            triage(input.frame, input.graphs, input.evidence, &cert_only)
        }
        MethodId::ContextOnlyNoCausal => {
            let covariates: Vec<String> = d.columns().iter().filter(|c| *c != t && *c != y).cloned().collect();
            match adjusted_effect(d, t, y, &covariates, cfg.alpha) {
                Ok(e) if e.lcb >= cfg.tau_u => {
                    Verdict::execute(None, None).with_note(format!("context-adjusted LCB {:.4} clears tau_u", e.lcb))
                }
                Ok(e) => Verdict::refuse(
                    Decision::Reject,
                    None,
                    format!("context-adjusted LCB {:.4} is below tau_u", e.lcb),
                ),
                Err(e) => Verdict::refuse(Decision::Abstain, None, format!("estimation failure: {e}")),
            }
        }
        MethodId::ObservationalAssociation => {
            let stat = if ctx.association_per_instance {
                unadjusted_difference(d, t, y, cfg.alpha)
                    .ok()
                    .map(|e| (e.theta_hat, e.lcb))
            } else {
                ctx.pooled.get(&input.id).map(|s| (s.delta_hat, s.lcb))
            };
            match stat {
                Some((delta, lcb)) if delta > 0.0 && lcb >= 0.0 => {
                    Verdict::execute(None, None).with_note(format!("association {delta:.4} with LCB {lcb:.4}"))
                }
                Some((delta, lcb)) => Verdict::refuse(
                    Decision::Reject,
                    None,
                    format!("association {delta:.4} with LCB {lcb:.4} does not clear zero"),
                ),
                None => Verdict::refuse(Decision::Abstain, None, "association unavailable"),
            }
        }
        MethodId::AlwaysAbstain => Verdict::refuse(Decision::Abstain, None, "refuses every state-changing action"),
        MethodId::PolicyGate => match unadjusted_difference(d, t, y, cfg.alpha) {
            Ok(e) if e.theta_hat > 0.0 => {
                Verdict::execute(None, None).with_note(format!("observational gradient {:.4} is positive", e.theta_hat))
            }
            Ok(e) => Verdict::refuse(
                Decision::Reject,
                None,
                format!("observational gradient {:.4} is not positive", e.theta_hat),
            ),
            Err(e) => Verdict::refuse(Decision::Abstain, None, format!("estimation failure: {e}")),
        },
        MethodId::SchemaGate => gate(&input, cfg, "tool schema validates"),
        MethodId::SemanticOntologyGate => gate(&input, cfg, "target and utility variables are in the tool ontology"),
        MethodId::FamilyMajorityClassifier => gate(
            &input,
            cfg,
            "counterbalanced family has no majority; defaults to execute",
        ),
        MethodId::NameOnlyClassifier => name_only(input.frame),
        MethodId::OracleScm | MethodId::Replay(_) => Verdict::refuse(
            Decision::Abstain,
            None,
            format!("{method} cannot run on a redacted input"),
        ),
    }
}

/// Runs `method` on `inst` through the two-stage protocol.
pub fn decide(method: &MethodId, inst: &ScmInstance, ctx: &MethodContext) -> TwoStage {
    match method {
        MethodId::OracleScm => {
            let v = if inst.spec.theta > 0.0 {
                Verdict::execute(None, None).with_note("planted effect is positive")
            } else {
                Verdict::refuse(Decision::Reject, None, "planted effect is not positive")
            };
            TwoStage {
                stage1: v.clone(),
                stage2: None,
                terminal: v,
            }
        }
        MethodId::Replay(tag) => {
            let (stage1, terminal) = match ctx.replay.lookup(tag, &inst.id) {
                Some(r) => {
                    let as_verdict = |d: Decision| match d {
                        Decision::Execute => Verdict::execute(None, None).with_note("recorded verdict"),
                        other => Verdict::refuse(other, None, "recorded verdict"),
                    };
                    let terminal = match r.terminal {
                        Decision::Experiment => {
                            Verdict::refuse(Decision::Abstain, None, "recorded terminal verdict was EXPERIMENT")
                        }
                        d => as_verdict(d),
                    };
                    (as_verdict(r.stage1), terminal)
                }
                None => {
                    let v = Verdict::refuse(Decision::Abstain, None, "no recorded verdict");
                    (v.clone(), v)
                }
            };
            TwoStage {
                stage1,
                stage2: None,
                terminal,
            }
        }
        _ => run_two_stage(inst, |frame, graphs, evidence| {
            decide_stage(
                method,
                DecisionInput {
                    id: inst.id,
                    frame,
                    graphs,
                    evidence,
                },
                ctx,
            )
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in MethodId::BUILTIN {
            assert_eq!(m.name().parse::<MethodId>().unwrap(), m);
        }
        assert_eq!(
            "Replay:opus".parse::<MethodId>().unwrap(),
            MethodId::Replay("opus".into())
        );
        assert!("Replay:".parse::<MethodId>().is_err());
        assert!("Bogus".parse::<MethodId>().is_err());
    }

    #[test]
    fn shard_parsing_ignores_extra_columns() {
        let text =
            "seed,regime,family,index,stage1,terminal,model\n42,adversarial,cache_operation,3,EXPERIMENT,EXECUTE,x\n";
        let rows = ReplayStore::parse_shard(text).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].0, InstanceId::new(42, Regime::Adversarial, Family::Cache, 3));
        assert_eq!(rows[0].1.terminal, Decision::Execute);
        assert!(ReplayStore::parse_shard(
            "seed,regime,family,index,stage1,terminal\n1,moderate,nope,0,EXECUTE,EXECUTE\n"
        )
        .is_err());
    }
}
