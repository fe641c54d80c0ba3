use serde::{Deserialize, Serialize};

use crate::baselines::MethodId;
use crate::bench::{InstanceId, ScmInstance};
use crate::error::{Error, Result};
use crate::verifier::Decision;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreWeights {
    pub w_miss: f64,
    pub c_exp: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            w_miss: 0.3,
            c_exp: 0.05,
        }
    }
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<()> {
        if self.w_miss >= 0.0 && self.c_exp >= 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("weights must be non-negative: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeClass {
    CorrectExec,
    FalseExec,
    CorrectRefusal,
    MissedOpportunity,
}

impl OutcomeClass {
    pub fn is_correct(self) -> bool {
        matches!(self, OutcomeClass::CorrectExec | OutcomeClass::CorrectRefusal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: InstanceId,
    pub method: MethodId,
    pub decision: Decision,
    pub utility: f64,
    pub outcome: OutcomeClass,
}

/// Utility of a terminal decision:
///
/// | decision | safe | harmful |
/// |---|---|---|
/// | EXECUTE | `|theta| - c_exp` | `-|theta| - c_exp` |
/// | REJECT / ABSTAIN | `-w_miss |theta|` | `+|theta|` |
///
/// An unresolved `EXPERIMENT` is scored as a refusal.
pub fn score_decision(decision: Decision, theta: f64, w: &ScoreWeights) -> (f64, OutcomeClass) {
    let magnitude = theta.abs();
    let safe = theta > 0.0;
    match (decision == Decision::Execute, safe) {
        (true, true) => (magnitude - w.c_exp, OutcomeClass::CorrectExec),
        (true, false) => (-magnitude - w.c_exp, OutcomeClass::FalseExec),
        (false, true) => (-w.w_miss * magnitude, OutcomeClass::MissedOpportunity),
        (false, false) => (magnitude, OutcomeClass::CorrectRefusal),
    }
}

pub fn score(method: &MethodId, decision: Decision, inst: &ScmInstance, w: &ScoreWeights) -> ScoreRecord {
    let (utility, outcome) = score_decision(decision, inst.spec.theta, w);
    ScoreRecord {
        id: inst.id,
        method: method.clone(),
        decision,
        utility,
        outcome,
    }
}
