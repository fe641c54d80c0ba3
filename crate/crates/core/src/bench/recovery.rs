use serde::{Deserialize, Serialize};

use super::family::{Family, Regime};
use super::instance::{sample_instance, InstanceId, SampleOptions};
use crate::error::Result;
use crate::estimation::adjusted_effect;
use crate::rng;

/// Summary of adjusted-OLS recovery of the planted effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub family: Family,
    pub regime: Regime,
    pub n_instances: usize,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
    /// Mean of `(theta_hat - theta) * -sign(theta)`: positive when the
    /// estimate is pushed toward the wrong sign.
    pub mean_flip_bias: f64,
    pub tolerance: f64,
    /// `max_abs_error < tolerance`. Expected for the moderate regime only.
    pub pass: bool,
}

/// Samples `n_instances` instances with fair-coin labels and regresses `Y`
/// on `T` plus the observed confounders of each observational frame.
pub fn recovery_check(
    family: Family,
    regime: Regime,
    n_instances: usize,
    opts: &SampleOptions,
    tolerance: f64,
    seed: u64,
) -> Result<RecoveryReport> {
    let mut errors = Vec::with_capacity(n_instances);
    let mut flip = 0.0;
    for index in 0..n_instances {
        let id = InstanceId::new(seed, regime, family, index);
        let mut stream = rng::keyed(id.key_parts().into_iter().chain([b"recovery".to_vec()]));
        let inst = sample_instance(id, opts, None, &mut stream)?;
        let set = inst.graph.observed_confounders();
        let est = adjusted_effect(&inst.observational, "T", "Y", &set, 0.05)?;
        let err = est.theta_hat - inst.spec.theta;
        errors.push(err.abs());
        flip -= err * inst.spec.theta.signum();
    }
    let n = n_instances.max(1) as f64;
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(RecoveryReport {
        family,
        regime,
        n_instances,
        mean_abs_error: errors.iter().sum::<f64>() / n,
        max_abs_error,
        mean_flip_bias: flip / n,
        tolerance,
        pass: max_abs_error < tolerance,
    })
}
