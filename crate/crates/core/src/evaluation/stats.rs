use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Key of the bootstrap resampling stream. Independent of benchmark seeds.
pub const BOOTSTRAP_KEY: u64 = 0x0B00_75A3_9C1D_2E4F;
pub const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Quantile with linear interpolation between order statistics
/// (`h = (n - 1) p`). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 95% percentile bootstrap interval of the mean of `values`, using
/// `resamples` draws from the stream keyed by `key`.
pub fn bootstrap_ci(values: &[f64], resamples: usize, key: u64) -> Option<(f64, f64)> {
    if values.is_empty() || resamples == 0 {
        return None;
    }
    let mut stream = rng::stream(key);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[stream.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    Some((quantile_sorted(&means, 0.025), quantile_sorted(&means, 0.975)))
}

/// [`bootstrap_ci`] with the default key and resample count.
pub fn seed_bootstrap_ci(seed_means: &[f64]) -> Option<(f64, f64)> {
    bootstrap_ci(seed_means, BOOTSTRAP_RESAMPLES, BOOTSTRAP_KEY)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub p_value: f64,
    /// Sum of ranks of positive differences.
    pub w_plus: f64,
    /// Non-zero differences used.
    pub n_used: usize,
    pub zeros_dropped: usize,
    pub warning: Option<String>,
}

/// Exact two-sided Wilcoxon signed-rank test by enumerating all `2^n`
/// sign assignments. Zero differences are dropped; tied magnitudes get
/// averaged ranks.
pub fn wilcoxon_exact(diffs: &[f64]) -> Result<WilcoxonResult> {
    if diffs.is_empty() || diffs.len() > 20 {
        return Err(Error::Input(format!(
            "exact Wilcoxon needs 1 to 20 differences, got {}",
            diffs.len()
        )));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::Input("differences must be finite".into()));
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let zeros_dropped = diffs.len() - nonzero.len();
    let n = nonzero.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            p_value: 1.0,
            w_plus: 0.0,
            n_used: 0,
            zeros_dropped,
            warning: Some("all differences are zero".into()),
        });
    }

    // Doubled ranks keep averaged ties integral.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| nonzero[a].abs().total_cmp(&nonzero[b].abs()));
    let mut rank2 = vec![0u64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && nonzero[order[j + 1]].abs() == nonzero[order[i]].abs() {
            j += 1;
        }
        // Ranks i+1..=j+1 averaged, doubled: (i + 1 + j + 1).
        for &k in &order[i..=j] {
            rank2[k] = (i + j + 2) as u64;
        }
        i = j + 1;
    }
    let observed: u64 = (0..n).filter(|&k| nonzero[k] > 0.0).map(|k| rank2[k]).sum();

    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u32..(1u32 << n) {
        let w: u64 = (0..n).filter(|&k| mask & (1 << k) != 0).map(|k| rank2[k]).sum();
        if w <= observed {
            le += 1;
        }
        if w >= observed {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    let p = (2.0 * le.min(ge) as f64 / total).min(1.0);
    Ok(WilcoxonResult {
        p_value: p,
        w_plus: observed as f64 / 2.0,
        n_used: n,
        zeros_dropped,
        warning: None,
    })
}

/// Upper 95% bound `3 / n` on an event probability after `n` clean
/// trials, capped at 1.
pub fn rule_of_three(n: usize) -> Option<f64> {
    (n > 0).then(|| (3.0 / n as f64).min(1.0))
}
