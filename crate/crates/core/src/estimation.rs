//! Effect estimation with one-sided lower confidence bounds.
//!
//! Effects are OLS coefficients on the binary treatment column with the
//! classical homoskedastic standard error. The bound is the Wald form
//! `lcb = theta_hat - z(1 - alpha) * std_err` with a normal quantile.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::data::DataFrame;

/// Relative pivot tolerance for rank-deficiency detection.
pub const PIVOT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("column `{0}` is missing from the data")]
    MissingColumn(String),
    #[error("treatment column `{0}` must be binary")]
    NonBinaryTreatment(String),
    #[error("positivity violated: treatment arm {0} is empty")]
    Positivity(u8),
    #[error("need more than {needed} rows, have {have}")]
    TooFewRows { needed: usize, have: usize },
    #[error("design matrix is singular (column `{0}`)")]
    Singular(String),
    #[error("alpha {0} is outside (0, 1)")]
    BadAlpha(f64),
}

/// Point estimate plus one-sided bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub theta_hat: f64,
    pub std_err: f64,
    pub lcb: f64,
    pub alpha: f64,
    pub n: usize,
    pub adjustment_set: Vec<String>,
    /// Adjustment columns dropped for having zero variance.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<String>,
}

/// Upper `1 - alpha` quantile of the standard normal.
pub fn z_quantile(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha)
}

fn check_alpha(alpha: f64) -> Result<(), EstimationError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(EstimationError::BadAlpha(alpha))
    }
}

fn column(d: &DataFrame, name: &str) -> Result<Vec<f64>, EstimationError> {
    d.column(name)
        .ok_or_else(|| EstimationError::MissingColumn(name.to_owned()))
}

fn treatment_column(d: &DataFrame, name: &str) -> Result<Vec<f64>, EstimationError> {
    let t = column(d, name)?;
    if t.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(EstimationError::NonBinaryTreatment(name.to_owned()));
    }
    for arm in [0u8, 1] {
        if !t.iter().any(|&v| v == f64::from(arm)) {
            return Err(EstimationError::Positivity(arm));
        }
    }
    Ok(t)
}

/// Least-squares fit with classical covariance.
#[derive(Debug, Clone)]
pub(crate) struct OlsFit {
    pub coef: Vec<f64>,
    /// Diagonal of `sigma^2 (X'X)^-1`.
    pub var: Vec<f64>,
}

/// Fits `y ~ 1 + columns` by the normal equations.
///
/// Regressors are centred first (the intercept absorbs the shift), which
/// keeps `X'X` well conditioned when raw covariates sit far from zero.
/// Rank deficiency is judged on the unit-diagonal rescaling of `X'X`.
/// Returned coefficients are for the non-intercept columns, in order.
pub(crate) fn ols(y: &[f64], columns: &[(&str, &[f64])]) -> Result<OlsFit, EstimationError> {
    let n = y.len();
    let p = columns.len() + 1;
    if n <= p {
        return Err(EstimationError::TooFewRows { needed: p, have: n });
    }
    let means: Vec<f64> = columns.iter().map(|(_, c)| c.iter().sum::<f64>() / n as f64).collect();
    let x = |i: usize, j: usize| -> f64 {
        if j == 0 {
            1.0
        } else {
            columns[j - 1].1[i] - means[j - 1]
        }
    };

    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        for a in 0..p {
            let xa = x(i, a);
            xty[a] += xa * y[i];
            for b in a..p {
                xtx[a][b] += xa * x(i, b);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[a][b] = xtx[b][a];
        }
    }

    let singular = |j: usize| {
        let name = if j == 0 { "intercept" } else { columns[j - 1].0 };
        EstimationError::Singular(name.to_owned())
    };
    // Scale to unit diagonal so the pivot tolerance tests rank rather than
    // the units a covariate happens to be recorded in.
    let d: Vec<f64> = (0..p).map(|a| xtx[a][a].sqrt()).collect();
    if let Some(j) = d.iter().position(|v| !(*v > 0.0)) {
        return Err(singular(j));
    }
    let scaled: Vec<Vec<f64>> = (0..p)
        .map(|a| (0..p).map(|b| xtx[a][b] / (d[a] * d[b])).collect())
        .collect();
    let inv = invert_spd(&scaled).map_err(singular)?;
    let inv: Vec<Vec<f64>> = (0..p)
        .map(|a| (0..p).map(|b| inv[a][b] / (d[a] * d[b])).collect())
        .collect();
    let beta: Vec<f64> = (0..p).map(|a| (0..p).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let rss: f64 = (0..n)
        .map(|i| {
            let fitted: f64 = (0..p).map(|a| beta[a] * x(i, a)).sum();
            (y[i] - fitted).powi(2)
        })
        .sum();
    let sigma2 = rss / (n - p) as f64;
    Ok(OlsFit {
        coef: beta[1..].to_vec(),
        var: (1..p).map(|a| (sigma2 * inv[a][a]).max(0.0)).collect(),
    })
}

/// Gauss-Jordan inverse with partial pivoting. On failure returns the
/// column whose pivot fell below `PIVOT_TOLERANCE` times the largest
/// diagonal entry.
fn invert_spd(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, usize> {
    let p = m.len();
    let scale = (0..p).map(|i| m[i][i].abs()).fold(0.0, f64::max);
    let tol = PIVOT_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() <= tol {
            return Err(col);
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..p {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..p {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for j in 0..p {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Ok(inv)
}

fn finish(
    theta_hat: f64,
    std_err: f64,
    alpha: f64,
    n: usize,
    adjustment_set: Vec<String>,
    dropped: Vec<String>,
) -> EffectEstimate {
    EffectEstimate {
        theta_hat,
        std_err,
        lcb: theta_hat - z_quantile(alpha) * std_err,
        alpha,
        n,
        adjustment_set,
        dropped,
    }
}

/// Coefficient on `treatment` from OLS of `outcome` on an intercept, the
/// treatment and the adjustment columns.
///
/// Adjustment columns with zero variance are dropped and listed in
/// [`EffectEstimate::dropped`].
pub fn adjusted_effect(
    d: &DataFrame,
    treatment: &str,
    outcome: &str,
    adjustment_set: &[String],
    alpha: f64,
) -> Result<EffectEstimate, EstimationError> {
    check_alpha(alpha)?;
    let t = treatment_column(d, treatment)?;
    let y = column(d, outcome)?;
    let n = d.n_rows();
    if n <= adjustment_set.len() + 2 {
        return Err(EstimationError::TooFewRows {
            needed: adjustment_set.len() + 2,
            have: n,
        });
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for name in adjustment_set {
        let c = column(d, name)?;
        if c.iter().all(|&v| v == c[0]) {
            dropped.push(name.clone());
        } else {
            kept.push((name.as_str(), c));
        }
    }
    let mut regressors: Vec<(&str, &[f64])> = vec![(treatment, &t)];
    regressors.extend(kept.iter().map(|(name, c)| (*name, c.as_slice())));
    let fit = ols(&y, &regressors)?;
    Ok(finish(
        fit.coef[0],
        fit.var[0].sqrt(),
        alpha,
        n,
        adjustment_set.to_vec(),
        dropped,
    ))
}

/// Difference in arm means with the pooled two-sample standard error.
///
/// Identical to `adjusted_effect` with an empty adjustment set.
pub fn unadjusted_difference(
    d: &DataFrame,
    treatment: &str,
    outcome: &str,
    alpha: f64,
) -> Result<EffectEstimate, EstimationError> {
    check_alpha(alpha)?;
    let t = treatment_column(d, treatment)?;
    let y = column(d, outcome)?;
    let n = y.len();
    if n < 3 {
        return Err(EstimationError::TooFewRows { needed: 2, have: n });
    }
    let (mut n1, mut s1, mut n0, mut s0) = (0usize, 0.0, 0usize, 0.0);
    for (&ti, &yi) in t.iter().zip(&y) {
        if ti == 1.0 {
            n1 += 1;
            s1 += yi;
        } else {
            n0 += 1;
            s0 += yi;
        }
    }
    let (m1, m0) = (s1 / n1 as f64, s0 / n0 as f64);
    let ss: f64 = t
        .iter()
        .zip(&y)
        .map(|(&ti, &yi)| (yi - if ti == 1.0 { m1 } else { m0 }).powi(2))
        .sum();
    let pooled = ss / (n - 2) as f64;
    let se = (pooled * (1.0 / n1 as f64 + 1.0 / n0 as f64)).sqrt();
    Ok(finish(m1 - m0, se, alpha, n, Vec::new(), Vec::new()))
}

/// Frontdoor estimate under a linear model: the sum over mediators of the
/// treatment-to-mediator slope times the mediator-to-outcome slope
/// (holding the treatment fixed). The standard error is the first-order
/// delta method, treating the two regression stages as independent.
pub fn frontdoor_effect(
    d: &DataFrame,
    treatment: &str,
    outcome: &str,
    mediators: &[String],
    alpha: f64,
) -> Result<EffectEstimate, EstimationError> {
    check_alpha(alpha)?;
    let t = treatment_column(d, treatment)?;
    let y = column(d, outcome)?;
    let m_cols: Vec<Vec<f64>> = mediators.iter().map(|m| column(d, m)).collect::<Result<_, _>>()?;

    let mut outcome_regs: Vec<(&str, &[f64])> = vec![(treatment, &t)];
    outcome_regs.extend(mediators.iter().zip(&m_cols).map(|(n, c)| (n.as_str(), c.as_slice())));
    let outcome_fit = ols(&y, &outcome_regs)?;

    let mut theta = 0.0;
    let mut var = 0.0;
    for (k, m) in m_cols.iter().enumerate() {
        let stage1 = ols(m, &[(treatment, &t)])?;
        let (a, va) = (stage1.coef[0], stage1.var[0]);
        let (b, vb) = (outcome_fit.coef[k + 1], outcome_fit.var[k + 1]);
        theta += a * b;
        var += b * b * va + a * a * vb;
    }
    Ok(finish(
        theta,
        var.sqrt(),
        alpha,
        d.n_rows(),
        mediators.to_vec(),
        Vec::new(),
    ))
}

/// SHA-256 of the canonical serialization, lowercase hex.
pub fn provenance_hash(d: &DataFrame) -> String {
    hex::encode(Sha256::digest(d.canonical_string().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(cols: &[(&str, &[f64])]) -> DataFrame {
        DataFrame::from_columns(cols.iter().map(|(n, c)| (n.to_string(), c.to_vec())).collect()).unwrap()
    }

    #[test]
    fn normal_quantile() {
        assert!((z_quantile(0.05) - 1.6449).abs() < 5e-5);
    }

    #[test]
    fn noiseless_fit_is_exact() {
        let t: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| 2.0 * v).collect();
        let d = frame(&[("T", &t), ("Y", &y)]);
        let e = adjusted_effect(&d, "T", "Y", &[], 0.05).unwrap();
        assert!((e.theta_hat - 2.0).abs() < 1e-12);
        assert!(e.std_err < 1e-12);
        assert!((e.lcb - 2.0).abs() < 1e-10);
    }

    #[test]
    fn group_means() {
        let d = frame(&[("T", &[1.0, 1.0, 0.0, 0.0]), ("Y", &[3.0, 3.0, 1.0, 1.0])]);
        let e = unadjusted_difference(&d, "T", "Y", 0.05).unwrap();
        assert_eq!(e.theta_hat, 2.0);
        assert_eq!(e.std_err, 0.0);
    }

    #[test]
    fn one_armed_data_fails() {
        let d = frame(&[("T", &[1.0, 1.0, 1.0, 1.0]), ("Y", &[3.0, 2.0, 1.0, 1.0])]);
        assert_eq!(
            unadjusted_difference(&d, "T", "Y", 0.05),
            Err(EstimationError::Positivity(0))
        );
        assert_eq!(
            adjusted_effect(&d, "T", "Y", &[], 0.05),
            Err(EstimationError::Positivity(0))
        );
    }

    #[test]
    fn collinear_adjustment_is_singular() {
        let t = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let y = [1.0, 2.0, 2.5, 4.0, 5.5, 5.0];
        let d = frame(&[("T", &t), ("Y", &y), ("x", &x), ("x2", &x2)]);
        let err = adjusted_effect(&d, "T", "Y", &["x".into(), "x2".into()], 0.05).unwrap_err();
        assert!(matches!(err, EstimationError::Singular(_)));
    }

    #[test]
    fn constant_adjustment_column_is_dropped() {
        let t = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let c = [5.0; 6];
        let y = [1.0, 2.0, 2.5, 4.0, 5.5, 5.0];
        let d = frame(&[("T", &t), ("Y", &y), ("c", &c)]);
        let with = adjusted_effect(&d, "T", "Y", &["c".into()], 0.05).unwrap();
        let without = adjusted_effect(&d, "T", "Y", &[], 0.05).unwrap();
        assert_eq!(with.dropped, vec!["c".to_string()]);
        assert_eq!(with.theta_hat, without.theta_hat);
    }

    #[test]
    fn too_few_rows() {
        let d = frame(&[
            ("T", &[0.0, 1.0, 1.0]),
            ("Y", &[1.0, 2.0, 3.0]),
            ("x", &[1.0, 0.0, 2.0]),
        ]);
        assert!(matches!(
            adjusted_effect(&d, "T", "Y", &["x".into()], 0.05),
            Err(EstimationError::TooFewRows { .. })
        ));
    }

    #[test]
    fn hash_is_row_ordered() {
        let d = frame(&[("T", &[0.0, 1.0]), ("Y", &[1.0, 2.0])]);
        assert_eq!(provenance_hash(&d), provenance_hash(&d.clone()));
        assert_ne!(provenance_hash(&d), provenance_hash(&d.with_rows_swapped(0, 1)));
    }
}
