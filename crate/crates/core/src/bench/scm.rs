use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::family::Family;
use crate::data::DataFrame;
use crate::error::{Error, Result};

/// One confounder of the generating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confounder {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// Coefficient on the standardized value in the treatment logit.
    pub treat_coef: f64,
    /// Coefficient on the standardized value in the outcome equation.
    pub outcome_coef: f64,
    pub hidden: bool,
}

/// Ground-truth parameters of one instance.
///
/// ```text
/// T = Bernoulli(sigm(sum_i treat_coef_i * u_i))
/// Y = intercept + theta * T + sum_i outcome_coef_i * u_i + eps,  eps ~ N(0, noise_sd^2)
/// ```
///
/// where `u_i = (U_i - mean_i) / sd_i` and `U_i ~ N(mean_i, sd_i^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub family: Family,
    pub theta: f64,
    pub intercept: f64,
    pub confounders: Vec<Confounder>,
    pub noise_sd: f64,
    pub safe: bool,
}

impl ScmSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sd >= 0.0) {
            return Err(Error::Config(format!("noise_sd {} < 0", self.noise_sd)));
        }
        if let Some(c) = self.confounders.iter().find(|c| !(c.sd > 0.0)) {
            return Err(Error::Config(format!("confounder `{}` has sd {}", c.name, c.sd)));
        }
        if self.safe != (self.theta > 0.0) {
            return Err(Error::Config("safe flag disagrees with sign of theta".into()));
        }
        Ok(())
    }

    pub fn observed(&self) -> impl Iterator<Item = &Confounder> {
        self.confounders.iter().filter(|c| !c.hidden)
    }

    pub fn hidden(&self) -> impl Iterator<Item = &Confounder> {
        self.confounders.iter().filter(|c| c.hidden)
    }

    pub fn has_hidden(&self) -> bool {
        self.confounders.iter().any(|c| c.hidden)
    }

    /// Population bias of the unadjusted difference in means on the
    /// observational distribution.
    pub fn association_bias(&self) -> f64 {
        association_bias(&self.confounders, |_| true)
    }

    /// Population value of the unadjusted difference in means.
    pub fn population_association(&self) -> f64 {
        self.theta + self.association_bias()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `E[sigm'(L)]` for `L ~ N(0, variance)`, by composite Simpson on a
/// standard-normal grid over [-10, 10].
pub fn mean_logistic_slope(variance: f64) -> f64 {
    let sd = variance.max(0.0).sqrt();
    let (lo, hi, steps) = (-10.0f64, 10.0f64, 2000usize);
    let h = (hi - lo) / steps as f64;
    let f = |z: f64| {
        let s = sigmoid(sd * z);
        (-0.5 * z * z).exp() * s * (1.0 - s)
    };
    let mut acc = f(lo) + f(hi);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * h / 3.0 / (2.0 * std::f64::consts::PI).sqrt()
}

/// Bias of the difference in means induced by the confounders selected by
/// `include`, with the treatment logit driven by all of `confounders`.
///
/// Each standardized confounder is Gaussian, so by Stein's lemma
/// `Cov(u_i, T) = treat_coef_i * E[sigm'(L)]`. The logit is symmetric about
/// zero, so `P(T = 1) = 1/2` and the arm gap in `u_i` is four times that.
pub fn association_bias(confounders: &[Confounder], include: impl Fn(&Confounder) -> bool) -> f64 {
    let variance: f64 = confounders.iter().map(|c| c.treat_coef.powi(2)).sum();
    let slope = mean_logistic_slope(variance);
    4.0 * slope
        * confounders
            .iter()
            .filter(|c| include(c))
            .map(|c| c.treat_coef * c.outcome_coef)
            .sum::<f64>()
}

/// Draws `n_rows` rows from `spec`. Hidden confounders drive `T` and `Y`
/// but are not emitted. Columns: `T`, `Y`, then observed confounders in
/// spec order.
///
/// A uniform is drawn for `T` on every row whether or not treatment is
/// randomized, so both variants consume the stream identically.
pub fn generate_frame<R: Rng + ?Sized>(
    spec: &ScmSpec,
    n_rows: usize,
    randomize_treatment: bool,
    rng: &mut R,
) -> Result<DataFrame> {
    if n_rows < 2 {
        return Err(Error::Config(format!("n_rows must be at least 2, got {n_rows}")));
    }
    let mut columns = vec!["T".to_owned(), "Y".to_owned()];
    columns.extend(spec.observed().map(|c| c.name.clone()));
    let mut rows = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let mut logit = 0.0;
        let mut signal = 0.0;
        let mut row = vec![0.0, 0.0];
        for c in &spec.confounders {
            let z: f64 = rng.sample(StandardNormal);
            let raw = c.mean + c.sd * z;
            let std = (raw - c.mean) / c.sd;
            logit += c.treat_coef * std;
            signal += c.outcome_coef * std;
            if !c.hidden {
                row.push(raw);
            }
        }
        let u: f64 = rng.random();
        let p = if randomize_treatment { 0.5 } else { sigmoid(logit) };
        let t = if u < p { 1.0 } else { 0.0 };
        let eps: f64 = rng.sample::<f64, _>(StandardNormal) * spec.noise_sd;
        row[0] = t;
        row[1] = spec.intercept + spec.theta * t + signal + eps;
        rows.push(row);
    }
    DataFrame::new(columns, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn conf(name: &str, g: f64, b: f64, hidden: bool) -> Confounder {
        Confounder {
            name: name.into(),
            mean: 10.0,
            sd: 2.0,
            treat_coef: g,
            outcome_coef: b,
            hidden,
        }
    }

    fn spec(theta: f64, confounders: Vec<Confounder>, noise_sd: f64) -> ScmSpec {
        ScmSpec {
            family: Family::DbIndex,
            theta,
            intercept: 0.5,
            confounders,
            noise_sd,
            safe: theta > 0.0,
        }
    }

    #[test]
    fn slope_at_zero_variance_is_quarter() {
        assert!((mean_logistic_slope(0.0) - 0.25).abs() < 1e-12);
        assert!(mean_logistic_slope(4.0) < 0.25);
    }

    #[test]
    fn zero_logit_gives_fair_treatment() {
        let s = spec(1.0, vec![conf("a", 0.0, 1.0, false)], 1.0);
        let d = generate_frame(&s, 20_000, false, &mut rng::keyed(["t"])).unwrap();
        let p = d.column("T").unwrap().iter().sum::<f64>() / 20_000.0;
        assert!((p - 0.5).abs() < 0.02, "{p}");
    }

    #[test]
    fn noiseless_randomized_rows_are_exact() {
        let s = spec(2.0, vec![], 0.0);
        let d = generate_frame(&s, 50, true, &mut rng::keyed(["n"])).unwrap();
        for row in d.rows() {
            assert_eq!(row[1], 0.5 + 2.0 * row[0]);
        }
    }

    #[test]
    fn hidden_columns_are_not_emitted() {
        let s = spec(1.0, vec![conf("a", 0.5, 0.5, false), conf("h", 1.0, 1.0, true)], 1.0);
        let d = generate_frame(&s, 10, false, &mut rng::keyed(["h"])).unwrap();
        assert_eq!(d.columns(), ["T", "Y", "a"]);
    }

    #[test]
    fn analytic_bias_matches_simulation() {
        let s = spec(-1.0, vec![conf("h", 2.0, 2.0, true)], 1.0);
        let d = generate_frame(&s, 200_000, false, &mut rng::keyed(["b"])).unwrap();
        let est = crate::estimation::unadjusted_difference(&d, "T", "Y", 0.05).unwrap();
        assert!((est.theta_hat - s.population_association()).abs() < 0.03);
    }

    #[test]
    fn rejects_tiny_frames() {
        let s = spec(1.0, vec![], 1.0);
        assert!(generate_frame(&s, 1, false, &mut rng::keyed(["x"])).is_err());
    }
}
