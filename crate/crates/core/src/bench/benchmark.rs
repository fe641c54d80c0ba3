use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{Family, Regime};
use super::instance::{sample_instance, CoefficientGrid, InstanceId, Label, SampleOptions, ScmInstance};
use crate::error::{Error, Result};
use crate::rng;

fn default_seeds() -> Vec<u64> {
    (42..=48).collect()
}

/// Benchmark layout and generator calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkSpec {
    pub seeds: Vec<u64>,
    pub families: Vec<Family>,
    pub regimes: Vec<Regime>,
    pub moderate_per_family: usize,
    pub adversarial_per_family: usize,
    pub n_rows: usize,
    pub adversarial_strength: f64,
    pub latent_fraction_moderate: f64,
    pub reversible_fraction: f64,
    pub action_cost: f64,
    /// Share of harmful instances per (seed, regime, family) cell.
    pub moderate_harmful_fraction: f64,
    pub adversarial_harmful_fraction: f64,
    pub record_decimals: Option<u32>,
    pub grid: CoefficientGrid,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        let s = SampleOptions::default();
        BenchmarkSpec {
            seeds: default_seeds(),
            families: Family::ALL.to_vec(),
            regimes: Regime::ALL.to_vec(),
            moderate_per_family: 25,
            adversarial_per_family: 20,
            n_rows: s.n_rows,
            adversarial_strength: s.adversarial_strength,
            latent_fraction_moderate: s.latent_fraction_moderate,
            reversible_fraction: s.reversible_fraction,
            action_cost: s.action_cost,
            moderate_harmful_fraction: 0.5,
            adversarial_harmful_fraction: 0.45,
            record_decimals: s.record_decimals,
            grid: s.grid,
        }
    }
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} is outside [0, 1]")))
    }
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.families.is_empty() || self.regimes.is_empty() {
            return Err(Error::Config("families and regimes must be non-empty".into()));
        }
        if self.moderate_per_family == 0 || self.adversarial_per_family == 0 {
            return Err(Error::Config("instance counts must be positive".into()));
        }
        if self.n_rows < 2 {
            return Err(Error::Config("n_rows must be at least 2".into()));
        }
        if !(self.adversarial_strength > 0.0) {
            return Err(Error::Config("adversarial_strength must be positive".into()));
        }
        if !(self.action_cost >= 0.0) {
            return Err(Error::Config("action_cost must be non-negative".into()));
        }
        check_fraction("latent_fraction_moderate", self.latent_fraction_moderate)?;
        check_fraction("reversible_fraction", self.reversible_fraction)?;
        check_fraction("moderate_harmful_fraction", self.moderate_harmful_fraction)?;
        check_fraction("adversarial_harmful_fraction", self.adversarial_harmful_fraction)?;
        Ok(())
    }

    pub fn per_family(&self, regime: Regime) -> usize {
        match regime {
            Regime::Moderate => self.moderate_per_family,
            Regime::Adversarial => self.adversarial_per_family,
        }
    }

    fn harmful_fraction(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Moderate => self.moderate_harmful_fraction,
            Regime::Adversarial => self.adversarial_harmful_fraction,
        }
    }

    pub fn sample_options(&self) -> SampleOptions {
        SampleOptions {
            n_rows: self.n_rows,
            adversarial_strength: self.adversarial_strength,
            latent_fraction_moderate: self.latent_fraction_moderate,
            reversible_fraction: self.reversible_fraction,
            action_cost: self.action_cost,
            record_decimals: self.record_decimals,
            grid: self.grid.clone(),
        }
    }

    /// Total instance budget.
    pub fn horizon(&self) -> usize {
        let per_seed: usize = self
            .regimes
            .iter()
            .map(|&r| self.per_family(r) * self.families.len())
            .sum();
        per_seed * self.seeds.len()
    }

    /// All instance ids in canonical order.
    pub fn instance_ids(&self) -> Vec<InstanceId> {
        let mut ids = Vec::with_capacity(self.horizon());
        for &seed in &self.seeds {
            for &regime in &self.regimes {
                for &family in &self.families {
                    for index in 0..self.per_family(regime) {
                        ids.push(InstanceId::new(seed, regime, family, index));
                    }
                }
            }
        }
        ids.sort();
        ids
    }
}

/// Counterbalanced labels for one (seed, regime, family) cell.
///
/// The cell holds `floor(f * count)` harmful instances plus one more with
/// probability equal to the fractional part; positions are shuffled.
pub fn label_schedule(seed: u64, regime: Regime, family: Family, count: usize, harmful_fraction: f64) -> Vec<Label> {
    let mut rng = rng::keyed([
        seed.to_le_bytes().as_slice(),
        regime.tag().as_bytes(),
        family.name().as_bytes(),
        b"labels",
    ]);
    let exact = harmful_fraction * count as f64;
    let mut harmful = exact.floor() as usize;
    if rng.random::<f64>() < exact - exact.floor() {
        harmful += 1;
    }
    let mut labels: Vec<Label> = (0..count)
        .map(|i| if i < harmful { Label::Harmful } else { Label::Safe })
        .collect();
    labels.shuffle(&mut rng);
    labels
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterbalanceRow {
    pub family: Family,
    pub regime: Regime,
    /// `None` for the aggregate across seeds.
    pub seed: Option<u64>,
    pub n: usize,
    pub harmful: usize,
}

impl CounterbalanceRow {
    pub fn harmful_fraction(&self) -> f64 {
        self.harmful as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CounterbalanceReport {
    pub rows: Vec<CounterbalanceRow>,
}

impl CounterbalanceReport {
    pub fn from_instances(instances: &[ScmInstance]) -> Self {
        use std::collections::BTreeMap;
        let mut cells: BTreeMap<(Regime, Family, Option<u64>), (usize, usize)> = BTreeMap::new();
        for inst in instances {
            let harmful = usize::from(!inst.spec.safe);
            for seed in [Some(inst.id.seed), None] {
                let e = cells.entry((inst.id.regime, inst.id.family, seed)).or_default();
                e.0 += 1;
                e.1 += harmful;
            }
        }
        let rows = cells
            .into_iter()
            .map(|((regime, family, seed), (n, harmful))| CounterbalanceRow {
                family,
                regime,
                seed,
                n,
                harmful,
            })
            .collect();
        CounterbalanceReport { rows }
    }

    /// Aggregate rows only.
    pub fn aggregated(&self) -> impl Iterator<Item = &CounterbalanceRow> {
        self.rows.iter().filter(|r| r.seed.is_none())
    }

    /// Harmful fraction over every instance of `regime`.
    pub fn regime_harmful_fraction(&self, regime: Regime) -> f64 {
        let (n, h) = self
            .aggregated()
            .filter(|r| r.regime == regime)
            .fold((0, 0), |(n, h), r| (n + r.n, h + r.harmful));
        h as f64 / n as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["regime", "family", "seed", "n", "harmful", "harmful_fraction"])?;
        for r in &self.rows {
            out.write_record([
                r.regime.tag().to_owned(),
                r.family.name().to_owned(),
                r.seed.map_or_else(|| "all".to_owned(), |s| s.to_string()),
                r.n.to_string(),
                r.harmful.to_string(),
                format!("{:.4}", r.harmful_fraction()),
            ])?;
        }
        out.flush().map_err(|e| Error::io("counterbalance.csv", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub instances: Vec<ScmInstance>,
    pub counterbalance: CounterbalanceReport,
}

/// Generates every instance of `spec`, in canonical id order. Each
/// instance draws from its own keyed stream, so the result does not depend
/// on the thread count.
pub fn build_benchmark(spec: &BenchmarkSpec) -> Result<Benchmark> {
    spec.validate()?;
    let opts = spec.sample_options();
    let mut labelled = Vec::with_capacity(spec.horizon());
    for &seed in &spec.seeds {
        for &regime in &spec.regimes {
            for &family in &spec.families {
                let count = spec.per_family(regime);
                let labels = label_schedule(seed, regime, family, count, spec.harmful_fraction(regime));
                for (index, label) in labels.into_iter().enumerate() {
                    labelled.push((InstanceId::new(seed, regime, family, index), label));
                }
            }
        }
    }
    labelled.sort_by_key(|(id, _)| *id);
    let instances = labelled
        .par_iter()
        .map(|(id, label)| sample_instance(*id, &opts, Some(*label), &mut rng::keyed(id.key_parts())))
        .collect::<Result<Vec<_>>>()?;
    let counterbalance = CounterbalanceReport::from_instances(&instances);
    Ok(Benchmark {
        instances,
        counterbalance,
    })
}

/// Writes instances as JSON lines.
pub fn write_jsonl<W: Write>(instances: &[ScmInstance], mut w: W) -> Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut w, inst)?;
        w.write_all(b"\n").map_err(|e| Error::io("jsonl", e))?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<ScmInstance>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::io("jsonl", e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_has_exact_counts() {
        let labels = label_schedule(42, Regime::Adversarial, Family::Cache, 20, 0.45);
        assert_eq!(labels.iter().filter(|l| **l == Label::Harmful).count(), 9);
        let labels = label_schedule(42, Regime::Moderate, Family::Cache, 25, 0.5);
        let h = labels.iter().filter(|l| **l == Label::Harmful).count();
        assert!(h == 12 || h == 13);
    }

    #[test]
    fn validation() {
        let mut s = BenchmarkSpec::default();
        assert!(s.validate().is_ok());
        assert_eq!(s.horizon(), 1890);
        s.seeds.clear();
        assert!(s.validate().is_err());
        let s = BenchmarkSpec {
            moderate_per_family: 0,
            ..BenchmarkSpec::default()
        };
        assert!(s.validate().is_err());
        let s = BenchmarkSpec {
            adversarial_strength: 0.0,
            ..BenchmarkSpec::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let spec = BenchmarkSpec {
            seeds: vec![1],
            families: vec![Family::GitBranch],
            moderate_per_family: 2,
            adversarial_per_family: 1,
            n_rows: 20,
            ..BenchmarkSpec::default()
        };
        let b = build_benchmark(&spec).unwrap();
        assert_eq!(b.instances.len(), 3);
        let mut buf = Vec::new();
        write_jsonl(&b.instances, &mut buf).unwrap();
        assert_eq!(read_jsonl(buf.as_slice()).unwrap(), b.instances);
    }
}
