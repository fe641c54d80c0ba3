use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::aggregate::MethodSummary;
use super::stats::wilcoxon_exact;
use super::sweeps::SweepRow;
use crate::baselines::MethodId;
use crate::bench::Regime;
use crate::error::{Error, Result};

const SUMMARY_HEADER: [&str; 21] = [
    "method",
    "regime",
    "n_instances",
    "seeds_covered",
    "partial",
    "n_execute",
    "false_exec",
    "false_exec_per_instance",
    "false_exec_per_execute",
    "correct_exec_rate",
    "correct_refusal_rate",
    "accuracy",
    "mean_utility",
    "ci_lo",
    "ci_hi",
    "constrained_status",
    "mean_delta_hat",
    "mean_bias",
    "trap_fraction",
    "sign_flip_fraction",
    "harmful_fraction",
];

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn summary_fields(s: &MethodSummary) -> Vec<String> {
    let d = &s.diagnostics;
    vec![
        s.method.name(),
        s.regime.tag().to_owned(),
        s.n_instances.to_string(),
        s.seeds_covered().to_string(),
        s.partial.to_string(),
        s.n_execute.to_string(),
        s.false_exec.to_string(),
        f6(s.false_exec_per_instance),
        s.false_exec_per_execute.map_or_else(|| "n/a".to_owned(), f6),
        f6(s.correct_exec_rate),
        f6(s.correct_refusal_rate),
        f6(s.accuracy),
        f6(s.mean_utility),
        f6(s.ci_lo),
        f6(s.ci_hi),
        serde_json::to_value(s.constrained)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
        f6(d.mean_delta_hat),
        f6(d.mean_bias),
        f6(d.trap_fraction),
        f6(d.sign_flip_fraction),
        f6(d.harmful_fraction),
    ]
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io("csv output", std::io::Error::other(e.to_string())))?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(summaries: &[MethodSummary], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        out.write_record(summary_fields(s))?;
    }
    finish(out)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["sweep", "strength", "fraction", "w_miss", "c_exp"];
    header.extend(SUMMARY_HEADER);
    out.write_record(&header)?;
    for r in rows {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        let mut rec = vec![
            r.kind.tag().to_owned(),
            opt(r.strength),
            opt(r.fraction),
            r.weights.w_miss.to_string(),
            r.weights.c_exp.to_string(),
        ];
        rec.extend(summary_fields(&r.summary));
        out.write_record(&rec)?;
    }
    finish(out)
}

/// CIVeX against one baseline on paired per-seed mean utilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub regime: Regime,
    pub baseline: MethodId,
    pub n_seeds: usize,
    pub mean_diff: f64,
    pub w_plus: f64,
    pub p_value: f64,
    pub note: String,
}

pub fn pairwise_wilcoxon(summaries: &[MethodSummary]) -> Vec<PairwiseRow> {
    let mut rows = Vec::new();
    for civex in summaries.iter().filter(|s| s.method == MethodId::Civex) {
        let ours: BTreeMap<u64, f64> = civex.seed_means.iter().map(|m| (m.seed, m.mean_utility)).collect();
        for other in summaries
            .iter()
            .filter(|s| s.regime == civex.regime && s.method != MethodId::Civex)
        {
            let diffs: Vec<f64> = other
                .seed_means
                .iter()
                .filter_map(|m| ours.get(&m.seed).map(|u| u - m.mean_utility))
                .collect();
            let (w_plus, p_value, note) = match wilcoxon_exact(&diffs) {
                Ok(r) => {
                    let mut note = String::new();
                    if r.zeros_dropped > 0 {
                        note = format!("{} zero differences dropped", r.zeros_dropped);
                    }
                    if let Some(w) = r.warning {
                        note = w;
                    }
                    (r.w_plus, r.p_value, note)
                }
                Err(e) => (f64::NAN, f64::NAN, e.to_string()),
            };
            rows.push(PairwiseRow {
                regime: civex.regime,
                baseline: other.method.clone(),
                n_seeds: diffs.len(),
                mean_diff: if diffs.is_empty() {
                    f64::NAN
                } else {
                    diffs.iter().sum::<f64>() / diffs.len() as f64
                },
                w_plus,
                p_value,
                note,
            });
        }
    }
    rows
}

pub fn write_pairwise_csv<W: Write>(rows: &[PairwiseRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "regime",
        "method_a",
        "method_b",
        "n_seeds",
        "mean_diff",
        "w_plus",
        "p_value",
        "note",
    ])?;
    for r in rows {
        out.write_record([
            r.regime.tag().to_owned(),
            "CIVeX".to_owned(),
            r.baseline.name(),
            r.n_seeds.to_string(),
            f6(r.mean_diff),
            r.w_plus.to_string(),
            f6(r.p_value),
            r.note.clone(),
        ])?;
    }
    finish(out)
}

fn pct(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

fn signed(v: f64) -> String {
    format!("{v:+.2}")
}

fn results_table(out: &mut String, title: &str, rows: &[&MethodSummary]) {
    let _ = writeln!(out, "### {title}\n");
    let _ = writeln!(
        out,
        "| Method | False exec | Correct exec | Accuracy | Utility (95% CI) |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|");
    let mut sorted: Vec<&&MethodSummary> = rows.iter().collect();
    sorted.sort_by(|a, b| b.mean_utility.total_cmp(&a.mean_utility));
    for s in sorted {
        let partial = if s.partial {
            format!(" ({} seeds)", s.seeds_covered())
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "| {}{} | {} | {} | {} | {} [{}, {}] |",
            s.method,
            partial,
            pct(s.false_exec_per_instance),
            pct(s.correct_exec_rate),
            pct(s.accuracy),
            signed(s.mean_utility),
            signed(s.ci_lo),
            signed(s.ci_hi)
        );
    }
    let _ = writeln!(out);
}

/// Markdown rendering of the headline, strength-sweep and ablation tables.
pub fn render_markdown(summaries: &[MethodSummary], strength: &[SweepRow]) -> String {
    let mut out = String::from("# CIVeX benchmark report\n\n");
    for (regime, title) in [
        (Regime::Moderate, "Moderate confounding"),
        (Regime::Adversarial, "Adversarial confounding"),
    ] {
        let rows: Vec<&MethodSummary> = summaries.iter().filter(|s| s.regime == regime).collect();
        if !rows.is_empty() {
            let n = rows[0].n_instances;
            results_table(&mut out, &format!("{title} (n = {n})"), &rows);
        }
    }

    if !strength.is_empty() {
        let mut methods: Vec<MethodId> = Vec::new();
        for r in strength {
            if !methods.contains(&r.summary.method) {
                methods.push(r.summary.method.clone());
            }
        }
        let _ = writeln!(out, "### Adversarial-strength sweep (false exec / mean utility)\n");
        let _ = write!(out, "| Strength |");
        for m in &methods {
            let _ = write!(out, " {m} |");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "|---|{}", "---|".repeat(methods.len()));
        let mut grid: BTreeMap<u64, Vec<&SweepRow>> = BTreeMap::new();
        for r in strength {
            grid.entry(r.strength.unwrap_or(0.0).to_bits()).or_default().push(r);
        }
        let mut keys: Vec<f64> = grid.keys().map(|b| f64::from_bits(*b)).collect();
        keys.sort_by(f64::total_cmp);
        for s in keys {
            let _ = write!(out, "| {s:.1} |");
            for m in &methods {
                let cell = grid[&s.to_bits()]
                    .iter()
                    .find(|r| &r.summary.method == m)
                    .map(|r| {
                        format!(
                            "{} / {}",
                            pct(r.summary.false_exec_per_instance),
                            signed(r.summary.mean_utility)
                        )
                    })
                    .unwrap_or_default();
                let _ = write!(out, " {cell} |");
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(out);
    }

    let ablation = [
        MethodId::AlwaysAbstain,
        MethodId::CivexCertOnly,
        MethodId::Civex,
        MethodId::OracleScm,
    ];
    let find = |m: &MethodId, r: Regime| summaries.iter().find(|s| &s.method == m && s.regime == r);
    if ablation
        .iter()
        .any(|m| find(m, Regime::Moderate).is_some() || find(m, Regime::Adversarial).is_some())
    {
        let _ = writeln!(out, "### CertOnly ablation (Rule 4 mapped to ABSTAIN)\n");
        let _ = writeln!(
            out,
            "| Method | Moderate utility | Adversarial utility | Moderate false-exec | Adversarial false-exec |"
        );
        let _ = writeln!(out, "|---|---|---|---|---|");
        for m in &ablation {
            let (md, ad) = (find(m, Regime::Moderate), find(m, Regime::Adversarial));
            if md.is_none() && ad.is_none() {
                continue;
            }
            let u = |s: Option<&MethodSummary>| s.map_or("-".to_owned(), |s| signed(s.mean_utility));
            let f = |s: Option<&MethodSummary>| s.map_or("-".to_owned(), |s| pct(s.false_exec_per_instance));
            let _ = writeln!(out, "| {m} | {} | {} | {} | {} |", u(md), u(ad), f(md), f(ad));
        }
        let _ = writeln!(out);
    }
    out
}
