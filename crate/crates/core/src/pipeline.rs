//! Run configuration and the commands behind the `civex` binary.
//!
//! A run directory looks like this:
//!
//! ```text
//! <out>/
//!   manifest.json
//!   counterbalance.csv
//!   instances/seed42_moderate.jsonl ...
//!   summary_moderate.csv, summary_adversarial.csv, summaries.json
//!   pairwise_wilcoxon.csv
//!   verdicts.csv
//!   certificates/<method>/<seed>_<regime>_<family>_<index>.json
//!   data/<provenance>.csv
//!   sweep_<kind>.csv, sweep_<kind>.json
//!   report.md
//! ```
//!
//! Data files are stored under their provenance digest in the canonical
//! serialization, so a certificate names the file it was issued against.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{MethodContext, MethodId, ReplayStore};
use crate::bench::{build_benchmark, read_jsonl, write_jsonl, BenchmarkSpec, Regime, ScmInstance};
use crate::data::DataFrame;
use crate::error::{Error, Result};
use crate::evaluation::{
    misspec_sweep, pairwise_wilcoxon, render_markdown, run_methods, strength_sweep, summarize_regime, weight_sweep,
    write_pairwise_csv, write_summary_csv, write_sweep_csv, MethodSummary, MethodVerdicts, ScoreWeights, SweepKind,
    SweepRow,
};
use crate::verifier::{verify_certificate, Certificate, Decision, EvidenceKind, VerifierConfig};

/// Environment variable naming the directory that relative output paths
/// are resolved against.
pub const OUTPUT_ROOT_ENV: &str = "CIVEX_OUTPUT_ROOT";

fn default_methods() -> Vec<MethodId> {
    MethodId::BUILTIN.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("civex-run")
}

/// One JSON document describing a run. Every field has a default, so `{}`
/// is the default benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub benchmark: BenchmarkSpec,
    pub verifier: VerifierConfig,
    pub weights: ScoreWeights,
    pub methods: Vec<MethodId>,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every core.
    pub parallelism: Option<usize>,
    /// Replay tag to the directory holding its shard CSVs.
    pub replay: BTreeMap<String, PathBuf>,
    /// Seeds for the strength and misspecification sweeps; `None` takes the
    /// first five benchmark seeds.
    pub sweep_seeds: Option<Vec<u64>>,
    /// Per-instance ObservationalAssociation instead of the pooled variant.
    pub association_per_instance: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            benchmark: BenchmarkSpec::default(),
            verifier: VerifierConfig::default(),
            weights: ScoreWeights::default(),
            methods: default_methods(),
            output_dir: default_output_dir(),
            parallelism: None,
            replay: BTreeMap::new(),
            sweep_seeds: None,
            association_per_instance: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.benchmark.validate()?;
        self.verifier.validate()?;
        self.weights.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.parallelism == Some(0) {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.sweep_seeds.as_ref().is_some_and(Vec::is_empty) {
            return Err(Error::Config("sweep_seeds must be non-empty when given".into()));
        }
        Ok(())
    }

    /// Output directory with relative paths resolved against
    /// [`OUTPUT_ROOT_ENV`] when it is set.
    pub fn resolved_output_dir(&self) -> PathBuf {
        resolve_output(&self.output_dir)
    }

    pub fn sweep_benchmark(&self) -> BenchmarkSpec {
        let seeds = self
            .sweep_seeds
            .clone()
            .unwrap_or_else(|| self.benchmark.seeds.iter().copied().take(5).collect());
        BenchmarkSpec {
            seeds,
            ..self.benchmark.clone()
        }
    }
}

/// Resolves `path` against [`OUTPUT_ROOT_ENV`] if it is relative.
pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if path.is_relative() && !root.is_empty() => PathBuf::from(root).join(path),
        _ => path.to_path_buf(),
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub methods: Option<Vec<MethodId>>,
    pub n_rows: Option<usize>,
    pub regimes: Option<Vec<Regime>>,
    pub strength: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub parallelism: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = &self.seeds {
            cfg.benchmark.seeds = s.clone();
        }
        if let Some(m) = &self.methods {
            cfg.methods = m.clone();
        }
        if let Some(n) = self.n_rows {
            cfg.benchmark.n_rows = n;
        }
        if let Some(r) = &self.regimes {
            cfg.benchmark.regimes = r.clone();
        }
        if let Some(s) = self.strength {
            cfg.benchmark.adversarial_strength = s;
        }
        if let Some(o) = &self.output_dir {
            cfg.output_dir = o.clone();
        }
        if let Some(p) = self.parallelism {
            cfg.parallelism = Some(p);
        }
    }
}

/// Parses a comma-separated list such as `42,43,44` or `42-46`.
pub fn parse_seed_list(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Input(format!("bad seed list `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

pub fn parse_method_list(s: &str) -> Result<Vec<MethodId>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

fn with_pool<T: Send>(parallelism: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match parallelism {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> Result<()>,
{
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn instance_file_name(seed: u64, regime: Regime) -> String {
    format!("seed{seed}_{}.jsonl", regime.tag())
}

/// What `generate` produced.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerateOutput {
    pub out_dir: PathBuf,
    pub instance_files: Vec<PathBuf>,
    pub n_instances: usize,
}

fn write_instances(out: &Path, spec: &BenchmarkSpec, instances: &[ScmInstance]) -> Result<Vec<PathBuf>> {
    let dir = out.join("instances");
    create_dir(&dir)?;
    let mut files = Vec::new();
    for &seed in &spec.seeds {
        for &regime in &spec.regimes {
            let path = dir.join(instance_file_name(seed, regime));
            let subset: Vec<ScmInstance> = instances
                .iter()
                .filter(|i| i.id.seed == seed && i.id.regime == regime)
                .cloned()
                .collect();
            write_with(&path, |w| write_jsonl(&subset, w))?;
            files.push(path);
        }
    }
    Ok(files)
}

/// Writes one JSON-lines file per (seed, regime) and `counterbalance.csv`.
pub fn cmd_generate(cfg: &RunConfig) -> Result<GenerateOutput> {
    cfg.validate()?;
    let out = cfg.resolved_output_dir();
    create_dir(&out)?;
    let bench = with_pool(cfg.parallelism, || build_benchmark(&cfg.benchmark))??;
    let instance_files = write_instances(&out, &cfg.benchmark, &bench.instances)?;
    write_with(&out.join("counterbalance.csv"), |w| bench.counterbalance.write_csv(w))?;
    Ok(GenerateOutput {
        out_dir: out,
        instance_files,
        n_instances: bench.instances.len(),
    })
}

/// Reads every instance file of `spec` from `dir/instances`, in id order.
pub fn load_instances(dir: &Path, spec: &BenchmarkSpec) -> Result<Vec<ScmInstance>> {
    let mut out = Vec::new();
    for &seed in &spec.seeds {
        for &regime in &spec.regimes {
            let path = dir.join("instances").join(instance_file_name(seed, regime));
            let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            out.extend(read_jsonl(BufReader::new(file))?);
        }
    }
    out.sort_by_key(|i| i.id);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayStatus {
    pub tag: String,
    pub source: Option<PathBuf>,
    pub seeds_covered: Vec<u64>,
    pub rejected_shards: Vec<(String, String)>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub code_version: String,
    pub benchmark: BenchmarkSpec,
    pub verifier: VerifierConfig,
    pub weights: ScoreWeights,
    pub methods: Vec<MethodId>,
    pub n_instances: usize,
    pub replay: Vec<ReplayStatus>,
}

/// What `run` produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    pub summaries: Vec<MethodSummary>,
    pub verdicts: Vec<MethodVerdicts>,
    pub instances: Vec<ScmInstance>,
    /// CIVeX false executions over all regimes; `None` if CIVeX was not run.
    pub civex_false_exec: Option<usize>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    /// The safety gate: no CIVeX false execution.
    pub fn passed(&self) -> bool {
        self.civex_false_exec.is_none_or(|n| n == 0)
    }
}

fn load_replay(cfg: &RunConfig, out: &Path) -> (ReplayStore, Vec<ReplayStatus>, Vec<String>) {
    let mut store = ReplayStore::default();
    let mut statuses = Vec::new();
    let mut warnings = Vec::new();
    let tags: BTreeSet<String> = cfg
        .methods
        .iter()
        .filter_map(|m| match m {
            MethodId::Replay(tag) => Some(tag.clone()),
            _ => None,
        })
        .collect();
    for tag in tags {
        let source = cfg
            .replay
            .get(&tag)
            .cloned()
            .or_else(|| Some(out.join("replay").join(&tag)).filter(|p| p.is_dir()));
        let before = store.rejected.len();
        let warning = match &source {
            Some(dir) => store.load_dir(&tag, dir).err().map(|e| e.to_string()),
            None => Some(format!("no shards found for replay tag `{tag}`")),
        };
        store.ensure_tag(&tag);
        let rejected = store.rejected[before..].to_vec();
        for (path, why) in &rejected {
            warnings.push(format!("replay `{tag}`: rejected shard {path}: {why}"));
        }
        if let Some(w) = &warning {
            warnings.push(format!("replay `{tag}`: {w}"));
        }
        statuses.push(ReplayStatus {
            seeds_covered: store.seeds_covered(&tag).into_iter().collect(),
            tag,
            source,
            rejected_shards: rejected,
            warning,
        });
    }
    (store, statuses, warnings)
}

fn summarize(
    cfg: &RunConfig,
    instances: &[ScmInstance],
    verdicts: &[MethodVerdicts],
    replay: &ReplayStore,
) -> Vec<MethodSummary> {
    let run_seeds = cfg.benchmark.seeds.len();
    let mut out = Vec::new();
    for &regime in &cfg.benchmark.regimes {
        for v in verdicts {
            let summary = match &v.method {
                MethodId::Replay(tag) => {
                    let covered = replay.seeds_covered(tag);
                    summarize_regime(instances, v, regime, &cfg.weights, run_seeds, |s| covered.contains(&s))
                }
                _ => summarize_regime(instances, v, regime, &cfg.weights, run_seeds, |_| true),
            };
            out.push(summary);
        }
    }
    out
}

fn cert_file_name(inst: &ScmInstance) -> String {
    format!(
        "{}_{}_{}_{}.json",
        inst.id.seed,
        inst.id.regime.tag(),
        inst.id.family.name(),
        inst.id.index
    )
}

fn write_verdicts(out: &Path, instances: &[ScmInstance], verdicts: &[MethodVerdicts]) -> Result<()> {
    let data_dir = out.join("data");
    let cert_root = out.join("certificates");
    let mut stored: BTreeSet<String> = BTreeSet::new();
    write_with(&out.join("verdicts.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "method",
            "seed",
            "regime",
            "family",
            "index",
            "stage1",
            "stage2",
            "terminal",
            "rule",
            "refusal_reason",
            "certificate",
        ])?;
        for v in verdicts {
            for (inst, trace) in instances.iter().zip(&v.traces) {
                let mut cert_path = String::new();
                if let Some(cert) = &trace.terminal.certificate {
                    let data = match cert.evidence {
                        EvidenceKind::Observational => &inst.observational,
                        EvidenceKind::Randomized => &inst.experimental,
                    };
                    if stored.insert(cert.provenance.clone()) {
                        create_dir(&data_dir)?;
                        write_text(
                            &data_dir.join(format!("{}.csv", cert.provenance)),
                            &data.canonical_string(),
                        )?;
                    }
                    let dir = cert_root.join(v.method.name());
                    create_dir(&dir)?;
                    let rel = Path::new("certificates")
                        .join(v.method.name())
                        .join(cert_file_name(inst));
                    write_json(&out.join(&rel), cert)?;
                    cert_path = rel.to_string_lossy().replace('\\', "/");
                }
                let t = &trace.terminal;
                csv.write_record([
                    v.method.name(),
                    inst.id.seed.to_string(),
                    inst.id.regime.tag().to_owned(),
                    inst.id.family.name().to_owned(),
                    inst.id.index.to_string(),
                    trace.stage1.decision.as_str().to_owned(),
                    trace
                        .stage2
                        .as_ref()
                        .map_or_else(String::new, |s| s.decision.as_str().to_owned()),
                    t.decision.as_str().to_owned(),
                    t.rule.map_or_else(String::new, |r| r.to_string()),
                    t.refusal_reason.clone().unwrap_or_default(),
                    cert_path,
                ])?;
            }
        }
        csv.flush().map_err(|e| Error::io("verdicts.csv", e))?;
        Ok(())
    })
}

/// Generates the benchmark, runs every configured method through the
/// two-stage protocol, and writes summaries, verdicts, certificates and
/// the manifest.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let out = cfg.resolved_output_dir();
    create_dir(&out)?;
    let bench = with_pool(cfg.parallelism, || build_benchmark(&cfg.benchmark))??;
    write_instances(&out, &cfg.benchmark, &bench.instances)?;
    write_with(&out.join("counterbalance.csv"), |w| bench.counterbalance.write_csv(w))?;

    let (replay, replay_status, warnings) = load_replay(cfg, &out);
    let mut ctx = MethodContext::new(cfg.verifier.clone(), &bench.instances);
    ctx.replay = replay;
    ctx.association_per_instance = cfg.association_per_instance;
    let instances = bench.instances;
    let verdicts = with_pool(cfg.parallelism, || run_methods(&instances, &cfg.methods, &ctx))?;
    let summaries = summarize(cfg, &instances, &verdicts, &ctx.replay);

    for &regime in &cfg.benchmark.regimes {
        let rows: Vec<MethodSummary> = summaries.iter().filter(|s| s.regime == regime).cloned().collect();
        write_with(&out.join(format!("summary_{}.csv", regime.tag())), |w| {
            write_summary_csv(&rows, w)
        })?;
    }
    write_json(&out.join("summaries.json"), &summaries)?;
    write_with(&out.join("pairwise_wilcoxon.csv"), |w| {
        write_pairwise_csv(&pairwise_wilcoxon(&summaries), w)
    })?;
    write_verdicts(&out, &instances, &verdicts)?;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            benchmark: cfg.benchmark.clone(),
            verifier: cfg.verifier.clone(),
            weights: cfg.weights,
            methods: cfg.methods.clone(),
            n_instances: instances.len(),
            replay: replay_status,
        },
    )?;

    let civex_false_exec = cfg.methods.contains(&MethodId::Civex).then(|| {
        summaries
            .iter()
            .filter(|s| s.method == MethodId::Civex)
            .map(|s| s.false_exec)
            .sum()
    });
    Ok(RunOutput {
        out_dir: out,
        summaries,
        verdicts,
        instances,
        civex_false_exec,
        warnings,
    })
}

/// Runs one sweep and writes `sweep_<kind>.csv` and `sweep_<kind>.json`.
///
/// The weight sweep re-scores verdicts of the full benchmark; the strength
/// and misspecification sweeps regenerate on the sweep seeds.
pub fn cmd_sweep(kind: SweepKind, cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let out = cfg.resolved_output_dir();
    create_dir(&out)?;
    let methods: Vec<MethodId> = cfg
        .methods
        .iter()
        .filter(|m| !matches!(m, MethodId::Replay(_)))
        .cloned()
        .collect();
    let rows = with_pool(cfg.parallelism, || -> Result<Vec<SweepRow>> {
        match kind {
            SweepKind::Strength => strength_sweep(&cfg.sweep_benchmark(), &methods, &cfg.verifier, &cfg.weights),
            SweepKind::Misspec => misspec_sweep(&cfg.sweep_benchmark(), &methods, &cfg.verifier, &cfg.weights),
            SweepKind::Weights => {
                let bench = build_benchmark(&cfg.benchmark)?;
                let mut ctx = MethodContext::new(cfg.verifier.clone(), &bench.instances);
                ctx.association_per_instance = cfg.association_per_instance;
                let verdicts = run_methods(&bench.instances, &methods, &ctx);
                Ok(weight_sweep(
                    &bench.instances,
                    &verdicts,
                    &cfg.benchmark.regimes,
                    cfg.benchmark.seeds.len(),
                ))
            }
        }
    })??;
    write_with(&out.join(format!("sweep_{}.csv", kind.tag())), |w| {
        write_sweep_csv(&rows, w)
    })?;
    write_json(&out.join(format!("sweep_{}.json", kind.tag())), &rows)?;
    Ok(rows)
}

/// Renders `report.md` from a run directory's `summaries.json` and, when
/// present, `sweep_strength.json`.
pub fn cmd_report(run_dir: &Path) -> Result<String> {
    let summaries: Vec<MethodSummary> = read_json(&run_dir.join("summaries.json"))?;
    let strength_path = run_dir.join("sweep_strength.json");
    let strength: Vec<SweepRow> = if strength_path.exists() {
        read_json(&strength_path)?
    } else {
        Vec::new()
    };
    let text = render_markdown(&summaries, &strength);
    write_text(&run_dir.join("report.md"), &text)?;
    Ok(text)
}

/// Locates `data/<provenance>.csv` in the certificate's directory or any
/// ancestor.
pub fn find_certificate_data(cert_path: &Path, cert: &Certificate) -> Option<PathBuf> {
    let name = format!("{}.csv", cert.provenance);
    cert_path
        .ancestors()
        .skip(1)
        .map(|dir| dir.join("data").join(&name))
        .find(|p| p.is_file())
}

/// Re-checks a stored certificate against stored data. Without a data path
/// the content-addressed store next to the certificate is searched.
pub fn cmd_verify_cert(cert_path: &Path, data_path: Option<&Path>) -> Result<Certificate> {
    let cert: Certificate = read_json(cert_path)?;
    let data_path = match data_path {
        Some(p) => p.to_path_buf(),
        None => find_certificate_data(cert_path, &cert).ok_or_else(|| {
            Error::Input(format!(
                "no data/{}.csv found above {}",
                cert.provenance,
                cert_path.display()
            ))
        })?,
    };
    let text = fs::read_to_string(&data_path).map_err(|e| Error::io(&data_path, e))?;
    let data = DataFrame::parse_canonical(&text).map_err(|_| Error::CertificateMismatch {
        field: "provenance".into(),
        detail: format!("{} is not a canonical data frame", data_path.display()),
    })?;
    verify_certificate(&cert, &data)?;
    Ok(cert)
}

/// What `import-replay` did.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportOutput {
    pub tag: String,
    pub dest: PathBuf,
    pub imported: Vec<(PathBuf, usize)>,
    pub rejected: Vec<(PathBuf, String)>,
    pub seeds_covered: Vec<u64>,
}

/// Validates recorded-verdict shards and copies the ones that parse into
/// `<out>/replay/<tag>/` in normalized form. Each shard is written to a
/// temporary file and renamed, so a shard is present whole or not at all.
pub fn cmd_import_replay(tag: &str, sources: &[PathBuf], out_dir: &Path) -> Result<ImportOutput> {
    if tag.is_empty() || tag.contains(['/', '\\', ':']) {
        return Err(Error::Input(format!("bad replay tag `{tag}`")));
    }
    let dest = out_dir.join("replay").join(tag);
    create_dir(&dest)?;
    let mut imported = Vec::new();
    let mut rejected = Vec::new();
    let mut seeds = BTreeSet::new();
    for src in sources {
        let parsed = fs::read_to_string(src)
            .map_err(|e| Error::io(src, e))
            .and_then(|t| ReplayStore::parse_shard(&t));
        let rows = match parsed {
            Ok(rows) => rows,
            Err(e) => {
                rejected.push((src.clone(), e.to_string()));
                continue;
            }
        };
        let name = src
            .file_name()
            .map_or_else(|| "shard.csv".into(), |n| n.to_string_lossy().into_owned());
        let target = dest.join(&name).with_extension("csv");
        let tmp = dest.join(format!(".{name}.tmp"));
        write_with(&tmp, |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["seed", "regime", "family", "index", "stage1", "terminal"])?;
            for (id, v) in &rows {
                csv.write_record([
                    id.seed.to_string(),
                    id.regime.tag().to_owned(),
                    id.family.name().to_owned(),
                    id.index.to_string(),
                    v.stage1.as_str().to_owned(),
                    v.terminal.as_str().to_owned(),
                ])?;
            }
            csv.flush().map_err(|e| Error::io("replay shard", e))?;
            Ok(())
        })?;
        fs::rename(&tmp, &target).map_err(|e| Error::io(&target, e))?;
        seeds.extend(rows.iter().map(|(id, _)| id.seed));
        imported.push((target, rows.len()));
    }
    Ok(ImportOutput {
        tag: tag.to_owned(),
        dest,
        imported,
        rejected,
        seeds_covered: seeds.into_iter().collect(),
    })
}

/// Counts terminal decisions of each kind for one method.
pub fn decision_counts(v: &MethodVerdicts) -> BTreeMap<Decision, usize> {
    let mut out = BTreeMap::new();
    for d in v.terminal_decisions() {
        *out.entry(d).or_default() += 1;
    }
    out
}
