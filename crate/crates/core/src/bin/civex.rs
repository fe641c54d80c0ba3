use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use civex::bench::Regime;
use civex::evaluation::SweepKind;
use civex::pipeline::{self, Overrides, RunConfig};
use civex::Error;

#[derive(Parser)]
#[command(name = "civex", version, about = "Causal intervention verifier and benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Seeds, e.g. `42,43` or `42-46`.
    #[arg(long)]
    seed_list: Option<String>,
    /// Comma-separated method names, e.g. `CIVeX,PolicyGate,Replay:gpt`.
    #[arg(long)]
    methods: Option<String>,
    /// Rows per data frame.
    #[arg(long)]
    n_rows: Option<usize>,
    /// Comma-separated regimes.
    #[arg(long)]
    regime: Option<String>,
    /// Adversarial hidden-confounder strength.
    #[arg(long)]
    strength: Option<f64>,
    /// Output directory; relative paths resolve against $CIVEX_OUTPUT_ROOT.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, short = 'j')]
    jobs: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> civex::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let regimes = self
            .regime
            .as_deref()
            .map(|s| s.split(',').map(str::parse).collect::<civex::Result<Vec<Regime>>>())
            .transpose()?;
        Overrides {
            seeds: self.seed_list.as_deref().map(pipeline::parse_seed_list).transpose()?,
            methods: self.methods.as_deref().map(pipeline::parse_method_list).transpose()?,
            n_rows: self.n_rows,
            regimes,
            strength: self.strength,
            output_dir: self.out.clone(),
            parallelism: self.jobs,
        }
        .apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write instance files and the counterbalance report.
    Generate(RunArgs),
    /// Run every method, score, aggregate and write outputs. Exits 1 if
    /// CIVeX executes any harmful action.
    Run(RunArgs),
    /// Run a sensitivity sweep: strength, weights or misspec.
    Sweep {
        kind: SweepKind,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Render report.md from a run directory.
    Report { run_dir: PathBuf },
    /// Replay a stored certificate against its data.
    VerifyCert {
        certificate: PathBuf,
        /// Defaults to data/<provenance>.csv next to the certificate.
        data: Option<PathBuf>,
    },
    /// Validate recorded-verdict shards and copy them under replay/<tag>/.
    ImportReplay {
        #[arg(long)]
        tag: String,
        shards: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CertificateMismatch { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> civex::Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => {
            let out = pipeline::cmd_generate(&args.config()?)?;
            println!(
                "wrote {} instances in {} files to {}",
                out.n_instances,
                out.instance_files.len(),
                out.out_dir.display()
            );
        }
        Command::Run(args) => {
            let out = pipeline::cmd_run(&args.config()?)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for s in &out.summaries {
                println!(
                    "{:<8} {:<26} false-exec {:>5.1}%  utility {:+.3} [{:+.3}, {:+.3}]",
                    s.regime.tag(),
                    s.method.name(),
                    100.0 * s.false_exec_per_instance,
                    s.mean_utility,
                    s.ci_lo,
                    s.ci_hi
                );
            }
            println!("outputs in {}", out.out_dir.display());
            if !out.passed() {
                eprintln!("CIVeX false executions: {}", out.civex_false_exec.unwrap_or(0));
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Sweep { kind, args } => {
            let cfg = args.config()?;
            let rows = pipeline::cmd_sweep(kind, &cfg)?;
            println!(
                "wrote {} rows to {}",
                rows.len(),
                cfg.resolved_output_dir().join(format!("sweep_{kind}.csv")).display()
            );
        }
        Command::Report { run_dir } => print!("{}", pipeline::cmd_report(&run_dir)?),
        Command::VerifyCert { certificate, data } => {
            let cert = pipeline::cmd_verify_cert(&certificate, data.as_deref())?;
            println!(
                "ok: {} theta_hat={} lcb={} provenance={}",
                cert.tool, cert.theta_hat, cert.lcb_alpha, cert.provenance
            );
        }
        Command::ImportReplay { tag, shards, out } => {
            let dir = pipeline::resolve_output(&out.unwrap_or_else(|| RunConfig::default().output_dir));
            let res = pipeline::cmd_import_replay(&tag, &shards, &dir)?;
            for (path, why) in &res.rejected {
                eprintln!("rejected {}: {why}", path.display());
            }
            for (path, n) in &res.imported {
                println!("imported {n} verdicts to {}", path.display());
            }
            println!("tag {} covers seeds {:?}", res.tag, res.seeds_covered);
        }
    }
    Ok(ExitCode::SUCCESS)
}
