use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gibbslab::config::{json_error_position, Experiment, RunConfig};
use gibbslab::experiments::{phase_scan, run_decay, run_dv_bound, run_gnz_check, run_mgf_check, run_sample};
use gibbslab::geometry::snapshot::write_snapshot;
use gibbslab::output::{write_rows, ResultRow, SCHEMA_VERSION};
use gibbslab::RngSeed;

/// Batch experiments for continuum Gibbs point processes.
#[derive(Parser)]
#[command(name = "gibbslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write configuration snapshots from the Poisson or Metropolis sampler.
    Sample(RunArgs),
    /// Compare the empirical centered log-MGF of F_n with the Herbst bound.
    MgfCheck(RunArgs),
    /// Separate two laws and compute specific relative entropy lower bounds.
    DvBound(RunArgs),
    /// Entropy decay of free birth-death dynamics.
    Decay(RunArgs),
    /// Area-interaction density under dense and empty boundaries.
    PhaseScan(RunArgs),
    /// GNZ residual of a test function.
    GnzCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the sample or replica count.
    #[arg(long)]
    replicas: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Sample(a) => ("sample", a),
            Command::MgfCheck(a) => ("mgf_check", a),
            Command::DvBound(a) => ("dv_bound", a),
            Command::Decay(a) => ("decay", a),
            Command::PhaseScan(a) => ("phase_scan", a),
            Command::GnzCheck(a) => ("gnz_check", a),
        }
    }
}

enum Failure {
    Config(String),
    Run(anyhow::Error),
}

fn load_config(path: &Path, kind: &str, args: &RunArgs) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let parsed: RunConfig = serde_json::from_str(&text).map_err(|e| {
        let err = gibbslab::config::ConfigError::Json(e);
        match json_error_position(&err) {
            Some((line, col)) => Failure::Config(format!("{}:{line}:{col}: {err}", path.display())),
            None => Failure::Config(format!("{}: {err}", path.display())),
        }
    })?;
    if parsed.experiment.name() != kind {
        return Err(Failure::Config(format!(
            "{}: config describes a {} experiment, not {kind}",
            path.display(),
            parsed.experiment.name()
        )));
    }
    let mut config = parsed;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(k) = args.replicas {
        config.set_replicas(k);
    }
    config
        .resolve()
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(path: &Path, rows: &[ResultRow]) -> anyhow::Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_rows(BufWriter::new(file), rows)?;
    Ok(())
}

#[derive(Serialize)]
struct SampleManifest {
    schema_version: u32,
    seed: String,
    files: Vec<String>,
    point_counts: Vec<usize>,
}

fn run(config: &RunConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let echo = out.join("config.resolved.json");
    fs::write(&echo, config.to_pretty_json() + "\n")?;
    let seed = RngSeed::new(config.seed);
    let mut written = vec![echo];
    match &config.experiment {
        Experiment::Sample(c) => {
            let samples = run_sample(c, seed)?;
            let mut files = Vec::new();
            for (i, s) in samples.iter().enumerate() {
                let name = format!("snapshot_{i:04}.txt");
                let mut w = BufWriter::new(fs::File::create(out.join(&name))?);
                write_snapshot(&mut w, s)?;
                files.push(name);
            }
            let manifest = SampleManifest {
                schema_version: SCHEMA_VERSION,
                seed: seed.to_string(),
                point_counts: samples.iter().map(|s| s.len()).collect(),
                files: files.clone(),
            };
            let path = out.join("manifest.json");
            write_json(&path, &manifest)?;
            written.extend(files.iter().map(|f| out.join(f)));
            written.push(path);
        }
        Experiment::MgfCheck(c) => {
            let path = out.join("mgf_check.csv");
            write_csv(&path, &run_mgf_check(c, seed)?)?;
            written.push(path);
        }
        Experiment::DvBound(c) => {
            let path = out.join("dv_bound.json");
            write_json(&path, &run_dv_bound(c, seed)?)?;
            written.push(path);
        }
        Experiment::Decay(c) => {
            let path = out.join("decay.csv");
            write_csv(&path, &run_decay(c, seed)?)?;
            written.push(path);
        }
        Experiment::PhaseScan(c) => {
            let (points, rows) = phase_scan(c, seed)?;
            let path = out.join("phase_scan.csv");
            write_csv(&path, &rows)?;
            written.push(path);
            for p in points {
                eprintln!(
                    "gamma {:>6}: dense {:.4} ± {:.4}, empty {:.4} ± {:.4}, gap {:.2} SE",
                    p.gamma,
                    p.dense_mean,
                    p.dense_std_error,
                    p.empty_mean,
                    p.empty_std_error,
                    if p.gap_std_error > 0.0 { p.gap / p.gap_std_error } else { 0.0 }
                );
            }
        }
        Experiment::GnzCheck(c) => {
            let path = out.join("gnz_check.csv");
            write_csv(&path, &run_gnz_check(c, seed)?)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();
    let outcome = (|| {
        let config = load_config(&args.config, kind, args)?;
        if let Some(t) = args.threads {
            if t == 0 {
                return Err(Failure::Config("--threads must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Failure::Run(e.into()))?;
        }
        run(&config, &args.out).map_err(Failure::Run)
    })();
    match outcome {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
