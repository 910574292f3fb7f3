//! `da2` command-line driver.

mod perceptron;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use da2_core::evaluate::{self, Space, DEFAULT_COMPARE_TRIALS, DEFAULT_PASSIVE_TRIALS};
use da2_core::kernel::rbf_kernel;
use da2_core::ndarray::Axis;
use da2_core::scoring::{score_all, select_halfspace_from_kernel};
use da2_core::splitting::split_balls;
use da2_core::{BallPartition, BoundQuery, DatasetSource, Format, Method, Objective, RunConfig};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "da2",
    version,
    about = "Distribution-splitting active learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First-round representativeness score of every point.
    Score {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the kernel matrix as kernel.csv.
        #[arg(long)]
        dump_kernel: bool,
    },
    /// Select the representative half of the dataset.
    Halve {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Halve, then split the halfspace into k balls.
    Split {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        k: usize,
    },
    /// Pick k points to label.
    Query {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "da2")]
        method: Method,
    },
    /// Passive sampling error curves on the full space and the halfspace.
    Passive {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50])]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_PASSIVE_TRIALS)]
        trials: usize,
        /// full, halfspace, or both.
        #[arg(long, default_value = "both")]
        space: String,
    },
    /// Compare query strategies from a one-point-per-class start.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [3, 6, 9, 12])]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_COMPARE_TRIALS)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_values_t = Method::ALL)]
        methods: Vec<Method>,
        /// Add a best_error column (lowest error over trials).
        #[arg(long)]
        best_of: bool,
    },
    /// Perceptron experiments on the unit disk.
    #[command(subcommand)]
    Perceptron(perceptron::PerceptronCommand),
    /// Label complexity bound on the halved hypothesis class.
    Bounds {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// Pool sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
    },
}

/// Flags shared by the data commands. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Args, Clone)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// blobs:CxP[:spread], disk:N, or a file path.
    #[arg(long)]
    dataset: Option<DatasetSource>,
    /// csv or sparse.
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    objective: Option<Objective>,
    #[arg(long)]
    standardize: bool,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &self.dataset {
            cfg.dataset = v.clone();
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.u {
            cfg.u = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.objective {
            cfg.objective = v;
        }
        cfg.standardize |= self.standardize;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Per-point scores before any deflation.
#[derive(Serialize, Deserialize)]
struct ScoreReport {
    sigma: f64,
    u: f64,
    scores: Vec<f64>,
}

/// The halfspace and its split. Ball members index into `halfspace`.
#[derive(Serialize, Deserialize)]
struct SplitReport {
    halfspace: Vec<usize>,
    partition: BallPartition,
}

/// Create `<out_dir>/<name>-seed<seed>/`.
pub(crate) fn artifact_dir(out_dir: &Path, name: &str, seed: u64) -> Result<PathBuf> {
    let dir = out_dir.join(format!("{name}-seed{seed}"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

pub(crate) fn write(dir: &Path, file: &str, contents: &str) -> Result<()> {
    let path = dir.join(file);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn start(run: &RunArgs, name: &str) -> Result<(RunConfig, da2_core::Dataset, PathBuf)> {
    let cfg = run.config()?;
    let d = cfg.load_dataset()?;
    let dir = artifact_dir(&run.out_dir, name, cfg.seed)?;
    write(&dir, "config.json", &cfg.to_json())?;
    Ok((cfg, d, dir))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score { run, dump_kernel } => {
            let (cfg, d, dir) = start(&run, "score")?;
            let k = rbf_kernel(&d, cfg.sigma)?;
            if dump_kernel {
                write(&dir, "kernel.csv", &k.to_csv())?;
            }
            let scores = score_all(&k, cfg.u)?;
            write(
                &dir,
                "scores.json",
                &to_json(&ScoreReport {
                    sigma: cfg.sigma,
                    u: cfg.u,
                    scores,
                })?,
            )?;
        }
        Command::Halve { run } => {
            let (cfg, d, dir) = start(&run, "halve")?;
            let sel = select_halfspace_from_kernel(rbf_kernel(&d, cfg.sigma)?, cfg.u)?;
            write(&dir, "halfspace.json", &to_json(&sel)?)?;
        }
        Command::Split { run, k } => {
            let (cfg, d, dir) = start(&run, "split")?;
            let sel = select_halfspace_from_kernel(rbf_kernel(&d, cfg.sigma)?, cfg.u)?;
            let points = d.features().select(Axis(0), &sel.indices);
            let partition = split_balls(points.view(), &cfg.split_config(k))?;
            if let Some(w) = &partition.warning {
                eprintln!("warning: {w}");
            }
            let report = SplitReport {
                halfspace: sel.indices,
                partition,
            };
            write(&dir, "partition.json", &to_json(&report)?)?;
        }
        Command::Query { run, k, method } => {
            let (cfg, d, dir) = start(&run, "query")?;
            let seed = da2_core::seed::sub_seed(cfg.seed, da2_core::seed::stream::COMPARE, 0);
            let q = evaluate::query(&d, k, method, seed, &cfg)?;
            write(&dir, "query.json", &to_json(&q)?)?;
        }
        Command::Passive {
            run,
            budgets,
            trials,
            space,
        } => {
            let spaces = match space.as_str() {
                "both" => vec![Space::Full, Space::Halfspace],
                other => vec![other.parse::<Space>()?],
            };
            let (cfg, d, dir) = start(&run, "passive")?;
            let curves = spaces
                .into_iter()
                .map(|s| evaluate::passive_sampling_curve(&d, s, &budgets, trials, cfg.seed, &cfg))
                .collect::<da2_core::Result<Vec<_>>>()?;
            write(
                &dir,
                "passive.csv",
                &evaluate::curves_to_csv(&curves, false)?,
            )?;
        }
        Command::Compare {
            run,
            budgets,
            trials,
            methods,
            best_of,
        } => {
            if methods.is_empty() {
                bail!("no methods given");
            }
            let (cfg, d, dir) = start(&run, "compare")?;
            let curves = evaluate::al_comparison(&d, &methods, &budgets, trials, cfg.seed, &cfg)?;
            write(
                &dir,
                "compare.csv",
                &evaluate::curves_to_csv(&curves, best_of)?,
            )?;
        }
        Command::Perceptron(cmd) => perceptron::run(cmd)?,
        Command::Bounds { eps, delta, m } => {
            for m in m {
                let b =
                    da2_core::perceptron::label_complexity_bound(&BoundQuery { eps, delta, m })?;
                println!("eps={eps} delta={delta} m={m} bound={b:.6}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
