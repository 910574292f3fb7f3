//! `da2 perceptron ...` subcommands.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Subcommand};
use da2_core::dataset::{apply_noise, generate_uniform_disk};
use da2_core::perceptron::{
    angle_error, density_identity, empirical_disagreement, monotonicity_experiment, trace,
    MonotonicityConfig, Start,
};
use da2_core::seed::{self, stream};
use da2_core::{NoiseKind, NoiseModel, PerceptronState};
use rand::Rng;
use serde::Serialize;

use crate::{artifact_dir, to_json, write};

#[derive(Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
pub enum PerceptronCommand {
    /// Stream labelled disk points through a perceptron and record every step.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// random or at-target.
        #[arg(long, default_value = "random")]
        start: String,
        /// bounded or adversarial.
        #[arg(long)]
        noise: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        noise_level: f64,
    },
    /// Fraction of updates that do not lower the error.
    Monotonicity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "random")]
        start: String,
        /// Per-label flip probability.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Both sides of the error-difference identity on the unit disk.
    Identity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        theta_t: f64,
        #[arg(long)]
        theta_next: f64,
        #[arg(long)]
        n: usize,
    },
    /// Compare theta/pi with the measured disagreement for random pairs.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 200_000)]
        points: usize,
    },
}

fn parse_start(s: &str) -> Result<Start> {
    match s {
        "random" => Ok(Start::Random),
        "at-target" => Ok(Start::AtTarget),
        other => bail!("start must be random or at-target, got {other:?}"),
    }
}

fn unit<R: Rng>(rng: &mut R) -> [f64; 2] {
    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    [a.cos(), a.sin()]
}

#[derive(Serialize)]
struct IdentityReport {
    theta_t: f64,
    theta_next: f64,
    n: usize,
    lhs: f64,
    rhs: f64,
    gap: f64,
}

pub fn run(cmd: PerceptronCommand) -> Result<()> {
    match cmd {
        PerceptronCommand::Trace {
            common,
            n,
            start,
            noise,
            noise_level,
        } => {
            let start = parse_start(&start)?;
            let mut d = generate_uniform_disk(n, seed::sub_seed(common.seed, stream::DATASET, 0))?;
            if let Some(kind) = noise {
                let kind = match kind.as_str() {
                    "bounded" => NoiseKind::Bounded,
                    "adversarial" => NoiseKind::Adversarial,
                    other => bail!("noise must be bounded or adversarial, got {other:?}"),
                };
                let model = NoiseModel {
                    kind,
                    level: noise_level,
                    seed: seed::sub_seed(common.seed, stream::NOISE, 0),
                };
                d = apply_noise(&d, &model)?;
            }
            let target = d.target().expect("disk data carries its direction");
            let mu = [target[0], target[1]];
            let v0 = match start {
                Start::Random => unit(&mut seed::rng(seed::sub_seed(
                    common.seed,
                    stream::PERCEPTRON,
                    0,
                ))),
                Start::AtTarget => mu,
            };
            let points: Vec<[f64; 2]> =
                (0..d.n()).map(|i| [d.point(i)[0], d.point(i)[1]]).collect();
            let labels: Vec<i8> = d
                .labels()
                .iter()
                .map(|&y| if y == 1 { 1 } else { -1 })
                .collect();
            let rows = trace(PerceptronState::new(v0, mu)?, &points, &labels);
            let mut csv = String::from("step,t,theta,error\n");
            for r in rows {
                writeln!(csv, "{},{},{},{}", r.step, r.t, r.theta, r.error)?;
            }
            let dir = artifact_dir(&common.out_dir, "perceptron-trace", common.seed)?;
            write(&dir, "trace.csv", &csv)?;
        }
        PerceptronCommand::Monotonicity {
            common,
            steps,
            trials,
            start,
            noise,
        } => {
            let cfg = MonotonicityConfig {
                start: parse_start(&start)?,
                noise,
                ..MonotonicityConfig::new(steps, trials, common.seed)
            };
            let est = monotonicity_experiment(&cfg)?;
            println!(
                "non-decreasing updates: {}/{} = {:.4}",
                est.non_decreasing, est.updates, est.estimate
            );
            let dir = artifact_dir(&common.out_dir, "perceptron-monotonicity", common.seed)?;
            write(&dir, "monotonicity.json", &to_json(&est)?)?;
        }
        PerceptronCommand::Identity {
            common,
            theta_t,
            theta_next,
            n,
        } => {
            let id = density_identity(theta_t, theta_next, n)?;
            println!("lhs={:e} rhs={:e} gap={:e}", id.lhs, id.rhs, id.gap);
            let report = IdentityReport {
                theta_t,
                theta_next,
                n,
                lhs: id.lhs,
                rhs: id.rhs,
                gap: id.gap,
            };
            let dir = artifact_dir(&common.out_dir, "perceptron-identity", common.seed)?;
            write(&dir, "identity.json", &to_json(&report)?)?;
        }
        PerceptronCommand::Calibrate {
            common,
            pairs,
            points,
        } => {
            if pairs == 0 || points == 0 {
                bail!("pairs and points must be at least 1");
            }
            let mut rng = seed::rng(seed::sub_seed(common.seed, stream::PERCEPTRON, 1));
            let mut csv = String::from("pair,v0,v1,mu0,mu1,angle_error,disagreement\n");
            for p in 0..pairs {
                let (v, mu) = (unit(&mut rng), unit(&mut rng));
                let predicted = angle_error(&PerceptronState::new(v, mu)?)?;
                let measured = empirical_disagreement(
                    v,
                    mu,
                    points,
                    seed::sub_seed(common.seed, stream::PERCEPTRON, 2 + p as u64),
                );
                writeln!(
                    csv,
                    "{p},{},{},{},{},{predicted},{measured}",
                    v[0], v[1], mu[0], mu[1]
                )?;
            }
            let dir = artifact_dir(&common.out_dir, "perceptron-calibrate", common.seed)?;
            write(&dir, "calibration.csv", &csv)?;
        }
    }
    Ok(())
}
