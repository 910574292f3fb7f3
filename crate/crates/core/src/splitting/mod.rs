//! Splitting the representative half into `k` local balls.
//!
//! The score of a ball is its number density: the Gaussian-weighted sum over
//! ordered member pairs
//!
//! ```text
//! Den(B) = sum_{j,l in B} exp(-(|x_j - m|^2 + |x_l - m|^2) / (2 s^2))
//! ```
//!
//! where `m` is the ball mean and `s` its scale. Because the pair weight
//! factorizes, `Den(B)` equals the square of the per-point sum.

mod meb;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed;

pub use meb::{min_enclosing_ball, Sphere};

pub const DEFAULT_EPS: f64 = 0.01;
pub const DEFAULT_RESTARTS: usize = 10;

/// Which extreme of the summed density a restart search keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Min,
    Max,
}

impl std::str::FromStr for Objective {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Objective::Min),
            "max" => Ok(Objective::Max),
            other => invalid(format!("objective must be min or max, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub k: usize,
    pub eps: f64,
    pub restarts: usize,
    pub seed: u64,
    pub objective: Objective,
    pub tol: f64,
    pub max_iters: usize,
    pub sigma_floor: f64,
}

impl SplitConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            eps: DEFAULT_EPS,
            restarts: DEFAULT_RESTARTS,
            seed,
            objective: Objective::Min,
            tol: 1e-6,
            max_iters: 100,
            sigma_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    pub mean: Vec<f64>,
    pub sigma: f64,
    /// Row indices into the point set that was split.
    pub members: Vec<usize>,
    pub density: f64,
}

/// Pass/fail for each of the four splitting constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// Every ball volume below the enclosing ball's.
    pub volume_each: bool,
    /// Summed ball volume below the enclosing ball's.
    pub volume_sum: bool,
    /// Every radius below the enclosing radius.
    pub radius_each: bool,
    /// Every center within twice the enclosing radius of its center.
    pub center_distance: bool,
}

impl ConstraintReport {
    pub fn all_pass(&self) -> bool {
        self.volume_each && self.volume_sum && self.radius_each && self.center_distance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPartition {
    pub balls: Vec<Ball>,
    /// Sum of ball densities.
    pub objective: f64,
    pub enclosing: Ball,
    pub eps: f64,
    /// Restart that produced this partition.
    pub restart: usize,
    pub report: ConstraintReport,
    /// Set when no restart satisfied every constraint.
    pub warning: Option<String>,
}

/// Log of the single-point weight `exp(-|x - m|^2 / (2 s^2))`.
fn log_weight(x: ArrayView1<'_, f64>, mean: &[f64], sigma: f64) -> f64 {
    let sq: f64 = x.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
    -sq / (2.0 * sigma * sigma)
}

/// Number density of `points` around `mean` at scale `sigma`, summed over all
/// ordered pairs including self-pairs.
pub fn number_density(
    points: ArrayView2<'_, f64>,
    mean: ArrayView1<'_, f64>,
    sigma: f64,
) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return invalid(format!("density scale must be positive, got {sigma}"));
    }
    if points.nrows() == 0 {
        return invalid("density of an empty point set");
    }
    if points.ncols() != mean.len() {
        return invalid("mean has the wrong dimension");
    }
    let mean = mean.to_vec();
    Ok(density_of(points.rows().into_iter(), &mean, sigma))
}

fn density_of<'a>(
    rows: impl Iterator<Item = ArrayView1<'a, f64>>,
    mean: &[f64],
    sigma: f64,
) -> f64 {
    let s: f64 = rows.map(|x| log_weight(x, mean, sigma).exp()).sum();
    s * s
}

/// Check the four splitting constraints. Volumes are compared as `r^dim`;
/// the shared dimensional constant cancels.
pub fn validate_partition(p: &BallPartition) -> ConstraintReport {
    let outer = p.enclosing.radius;
    let dim = p.enclosing.center.len() as i32;
    if !(outer > 0.0) {
        return ConstraintReport {
            volume_each: false,
            volume_sum: false,
            radius_each: false,
            center_distance: false,
        };
    }
    // volume ratios (r_i / r_D)^dim avoid overflow in high dimension
    let ratios: Vec<f64> = p
        .balls
        .iter()
        .map(|b| (b.radius / outer).powi(dim))
        .collect();
    let center_gap = |b: &Ball| {
        b.center
            .iter()
            .zip(&p.enclosing.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt()
    };
    ConstraintReport {
        volume_each: ratios.iter().all(|&r| r < 1.0),
        volume_sum: ratios.iter().sum::<f64>() < 1.0,
        radius_each: p.balls.iter().all(|b| b.radius < outer),
        center_distance: p.balls.iter().all(|b| center_gap(b) < 2.0 * outer),
    }
}

fn mean_of(points: ArrayView2<'_, f64>, members: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; points.ncols()];
    for &i in members {
        for (acc, v) in m.iter_mut().zip(points.row(i)) {
            *acc += v;
        }
    }
    let count = members.len() as f64;
    m.iter_mut().for_each(|v| *v /= count);
    m
}

/// Isotropic per-coordinate spread of the members around `mean`.
fn scale_of(points: ArrayView2<'_, f64>, members: &[usize], mean: &[f64], floor: f64) -> f64 {
    let sq: f64 = members
        .iter()
        .map(|&i| {
            points
                .row(i)
                .iter()
                .zip(mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum();
    (sq / (members.len() * points.ncols()) as f64)
        .sqrt()
        .max(floor)
}

fn make_ball(
    points: ArrayView2<'_, f64>,
    members: Vec<usize>,
    mean: Vec<f64>,
    sigma: f64,
    eps: f64,
) -> Result<Ball> {
    let sub: Array2<f64> = points.select(Axis(0), &members);
    let sphere = min_enclosing_ball(sub.view(), eps)?;
    let density = density_of(sub.rows().into_iter(), &mean, sigma);
    Ok(Ball {
        center: sphere.center,
        radius: sphere.radius,
        mean,
        sigma,
        members,
        density,
    })
}

struct Restart {
    balls: Vec<Ball>,
    objective: f64,
}

fn run_restart(points: ArrayView2<'_, f64>, cfg: &SplitConfig, restart: usize) -> Result<Restart> {
    let m = points.nrows();
    let k = cfg.k;
    let mut rng = seed::rng(cfg.seed.wrapping_add(restart as u64));
    let mut means: Vec<Vec<f64>> = sample(&mut rng, m, k)
        .into_iter()
        .map(|i| points.row(i).to_vec())
        .collect();
    let mut sigmas = vec![1.0; k];
    let mut assign = vec![usize::MAX; m];
    let mut prev_objective = f64::INFINITY;
    let mut groups: Vec<Vec<usize>> = Vec::new();

    for _ in 0..cfg.max_iters {
        // hard assignment to the ball with the largest self-pair weight
        let mut fit = vec![0.0; m];
        let mut changed = false;
        for (i, x) in points.rows().into_iter().enumerate() {
            let mut best = (0, f64::NEG_INFINITY);
            for c in 0..k {
                let w = 2.0 * log_weight(x, &means[c], sigmas[c]);
                if w > best.1 {
                    best = (c, w);
                }
            }
            fit[i] = best.1;
            if assign[i] != best.0 {
                assign[i] = best.0;
                changed = true;
            }
        }
        // an empty ball takes the worst-fitted point of a ball that can spare one
        loop {
            let mut counts = vec![0usize; k];
            assign.iter().for_each(|&c| counts[c] += 1);
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let donor = (0..m)
                .filter(|&i| counts[assign[i]] > 1)
                .min_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)))
                .expect("k <= m leaves a ball with two members");
            assign[donor] = empty;
            fit[donor] = 0.0;
            changed = true;
        }

        groups = vec![Vec::new(); k];
        for (i, &c) in assign.iter().enumerate() {
            groups[c].push(i);
        }
        for c in 0..k {
            means[c] = mean_of(points, &groups[c]);
            sigmas[c] = scale_of(points, &groups[c], &means[c], cfg.sigma_floor);
        }
        let objective: f64 = (0..k)
            .map(|c| {
                density_of(
                    groups[c].iter().map(|&i| points.row(i)),
                    &means[c],
                    sigmas[c],
                )
            })
            .sum();
        let settled = !changed || (objective - prev_objective).abs() < cfg.tol;
        prev_objective = objective;
        if settled {
            break;
        }
    }

    let balls = groups
        .into_iter()
        .zip(means)
        .zip(sigmas)
        .map(|((members, mean), sigma)| make_ball(points, members, mean, sigma, cfg.eps))
        .collect::<Result<Vec<_>>>()?;
    let objective = balls.iter().map(|b| b.density).sum();
    Ok(Restart { balls, objective })
}

/// Split the rows of `points` into `cfg.k` balls.
///
/// Each restart seeds the means on `k` distinct random rows (unit scales) and
/// alternates hard assignment with mean/scale refits until the summed density
/// settles. Among restarts the one with the best objective that passes
/// [`validate_partition`] wins; if none passes, the best overall is returned
/// with a warning attached. Ties go to the lower restart index.
pub fn split_balls(points: ArrayView2<'_, f64>, cfg: &SplitConfig) -> Result<BallPartition> {
    let m = points.nrows();
    if cfg.k < 2 {
        return invalid(format!("k must be at least 2, got {}", cfg.k));
    }
    if cfg.k > m {
        return invalid(format!("k = {} exceeds the {m} points to split", cfg.k));
    }
    if !(cfg.eps > 0.0) {
        return invalid("eps must be positive");
    }
    if cfg.restarts == 0 {
        return invalid("at least one restart is required");
    }
    if !(cfg.sigma_floor > 0.0) {
        return invalid("sigma floor must be positive");
    }

    let all: Vec<usize> = (0..m).collect();
    let mean = mean_of(points, &all);
    let sigma = scale_of(points, &all, &mean, cfg.sigma_floor);
    let enclosing = make_ball(points, all, mean, sigma, cfg.eps)?;

    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(points, cfg, r))
        .collect::<Result<Vec<_>>>()?;

    let candidates: Vec<BallPartition> = runs
        .into_iter()
        .enumerate()
        .map(|(restart, run)| {
            let mut p = BallPartition {
                balls: run.balls,
                objective: run.objective,
                enclosing: enclosing.clone(),
                eps: cfg.eps,
                restart,
                report: ConstraintReport {
                    volume_each: false,
                    volume_sum: false,
                    radius_each: false,
                    center_distance: false,
                },
                warning: None,
            };
            p.report = validate_partition(&p);
            p
        })
        .collect();

    let better = |a: &BallPartition, b: &BallPartition| match cfg.objective {
        Objective::Min => a.objective < b.objective,
        Objective::Max => a.objective > b.objective,
    };
    let pick = |valid_only: bool| {
        candidates
            .iter()
            .filter(|p| !valid_only || p.report.all_pass())
            .fold(None::<&BallPartition>, |best, p| match best {
                Some(b) if !better(p, b) => Some(b),
                _ => Some(p),
            })
    };
    match pick(true) {
        Some(p) => Ok(p.clone()),
        None => {
            let mut p = pick(false).expect("restarts >= 1").clone();
            p.warning = Some(format!(
                "no restart satisfied every splitting constraint; best restart {} fails {:?}",
                p.restart, p.report
            ));
            Ok(p)
        }
    }
}
