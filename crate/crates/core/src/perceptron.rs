//! Perceptron lab on the unit disk.
//!
//! A homogeneous perceptron `v` learns a target direction `mu` from points
//! drawn uniformly in the unit disk. Under that distribution the error of `v`
//! is exactly `theta / pi`, where `theta` is the angle between `v` and `mu`.
//! The functions here measure how that error moves under mistake-driven
//! updates and evaluate the related closed forms.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed::{self, stream};

use std::f64::consts::{PI, TAU};

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Angle in `[0, pi]`. `atan2` keeps precision near 0 and pi.
fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    cross.abs().atan2(dot(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptronState {
    pub v: [f64; 2],
    pub mu: [f64; 2],
    /// Number of updates so far.
    pub t: usize,
    /// Angle between `v` and `mu`; NaN when `v` is zero.
    pub theta: f64,
}

impl PerceptronState {
    /// `mu` is normalized; `v` must be nonzero.
    pub fn new(v: [f64; 2], mu: [f64; 2]) -> Result<Self> {
        let norm = mu[0].hypot(mu[1]);
        if !(norm > 0.0 && norm.is_finite()) {
            return invalid("target direction must be a nonzero vector");
        }
        if v[0] == 0.0 && v[1] == 0.0 {
            return Err(Error::UndefinedAngle);
        }
        let mu = [mu[0] / norm, mu[1] / norm];
        Ok(Self {
            v,
            mu,
            t: 0,
            theta: angle_between(v, mu),
        })
    }

    fn refresh(&mut self) {
        self.theta = if self.v == [0.0, 0.0] {
            f64::NAN
        } else {
            angle_between(self.v, self.mu)
        };
    }
}

/// Error of the current hypothesis under the uniform disk: `theta / pi`.
pub fn angle_error(s: &PerceptronState) -> Result<f64> {
    if s.v == [0.0, 0.0] {
        return Err(Error::UndefinedAngle);
    }
    Ok(angle_between(s.v, s.mu) / PI)
}

/// One mistake-driven step: if `sign(<v, x>) != y` then `v <- v + y x`.
///
/// `sign(0)` counts as -1, so points on the boundary trigger an update when
/// labelled +1. Any `y > 0` is read as +1, everything else as -1.
pub fn perceptron_step(s: &PerceptronState, x: [f64; 2], y: i8) -> PerceptronState {
    let y = if y > 0 { 1.0 } else { -1.0 };
    let predicted = if dot(s.v, x) > 0.0 { 1.0 } else { -1.0 };
    let mut next = *s;
    if predicted != y {
        next.v = [s.v[0] + y * x[0], s.v[1] + y * x[1]];
        next.t += 1;
        next.refresh();
    }
    next
}

fn disk_point<R: Rng>(rng: &mut R) -> [f64; 2] {
    let r = rng.random::<f64>().sqrt();
    let a: f64 = rng.random_range(0.0..TAU);
    [r * a.cos(), r * a.sin()]
}

fn unit_vector<R: Rng>(rng: &mut R) -> [f64; 2] {
    let a: f64 = rng.random_range(0.0..TAU);
    [a.cos(), a.sin()]
}

/// Label of `x` under `mu`, with `<mu, x> = 0` going positive.
fn target_label(mu: [f64; 2], x: [f64; 2]) -> i8 {
    if dot(mu, x) >= 0.0 {
        1
    } else {
        -1
    }
}

/// Fraction of `n` uniform-disk points on which `v` and `mu` disagree.
pub fn empirical_disagreement(v: [f64; 2], mu: [f64; 2], n: usize, seed: u64) -> f64 {
    let mut rng = seed::rng(seed);
    let wrong = (0..n)
        .filter(|_| {
            let x = disk_point(&mut rng);
            (dot(v, x) >= 0.0) != (dot(mu, x) >= 0.0)
        })
        .count();
    wrong as f64 / n as f64
}

/// Where each trial's perceptron starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// A uniformly random unit vector.
    #[default]
    Random,
    /// Exactly on the target, `theta = 0`.
    AtTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityConfig {
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub start: Start,
    /// Probability of flipping each streamed label.
    pub noise: f64,
}

impl MonotonicityConfig {
    pub fn new(steps: usize, trials: usize, seed: u64) -> Self {
        Self {
            steps,
            trials,
            seed,
            start: Start::Random,
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityEstimate {
    /// Mistake-driven updates observed over all trials.
    pub updates: usize,
    /// Updates after which the error did not decrease.
    pub non_decreasing: usize,
    /// `non_decreasing / updates`, or 0 when no update happened.
    pub estimate: f64,
}

/// Estimate how often a mistake-driven update fails to lower the error.
///
/// Each trial draws its own target, start and stream of `steps` uniform-disk
/// points from a per-trial seed.
pub fn monotonicity_experiment(cfg: &MonotonicityConfig) -> Result<MonotonicityEstimate> {
    if cfg.steps == 0 || cfg.trials == 0 {
        return invalid("monotonicity experiment needs steps >= 1 and trials >= 1");
    }
    if !(0.0..=0.5).contains(&cfg.noise) {
        return invalid(format!("label noise {} outside [0, 0.5]", cfg.noise));
    }
    let counts: Vec<(usize, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed::rng(seed::sub_seed(cfg.seed, stream::PERCEPTRON, trial as u64));
            let mu = unit_vector(&mut rng);
            let v0 = match cfg.start {
                Start::Random => unit_vector(&mut rng),
                Start::AtTarget => mu,
            };
            let mut s = PerceptronState::new(v0, mu).expect("unit vectors");
            let (mut updates, mut up) = (0, 0);
            for _ in 0..cfg.steps {
                let x = disk_point(&mut rng);
                let mut y = target_label(mu, x);
                if cfg.noise > 0.0 && rng.random_bool(cfg.noise) {
                    y = -y;
                }
                let next = perceptron_step(&s, x, y);
                if next.t > s.t {
                    updates += 1;
                    if !(next.theta < s.theta) {
                        up += 1;
                    }
                }
                s = next;
            }
            (updates, up)
        })
        .collect();
    let updates: usize = counts.iter().map(|c| c.0).sum();
    let non_decreasing: usize = counts.iter().map(|c| c.1).sum();
    let estimate = if updates == 0 {
        0.0
    } else {
        non_decreasing as f64 / updates as f64
    };
    Ok(MonotonicityEstimate {
        updates,
        non_decreasing,
        estimate,
    })
}

/// One row of a perceptron trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Stream position, starting at 1.
    pub step: usize,
    /// Updates so far.
    pub t: usize,
    pub theta: f64,
    pub error: f64,
}

/// Feed `points` with labels `labels` (±1) through a perceptron starting at
/// `start`, recording the state after every point.
pub fn trace(start: PerceptronState, points: &[[f64; 2]], labels: &[i8]) -> Vec<TraceRow> {
    let mut s = start;
    points
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&x, &y))| {
            s = perceptron_step(&s, x, y);
            TraceRow {
                step: i + 1,
                t: s.t,
                theta: s.theta,
                error: s.theta / PI,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityIdentity {
    /// `theta_t / pi - theta_next / pi`.
    pub lhs: f64,
    /// `(theta_next - theta_t) * Den / n` with `Den = n / pi` on the unit disk.
    pub rhs: f64,
    /// `||lhs| - |rhs||`.
    pub gap: f64,
}

/// Both sides of the error-difference/number-density identity on the unit
/// disk. The sides carry opposite signs when `theta_next > theta_t`, so the
/// gap compares magnitudes.
pub fn density_identity(theta_t: f64, theta_next: f64, n: usize) -> Result<DensityIdentity> {
    for a in [theta_t, theta_next] {
        if !(0.0..=PI).contains(&a) {
            return invalid(format!("angle {a} outside [0, pi]"));
        }
    }
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let density = n as f64 / PI;
    let lhs = theta_t / PI - theta_next / PI;
    let rhs = (theta_next - theta_t) * density / n as f64;
    Ok(DensityIdentity {
        lhs,
        rhs,
        gap: (lhs.abs() - rhs.abs()).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub eps: f64,
    pub delta: f64,
    /// Unlabeled pool size, at least 2.
    pub m: u64,
}

/// Label complexity on the halved hypothesis class:
/// `64/eps^2 * (ln(12/eps) / sqrt(2)^(m-2)) + ln(4/delta)`.
pub fn label_complexity_bound(q: &BoundQuery) -> Result<f64> {
    if !(q.eps > 0.0 && q.eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {}", q.eps));
    }
    if !(q.delta > 0.0 && q.delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {}", q.delta));
    }
    if q.m < 2 {
        return invalid(format!("m must be at least 2, got {}", q.m));
    }
    let shrink = 2f64.sqrt().powf((q.m - 2) as f64);
    Ok(64.0 / (q.eps * q.eps) * ((12.0 / q.eps).ln() / shrink) + (4.0 / q.delta).ln())
}
