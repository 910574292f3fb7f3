//! Active scoring and greedy halving of the input space.
//!
//! Each step scores every live column `i` by `|K(:,i)|^2 / (K(i,i) + u)`,
//! keeps the best one and deflates the kernel through it. Running the loop for
//! `ceil(n/2)` steps yields the representative half of the data.

use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::kernel::{rbf_kernel, KernelMatrix};

/// Default ridge term added to the score denominator.
pub const DEFAULT_U: f64 = 0.1;

/// The ordered representatives picked by [`select_halfspace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceSelection {
    pub indices: Vec<usize>,
    /// Winning score at each step.
    pub scores: Vec<f64>,
    pub sigma: f64,
    pub u: f64,
}

/// Scores for every index; already-deflated indices get `-inf`.
pub fn score_all(k: &KernelMatrix, u: f64) -> Result<Vec<f64>> {
    if !(u >= 0.0) {
        return invalid(format!("u must be non-negative, got {u}"));
    }
    let entries = k.entries();
    entries
        .axis_iter(Axis(1))
        .into_par_iter()
        .enumerate()
        .map(|(i, col)| {
            if k.is_deflated(i) {
                return Ok(f64::NEG_INFINITY);
            }
            let num: f64 = col.iter().map(|v| v * v).sum();
            let denom = entries[[i, i]].max(0.0) + u;
            if denom > 0.0 {
                Ok(num / denom)
            } else if num == 0.0 {
                Ok(0.0)
            } else {
                Err(Error::DegenerateKernel { index: i })
            }
        })
        .collect()
}

/// Index of the largest score, lowest index on ties. `None` if nothing is live.
fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s == f64::NEG_INFINITY {
            continue;
        }
        match best {
            Some(b) if scores[b] >= s => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Run `count` score/pick/deflate rounds on `k`. Returns picked indices and
/// their winning scores.
pub fn sequential_selection(
    mut k: KernelMatrix,
    u: f64,
    count: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    if count > k.n() {
        return invalid(format!("cannot select {count} of {} points", k.n()));
    }
    let mut indices = Vec::with_capacity(count);
    let mut scores = Vec::with_capacity(count);
    while indices.len() < count {
        let s = score_all(&k, u)?;
        let j = argmax(&s).expect("live index remains while count <= n");
        indices.push(j);
        scores.push(s[j]);
        k.deflate(j, u)?;
    }
    Ok((indices, scores))
}

/// Pick the `ceil(n/2)` most representative points of `d`.
pub fn select_halfspace(d: &Dataset, sigma: f64, u: f64) -> Result<HalfspaceSelection> {
    let k = rbf_kernel(d, sigma)?;
    select_halfspace_from_kernel(k, u)
}

/// As [`select_halfspace`], reusing a prebuilt (undeflated) kernel.
pub fn select_halfspace_from_kernel(k: KernelMatrix, u: f64) -> Result<HalfspaceSelection> {
    if !k.deflations().is_empty() {
        return invalid("halving needs an undeflated kernel");
    }
    let sigma = k.sigma();
    let half = k.n().div_ceil(2);
    let (indices, scores) = sequential_selection(k, u, half)?;
    Ok(HalfspaceSelection {
        indices,
        scores,
        sigma,
        u,
    })
}
