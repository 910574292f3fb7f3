//! Query strategies: the distribution-splitting pipeline and baselines.

use std::fmt;
use std::str::FromStr;

use ndarray::Axis;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::kernel::rbf_kernel;
use crate::scoring::{select_halfspace, sequential_selection, HalfspaceSelection};
use crate::seed;
use crate::splitting::{split_balls, BallPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Da2,
    Random,
    Ted,
    Kcenter,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Da2, Method::Random, Method::Ted, Method::Kcenter];

    /// Whether the query set depends on the trial seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Random)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Da2 => "da2",
            Method::Random => "random",
            Method::Ted => "ted",
            Method::Kcenter => "kcenter",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "da2" => Ok(Method::Da2),
            "random" => Ok(Method::Random),
            "ted" => Ok(Method::Ted),
            "kcenter" => Ok(Method::Kcenter),
            other => invalid(format!("unknown query method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySet {
    pub indices: Vec<usize>,
    pub method: Method,
    pub budget: usize,
}

/// Full pipeline output, for callers that want the intermediate stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Da2Run {
    pub selection: HalfspaceSelection,
    pub partition: BallPartition,
    pub queries: QuerySet,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Halve, split into `k` balls and query the halfspace point nearest each
/// ball center.
pub fn da2_query(d: &Dataset, k: usize, cfg: &RunConfig) -> Result<QuerySet> {
    let selection = select_halfspace(d, cfg.sigma, cfg.u)?;
    Ok(da2_run_with(d, selection, k, cfg)?.queries)
}

/// As [`da2_query`] with an existing halfspace selection.
pub fn da2_run_with(
    d: &Dataset,
    selection: HalfspaceSelection,
    k: usize,
    cfg: &RunConfig,
) -> Result<Da2Run> {
    let half = selection.indices.len();
    if k < 2 || k > half {
        return invalid(format!("k = {k} outside 2..={half}"));
    }
    let points = d.features().select(Axis(0), &selection.indices);
    let partition = split_balls(points.view(), &cfg.split_config(k))?;

    // candidates in dataset-index order so ties resolve to the lowest index
    let mut pool: Vec<usize> = selection.indices.clone();
    pool.sort_unstable();
    let mut taken = vec![false; d.n()];
    let mut indices = Vec::with_capacity(k);
    for ball in &partition.balls {
        let mut best: Option<(usize, f64)> = None;
        for &i in pool.iter().filter(|&&i| !taken[i]) {
            let dist = sq_dist(d.point(i).as_slice().expect("row-major"), &ball.center);
            if best.is_none_or(|(_, b)| dist < b) {
                best = Some((i, dist));
            }
        }
        let (i, _) = best.expect("k <= halfspace size");
        taken[i] = true;
        indices.push(i);
    }
    Ok(Da2Run {
        selection,
        partition,
        queries: QuerySet {
            indices,
            method: Method::Da2,
            budget: k,
        },
    })
}

/// Baseline strategies: uniform random, sequential kernel design over the
/// whole space, and farthest-first traversal from the medoid.
pub fn baseline_query(
    d: &Dataset,
    k: usize,
    method: Method,
    seed: u64,
    cfg: &RunConfig,
) -> Result<QuerySet> {
    let n = d.n();
    if k < 1 || k > n {
        return invalid(format!("budget {k} outside 1..={n}"));
    }
    let indices = match method {
        Method::Random => sample(&mut seed::rng(seed), n, k).into_vec(),
        Method::Ted => sequential_selection(rbf_kernel(d, cfg.sigma)?, cfg.u, k)?.0,
        Method::Kcenter => farthest_first(d, k),
        Method::Da2 => return invalid("da2 is not a baseline; use da2_query"),
    };
    Ok(QuerySet {
        indices,
        method,
        budget: k,
    })
}

/// Dispatch on `method`.
pub fn query(
    d: &Dataset,
    k: usize,
    method: Method,
    seed: u64,
    cfg: &RunConfig,
) -> Result<QuerySet> {
    match method {
        Method::Da2 => da2_query(d, k, cfg),
        other => baseline_query(d, k, other, seed, cfg),
    }
}

fn farthest_first(d: &Dataset, k: usize) -> Vec<usize> {
    let n = d.n();
    let row = |i: usize| d.point(i);
    let dist = |i: usize, j: usize| {
        row(i)
            .iter()
            .zip(row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let medoid = (0..n)
        .map(|i| (i, (0..n).map(|j| dist(i, j)).sum::<f64>()))
        .fold(
            (0, f64::INFINITY),
            |best, (i, s)| if s < best.1 { (i, s) } else { best },
        )
        .0;
    let mut chosen = vec![medoid];
    let mut nearest: Vec<f64> = (0..n).map(|j| dist(medoid, j)).collect();
    while chosen.len() < k {
        let mut far = (usize::MAX, f64::NEG_INFINITY);
        for (j, &v) in nearest.iter().enumerate() {
            if v > far.1 && !chosen.contains(&j) {
                far = (j, v);
            }
        }
        let next = far.0;
        chosen.push(next);
        for (j, v) in nearest.iter_mut().enumerate() {
            *v = v.min(dist(next, j));
        }
    }
    chosen
}
