//! Error-rate harnesses: passive sampling curves and active-learning
//! comparisons, evaluated transductively on the full dataset.

mod classifier;
mod query;

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::kernel::rbf_kernel;
use crate::scoring::select_halfspace_from_kernel;
use crate::seed::{self, stream};

pub use classifier::{error_rate, train_classifier, Classifier};
pub use query::{baseline_query, da2_query, da2_run_with, query, Da2Run, Method, QuerySet};

/// Default number of passive-sampling repetitions per budget.
pub const DEFAULT_PASSIVE_TRIALS: usize = 10;
/// Default number of repetitions in the active-learning comparison.
pub const DEFAULT_COMPARE_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub method: String,
    pub budgets: Vec<usize>,
    pub mean_error: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Lowest error over the trials at each budget.
    pub best_error: Vec<f64>,
    pub trials: usize,
}

impl ErrorCurve {
    fn from_samples(method: String, budgets: &[usize], samples: &[Vec<f64>]) -> Self {
        let mut curve = ErrorCurve {
            method,
            budgets: budgets.to_vec(),
            mean_error: Vec::with_capacity(budgets.len()),
            std_error: Vec::with_capacity(budgets.len()),
            best_error: Vec::with_capacity(budgets.len()),
            trials: samples.first().map_or(0, Vec::len),
        };
        for errs in samples {
            let n = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / n;
            let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
            curve.mean_error.push(mean);
            curve.std_error.push(var.sqrt());
            curve
                .best_error
                .push(errs.iter().copied().fold(f64::INFINITY, f64::min));
        }
        curve
    }
}

/// Which pool passive sampling draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Full,
    Halfspace,
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Space::Full => "full",
            Space::Halfspace => "halfspace",
        })
    }
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Space::Full),
            "halfspace" => Ok(Space::Halfspace),
            other => invalid(format!("space must be full or halfspace, got {other:?}")),
        }
    }
}

fn train_and_score(d: &Dataset, rows: &[usize], cfg: &RunConfig) -> Result<f64> {
    let train = d.subset(rows)?;
    let c = train_classifier(&train, cfg.lambda, cfg.sigma)?;
    Ok(error_rate(&c, d))
}

/// Passive sampling: for each budget and trial, draw a uniform sample of the
/// pool, train on it and measure the error on the whole dataset.
pub fn passive_sampling_curve(
    d: &Dataset,
    space: Space,
    budgets: &[usize],
    trials: usize,
    seed: u64,
    cfg: &RunConfig,
) -> Result<ErrorCurve> {
    let pool: Vec<usize> = match space {
        Space::Full => (0..d.n()).collect(),
        Space::Halfspace => select_halfspace_from_kernel(rbf_kernel(d, cfg.sigma)?, cfg.u)?.indices,
    };
    passive_curve_on_pool(d, &pool, &space.to_string(), budgets, trials, seed, cfg)
}

/// Passive sampling from an explicit pool of row indices.
pub fn passive_curve_on_pool(
    d: &Dataset,
    pool: &[usize],
    label: &str,
    budgets: &[usize],
    trials: usize,
    seed: u64,
    cfg: &RunConfig,
) -> Result<ErrorCurve> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    if let Some(&b) = budgets.iter().find(|&&b| b == 0 || b > pool.len()) {
        return invalid(format!(
            "budget {b} outside 1..={} for the {label} pool",
            pool.len()
        ));
    }
    let samples = budgets
        .iter()
        .map(|&budget| {
            let budget_seed = seed::sub_seed(seed, stream::PASSIVE, budget as u64);
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = seed::rng(seed::sub_seed(budget_seed, 0, t as u64));
                    let rows: Vec<usize> = sample(&mut rng, pool.len(), budget)
                        .into_iter()
                        .map(|i| pool[i])
                        .collect();
                    train_and_score(d, &rows, cfg)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorCurve::from_samples(
        label.to_string(),
        budgets,
        &samples,
    ))
}

/// Active-learning comparison.
///
/// Every trial starts from one random point per class. Each method's query
/// set of the given budget is added to that start set, a classifier is
/// trained, and the error on the whole dataset is recorded. Deterministic
/// methods are queried once per budget and reused across trials.
pub fn al_comparison(
    d: &Dataset,
    methods: &[Method],
    budgets: &[usize],
    trials: usize,
    seed: u64,
    cfg: &RunConfig,
) -> Result<Vec<ErrorCurve>> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let members = d.class_members();
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return invalid(format!("class {c} has no points"));
    }

    for &b in budgets {
        if b > d.n() {
            return invalid(format!("budget {b} exceeds n = {}", d.n()));
        }
    }

    // label-free stages shared by the deterministic methods
    let needs_halfspace = methods.contains(&Method::Da2) && budgets.iter().any(|&b| b > 0);
    let selection = if needs_halfspace {
        Some(select_halfspace_from_kernel(
            rbf_kernel(d, cfg.sigma)?,
            cfg.u,
        )?)
    } else {
        None
    };
    let mut fixed: HashMap<(Method, usize), Vec<usize>> = HashMap::new();
    for &m in methods.iter().filter(|m| !m.is_stochastic()) {
        for &b in budgets {
            let q = match (m, b) {
                (_, 0) => Vec::new(),
                (Method::Da2, _) => {
                    let sel = selection.clone().expect("computed above");
                    da2_run_with(d, sel, b, cfg)?.queries.indices
                }
                _ => baseline_query(d, b, m, 0, cfg)?.indices,
            };
            fixed.insert((m, b), q);
        }
    }

    // errors[trial][method][budget]
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = seed::sub_seed(seed, stream::COMPARE, t as u64);
            let mut rng = seed::rng(trial_seed);
            let initial: Vec<usize> = members
                .iter()
                .map(|m| m[rng.random_range(0..m.len())])
                .collect();
            methods
                .iter()
                .enumerate()
                .map(|(mi, &m)| {
                    budgets
                        .iter()
                        .map(|&b| {
                            let queried = if b == 0 {
                                Vec::new()
                            } else if m.is_stochastic() {
                                let s = seed::sub_seed(trial_seed, 1 + mi as u64, b as u64);
                                baseline_query(d, b, m, s, cfg)?.indices
                            } else {
                                fixed[&(m, b)].clone()
                            };
                            let mut rows = initial.clone();
                            rows.extend(queried.into_iter().filter(|i| !initial.contains(i)));
                            train_and_score(d, &rows, cfg)
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(methods
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            let samples: Vec<Vec<f64>> = (0..budgets.len())
                .map(|bi| errors.iter().map(|trial| trial[mi][bi]).collect())
                .collect();
            ErrorCurve::from_samples(m.to_string(), budgets, &samples)
        })
        .collect())
}

/// Serialize curves as CSV with columns
/// `method,budget,mean_error,std_error,trials` plus `best_error` when asked.
pub fn curves_to_csv(curves: &[ErrorCurve], with_best: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method", "budget", "mean_error", "std_error", "trials"];
    if with_best {
        header.push("best_error");
    }
    w.write_record(&header).map_err(csv_err)?;
    for c in curves {
        for i in 0..c.budgets.len() {
            let mut rec = vec![
                c.method.clone(),
                c.budgets[i].to_string(),
                c.mean_error[i].to_string(),
                c.std_error[i].to_string(),
                c.trials.to_string(),
            ];
            if with_best {
                rec.push(c.best_error[i].to_string());
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Deserialize)]
struct CurveRow {
    method: String,
    budget: usize,
    mean_error: f64,
    std_error: f64,
    trials: usize,
    best_error: Option<f64>,
}

/// Parse curves written by [`curves_to_csv`]. Rows group by method in order
/// of first appearance. A missing `best_error` column reads as NaN.
pub fn curves_from_csv(text: &str) -> Result<Vec<ErrorCurve>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut curves: Vec<ErrorCurve> = Vec::new();
    for (i, row) in r.deserialize::<CurveRow>().enumerate() {
        let row = row.map_err(|e| Error::Format {
            line: i + 2,
            msg: e.to_string(),
        })?;
        let idx = match curves.iter().position(|c| c.method == row.method) {
            Some(idx) => idx,
            None => {
                curves.push(ErrorCurve {
                    method: row.method.clone(),
                    budgets: vec![],
                    mean_error: vec![],
                    std_error: vec![],
                    best_error: vec![],
                    trials: row.trials,
                });
                curves.len() - 1
            }
        };
        let c = &mut curves[idx];
        c.budgets.push(row.budget);
        c.mean_error.push(row.mean_error);
        c.std_error.push(row.std_error);
        c.best_error.push(row.best_error.unwrap_or(f64::NAN));
    }
    Ok(curves)
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_gaussian_blobs;

    fn blobs() -> Dataset {
        generate_gaussian_blobs(3, 10, 0.3, 5).unwrap()
    }

    #[test]
    fn budget_zero_ties_all_methods() {
        let d = blobs();
        let curves = al_comparison(&d, &Method::ALL, &[0], 5, 1, &RunConfig::default()).unwrap();
        for c in &curves[1..] {
            assert_eq!(c.mean_error, curves[0].mean_error);
        }
    }

    #[test]
    fn full_budget_is_deterministic() {
        let d = blobs();
        let c =
            passive_sampling_curve(&d, Space::Full, &[d.n()], 4, 2, &RunConfig::default()).unwrap();
        assert_eq!(c.std_error[0], 0.0);
    }

    #[test]
    fn errors_are_rates() {
        let d = blobs();
        let cfg = RunConfig::default();
        let mut curves = al_comparison(&d, &Method::ALL, &[2, 4], 6, 3, &cfg).unwrap();
        curves.push(passive_sampling_curve(&d, Space::Halfspace, &[3, 6], 3, 3, &cfg).unwrap());
        for c in curves {
            for i in 0..c.budgets.len() {
                assert!((0.0..=1.0).contains(&c.mean_error[i]));
                assert!(c.std_error[i] >= 0.0);
                assert!(c.best_error[i] <= c.mean_error[i]);
            }
        }
    }

    #[test]
    fn same_seed_same_curves() {
        let d = blobs();
        let cfg = RunConfig::default();
        let a = al_comparison(&d, &Method::ALL, &[3], 8, 4, &cfg).unwrap();
        let b = al_comparison(&d, &Method::ALL, &[3], 8, 4, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let d = blobs();
        let curves = al_comparison(
            &d,
            &[Method::Random, Method::Ted],
            &[1, 3],
            3,
            0,
            &RunConfig::default(),
        )
        .unwrap();
        let back = curves_from_csv(&curves_to_csv(&curves, true).unwrap()).unwrap();
        assert_eq!(back, curves);
        let plain = curves_from_csv(&curves_to_csv(&curves, false).unwrap()).unwrap();
        assert!(plain[0].best_error.iter().all(|v| v.is_nan()));
        assert_eq!(plain[1].mean_error, curves[1].mean_error);
    }

    #[test]
    fn empty_class_rejected() {
        let d = blobs();
        let labels: Vec<usize> = d.labels().iter().map(|&y| y.min(1)).collect();
        let two = Dataset::with_classes(d.features().clone(), labels, 3, "t").unwrap();
        assert!(al_comparison(&two, &[Method::Random], &[2], 2, 0, &RunConfig::default()).is_err());
    }

    #[test]
    fn bad_budgets_and_trials() {
        let d = blobs();
        let cfg = RunConfig::default();
        assert!(passive_sampling_curve(&d, Space::Full, &[0], 2, 0, &cfg).is_err());
        assert!(passive_sampling_curve(&d, Space::Halfspace, &[16], 2, 0, &cfg).is_err());
        assert!(passive_sampling_curve(&d, Space::Full, &[2], 0, 0, &cfg).is_err());
        assert!(al_comparison(&d, &[Method::Random], &[31], 2, 0, &cfg).is_err());
    }
}
