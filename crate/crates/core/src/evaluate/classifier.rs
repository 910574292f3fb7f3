//! One-vs-rest kernel regularized least squares.

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::kernel::rbf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    support: Array2<f64>,
    /// One coefficient vector per class; `None` for classes absent from training.
    alphas: Vec<Option<Vec<f64>>>,
    lambda: f64,
    sigma: f64,
}

/// In-place Cholesky factor `a = l l^T`, lower triangle returned.
fn cholesky(mut a: Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= a[[j, k]] * a[[j, k]];
        }
        if !(d > 0.0) {
            return invalid("training system is not positive definite");
        }
        let d = d.sqrt();
        a[[j, j]] = d;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= a[[i, k]] * a[[j, k]];
            }
            a[[i, j]] = s / d;
        }
        for k in j + 1..n {
            a[[j, k]] = 0.0;
        }
    }
    Ok(a)
}

fn cholesky_solve(l: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[[i, k]] * y[k];
        }
        y[i] /= l[[i, i]];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[[k, i]] * y[k];
        }
        y[i] /= l[[i, i]];
    }
    y
}

/// Fit one regressor per class on `+1 / -1` targets:
/// `(K_L + lambda I) alpha_c = y_c`.
pub fn train_classifier(train: &Dataset, lambda: f64, sigma: f64) -> Result<Classifier> {
    if !(lambda > 0.0) {
        return invalid(format!("lambda must be positive, got {lambda}"));
    }
    if !(sigma > 0.0) {
        return invalid(format!("sigma must be positive, got {sigma}"));
    }
    let n = train.n();
    let x = train.features();
    let mut gram = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v = if i == j {
                1.0
            } else {
                rbf(x.row(i), x.row(j), sigma)
            };
            gram[[i, j]] = v;
            gram[[j, i]] = v;
        }
        gram[[i, i]] += lambda;
    }
    let l = cholesky(gram)?;
    let alphas = (0..train.n_classes())
        .map(|c| {
            if !train.labels().contains(&c) {
                return None;
            }
            let y: Vec<f64> = train
                .labels()
                .iter()
                .map(|&l| if l == c { 1.0 } else { -1.0 })
                .collect();
            Some(cholesky_solve(&l, &y))
        })
        .collect();
    Ok(Classifier {
        support: x.clone(),
        alphas,
        lambda,
        sigma,
    })
}

impl Classifier {
    pub fn alphas(&self) -> &[Option<Vec<f64>>] {
        &self.alphas
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Class with the largest decision value; classes unseen in training are
    /// never predicted. Ties go to the lowest class id.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> usize {
        let k: Vec<f64> = self
            .support
            .axis_iter(Axis(0))
            .map(|s| rbf(s, x, self.sigma))
            .collect();
        let mut best = (0, f64::NEG_INFINITY);
        for (c, alpha) in self.alphas.iter().enumerate() {
            if let Some(a) = alpha {
                let score: f64 = a.iter().zip(&k).map(|(a, k)| a * k).sum();
                if score > best.1 {
                    best = (c, score);
                }
            }
        }
        best.0
    }

    pub fn predict_all(&self, d: &Dataset) -> Vec<usize> {
        d.features()
            .axis_iter(Axis(0))
            .map(|x| self.predict(x))
            .collect()
    }
}

/// Fraction of rows of `d` the classifier gets wrong.
pub fn error_rate(c: &Classifier, d: &Dataset) -> f64 {
    let wrong = c
        .predict_all(d)
        .iter()
        .zip(d.labels())
        .filter(|(p, y)| p != y)
        .count();
    wrong as f64 / d.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn separable_pair() {
        let d = Dataset::new(array![[0.0, 0.0], [4.0, 4.0]], vec![0, 1], "t").unwrap();
        let c = train_classifier(&d, 1e-3, 1.8).unwrap();
        assert_eq!(error_rate(&c, &d), 0.0);
    }

    #[test]
    fn constant_labels_predict_constant() {
        let x = array![[0.0], [1.0], [2.0]];
        let d = Dataset::with_classes(x, vec![1, 1, 1], 3, "t").unwrap();
        let c = train_classifier(&d, 1e-3, 1.8).unwrap();
        for v in [-50.0, 0.5, 3.0, 100.0] {
            assert_eq!(c.predict(array![v].view()), 1);
        }
    }

    #[test]
    fn constant_classifier_on_balanced_data() {
        let train = Dataset::with_classes(array![[0.0]], vec![0], 2, "t").unwrap();
        let c = train_classifier(&train, 1e-3, 1.8).unwrap();
        let test = Dataset::new(array![[0.0], [1.0], [2.0], [3.0]], vec![0, 1, 0, 1], "t").unwrap();
        assert_eq!(error_rate(&c, &test), 0.5);
    }

    #[test]
    fn three_point_system_matches_cramer() {
        let x = array![[0.0, 0.0], [1.0, 0.5], [-0.7, 1.2]];
        let d = Dataset::new(x.clone(), vec![0, 1, 0], "t").unwrap();
        let (lambda, sigma) = (1e-3, 1.8);
        let c = train_classifier(&d, lambda, sigma).unwrap();
        // hand-assembled system solved by Cramer's rule
        let k = |i: usize, j: usize| {
            let sq: f64 = (0..2).map(|t| (x[[i, t]] - x[[j, t]]).powi(2)).sum();
            (-sq / (2.0 * sigma * sigma)).exp() + if i == j { lambda } else { 0.0 }
        };
        let m = [
            [k(0, 0), k(0, 1), k(0, 2)],
            [k(1, 0), k(1, 1), k(1, 2)],
            [k(2, 0), k(2, 1), k(2, 2)],
        ];
        let det3 = |a: [[f64; 3]; 3]| {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        };
        let det = det3(m);
        for (cls, y) in [(0, [1.0, -1.0, 1.0]), (1, [-1.0, 1.0, -1.0])] {
            let alpha = c.alphas()[cls].as_ref().unwrap();
            for col in 0..3 {
                let mut mc = m;
                for row in 0..3 {
                    mc[row][col] = y[row];
                }
                assert_abs_diff_eq!(
                    alpha[col],
                    det3(mc) / det,
                    epsilon = 1e-6 * alpha[col].abs().max(1.0)
                );
            }
        }
    }

    #[test]
    fn bad_hyperparameters() {
        let d = Dataset::new(array![[0.0]], vec![0], "t").unwrap();
        assert!(train_classifier(&d, 0.0, 1.0).is_err());
        assert!(train_classifier(&d, 1.0, 0.0).is_err());
    }
}
