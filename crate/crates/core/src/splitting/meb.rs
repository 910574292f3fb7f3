//! Approximate minimum enclosing ball.
//!
//! Frank-Wolfe on the dual: weights `w` on the simplex give the center
//! `c = sum w_i p_i` and the lower bound `phi(w) = sum w_i |p_i - c|^2 <= r_opt^2`.
//! Each round moves weight (and the center) toward the farthest point. The
//! loop stops once every point lies within `(1 + eps) * sqrt(phi)`, which
//! certifies `radius <= (1 + eps) * r_opt`.

use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const MAX_ROUNDS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec<f64>,
    pub radius: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Ball covering every row of `points` with radius at most `(1 + eps)` times
/// the optimum.
pub fn min_enclosing_ball(points: ArrayView2<'_, f64>, eps: f64) -> Result<Sphere> {
    let (n, dim) = points.dim();
    if n == 0 {
        return invalid("enclosing ball of an empty point set");
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let rows: Vec<Vec<f64>> = points.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut weights = vec![1.0 / n as f64; n];
    let mut center: Array1<f64> = Array1::zeros(dim);
    for p in &rows {
        for (c, v) in center.iter_mut().zip(p) {
            *c += v / n as f64;
        }
    }
    let slack = (1.0 + eps) * (1.0 + eps);
    for _ in 0..MAX_ROUNDS {
        let c = center.as_slice().expect("contiguous");
        let dists: Vec<f64> = rows.iter().map(|p| sq_dist(p, c)).collect();
        let (far, far_d2) =
            dists
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
                );
        if far_d2 == 0.0 {
            return Ok(Sphere {
                center: c.to_vec(),
                radius: 0.0,
            });
        }
        let phi: f64 = weights.iter().zip(&dists).map(|(w, d)| w * d).sum();
        if far_d2 <= slack * phi {
            return Ok(Sphere {
                center: c.to_vec(),
                radius: far_d2.sqrt(),
            });
        }
        let delta = far_d2 / phi - 1.0;
        let step = delta / (2.0 * (1.0 + delta));
        for w in weights.iter_mut() {
            *w *= 1.0 - step;
        }
        weights[far] += step;
        for (cj, pj) in center.iter_mut().zip(&rows[far]) {
            *cj = (1.0 - step) * *cj + step * pj;
        }
    }
    let c = center.to_vec();
    let radius = rows
        .iter()
        .map(|p| sq_dist(p, &c))
        .fold(0.0, f64::max)
        .sqrt();
    Ok(Sphere { center: c, radius })
}
