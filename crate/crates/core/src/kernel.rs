//! RBF kernel matrix with sequential rank-one deflation.

use std::fmt::Write as _;

use ndarray::{Array1, Array2, ArrayView1, Axis, Zip};
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};

/// Default RBF bandwidth.
pub const DEFAULT_SIGMA: f64 = 1.8;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    entries: Array2<f64>,
    sigma: f64,
    deflations: Vec<usize>,
}

pub fn rbf(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, sigma: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-sq / (2.0 * sigma * sigma)).exp()
}

/// `K[i][j] = exp(-|x_i - x_j|^2 / (2 sigma^2))`, built row-parallel.
pub fn rbf_kernel(d: &Dataset, sigma: f64) -> Result<KernelMatrix> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return invalid(format!("kernel sigma must be positive, got {sigma}"));
    }
    let x = d.features();
    let n = d.n();
    let mut entries = Array2::zeros((n, n));
    entries
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            for j in 0..n {
                row[j] = if i == j {
                    1.0
                } else {
                    rbf(x.row(i), x.row(j), sigma)
                };
            }
        });
    Ok(KernelMatrix {
        entries,
        sigma,
        deflations: Vec::new(),
    })
}

impl KernelMatrix {
    /// Wrap an arbitrary symmetric matrix. Used by tests and oracles.
    pub fn from_entries(entries: Array2<f64>, sigma: f64) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return invalid("kernel matrix must be square and non-empty");
        }
        Ok(Self {
            entries,
            sigma,
            deflations: Vec::new(),
        })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn deflations(&self) -> &[usize] {
        &self.deflations
    }

    pub fn is_deflated(&self, idx: usize) -> bool {
        self.deflations.contains(&idx)
    }

    /// Remove the rank-one component through column `idx`:
    /// `K <- K - K(:,idx) K(idx,:) / (K(idx,idx) + u)`.
    ///
    /// Negative diagonal round-off is clamped to zero afterwards. A zero
    /// denominator is only accepted when the column itself is zero, in which
    /// case the update term is zero too.
    pub fn deflate(&mut self, idx: usize, u: f64) -> Result<()> {
        let n = self.n();
        if idx >= n {
            return invalid(format!("deflation index {idx} out of range for n={n}"));
        }
        if self.is_deflated(idx) {
            return invalid(format!("index {idx} already deflated"));
        }
        if !(u >= 0.0) {
            return invalid(format!("u must be non-negative, got {u}"));
        }
        let col: Array1<f64> = self.entries.column(idx).to_owned();
        let denom = self.entries[[idx, idx]].max(0.0) + u;
        if denom > 0.0 {
            Zip::from(self.entries.rows_mut())
                .and(&col)
                .par_for_each(|mut row, &ci| {
                    let scale = ci / denom;
                    row.zip_mut_with(&col, |k, &cj| *k -= scale * cj);
                });
        } else if col.iter().any(|&v| v != 0.0) {
            return Err(Error::DegenerateKernel { index: idx });
        }
        for i in 0..n {
            let v = &mut self.entries[[i, i]];
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        self.deflations.push(idx);
        Ok(())
    }

    /// Consuming form of [`KernelMatrix::deflate`].
    pub fn deflated(mut self, idx: usize, u: f64) -> Result<Self> {
        self.deflate(idx, u)?;
        Ok(self)
    }

    /// Dump as CSV, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}
