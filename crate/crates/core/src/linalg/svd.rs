//! Singular value decomposition by one-sided (Hestenes) Jacobi.

use num_complex::Complex64;

use super::eigh::jacobi_rotation;
use super::matrix::{dot, norm, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// `A = left * diag(values) * right*`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub left: ComplexMatrix,
    pub values: Vec<f64>,
    pub right: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut us = self.left.clone();
        for j in 0..n {
            for i in 0..n {
                us[(i, j)] *= self.values[j];
            }
        }
        &us * &self.right.adjoint()
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let n = a.n();
    // column-major working copies
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        converged = true;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let alpha: f64 = w[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w[j].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                // (W* W)_{ij}
                let gamma = dot(&w[j], &w[i]);
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let (jii, jij, jji, jjj, _) = jacobi_rotation(alpha, beta, gamma);
                for cols in [&mut w, &mut v] {
                    #[allow(clippy::needless_range_loop)]
                    for k in 0..n {
                        let xi = cols[i][k];
                        let xj = cols[j][k];
                        cols[i][k] = xi * jii + xj * jji;
                        cols[j][k] = xi * jij + xj * jjj;
                    }
                }
            }
        }
    }
    if !converged {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let denom = norm(&w[i]) * norm(&w[j]);
                if denom > 0.0 {
                    worst = worst.max(dot(&w[j], &w[i]).norm() / denom);
                }
            }
        }
        return Err(Error::NoConvergence {
            routine: "one-sided jacobi svd",
            iterations: sweeps,
            residual: worst,
            partial: Vec::new(),
        });
    }

    let sigma: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    let values: Vec<f64> = order.iter().map(|&k| sigma[k]).collect();
    let right_cols: Vec<Vec<Complex64>> = order.iter().map(|&k| v[k].clone()).collect();

    let cutoff = 1e-14 * values.first().copied().unwrap_or(0.0);
    let mut left_cols: Vec<Option<Vec<Complex64>>> = order
        .iter()
        .map(|&k| {
            (sigma[k] > cutoff && sigma[k] > 0.0)
                .then(|| w[k].iter().map(|z| z / sigma[k]).collect())
        })
        .collect();
    complete_orthonormal(&mut left_cols, &right_cols);

    let left = ComplexMatrix::from_columns(
        &left_cols.into_iter().map(|c| c.expect("completed")).collect::<Vec<_>>(),
    );
    let right = ComplexMatrix::from_columns(&right_cols);
    Ok(Svd { left, values, right })
}

/// Fills the missing columns with unit vectors orthogonal to every other
/// column. Column `k` first tries `preferred[k]`, then the standard basis.
pub(crate) fn complete_orthonormal(cols: &mut [Option<Vec<Complex64>>], preferred: &[Vec<Complex64>]) {
    let n = cols.len();
    for k in 0..n {
        if cols[k].is_some() {
            continue;
        }
        let candidates = std::iter::once(preferred[k].clone()).chain((0..n).map(|e| {
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            x[e] = Complex64::new(1.0, 0.0);
            x
        }));
        for mut x in candidates {
            for _ in 0..2 {
                for other in cols.iter().flatten() {
                    let proj = dot(&x, other);
                    for (xi, oi) in x.iter_mut().zip(other) {
                        *xi -= proj * oi;
                    }
                }
            }
            let len = norm(&x);
            if len > 0.5 {
                cols[k] = Some(x.iter().map(|z| z / len).collect());
                break;
            }
        }
    }
}
