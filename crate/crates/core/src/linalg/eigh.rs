//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::HermitianMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Unitary 2x2 factor `J` with `J* [[a, c], [conj(c), b]] J` diagonal.
///
/// Returns `(j_pp, j_pq, j_qp, j_qq, t)` where the new diagonal is
/// `(a - t|c|, b + t|c|)`.
#[inline]
pub(crate) fn jacobi_rotation(a: f64, b: f64, c: Complex64) -> (Complex64, Complex64, Complex64, Complex64, f64) {
    let r = c.norm();
    let phase = c.conj() / r;
    let theta = (b - a) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;
    (
        Complex64::new(cs, 0.0),
        Complex64::new(sn, 0.0),
        phase * (-sn),
        phase * cs,
        t,
    )
}

/// Result of [`eig_hermitian`].
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `U diag(f(lambda)) U*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let u = &self.vectors;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &w) in weights.iter().enumerate() {
                    if w != 0.0 {
                        acc += u[(i, k)] * u[(j, k)].conj() * w;
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
            out[(i, i)].im = 0.0;
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }
}

fn jacobi_sweeps(m: &mut ComplexMatrix, mut vectors: Option<&mut ComplexMatrix>) -> Result<()> {
    let n = m.n();
    let scale = m.frobenius();
    if n < 2 || scale == 0.0 {
        return Ok(());
    }
    let threshold = 1e-18 * scale;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let c = m[(p, q)];
                if c.norm() <= threshold {
                    continue;
                }
                rotated = true;
                let a = m[(p, p)].re;
                let b = m[(q, q)].re;
                let (jpp, jpq, jqp, jqq, t) = jacobi_rotation(a, b, c);
                let r = c.norm();
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    let np = mip * jpp + miq * jqp;
                    let nq = mip * jpq + miq * jqq;
                    m[(i, p)] = np;
                    m[(i, q)] = nq;
                    m[(p, i)] = np.conj();
                    m[(q, i)] = nq.conj();
                }
                m[(p, p)] = Complex64::new(a - t * r, 0.0);
                m[(q, q)] = Complex64::new(b + t * r, 0.0);
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                if let Some(v) = vectors.as_deref_mut() {
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * jpp + viq * jqp;
                        v[(i, q)] = vip * jpq + viq * jqq;
                    }
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    let mut off = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            off += m[(p, q)].norm_sqr();
        }
    }
    Err(Error::NoConvergence {
        routine: "hermitian jacobi",
        iterations: MAX_SWEEPS,
        residual: off.sqrt() / scale,
        partial: Vec::new(),
    })
}

/// Eigendecomposition `H = U diag(lambda) U*` with ascending eigenvalues.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<HermitianEigen> {
    eig_hermitian_unchecked(h.as_matrix())
}

/// Same as [`eig_hermitian`] for a matrix the caller knows to be Hermitian;
/// only the upper triangle is read.
pub(crate) fn eig_hermitian_unchecked(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = h.n();
    let mut m = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    jacobi_sweeps(&mut m, Some(&mut v))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub(crate) fn eigvals_hermitian_unchecked(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = h.n();
    if n == 2 {
        let a = h[(0, 0)].re;
        let b = h[(1, 1)].re;
        let c = h[(0, 1)].norm();
        let mid = 0.5 * (a + b);
        let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
        return Ok(vec![mid - rad, mid + rad]);
    }
    let mut m = h.hermitian_part();
    jacobi_sweeps(&mut m, None)?;
    let mut values: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}
