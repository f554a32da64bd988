use super::eigh::{eig_hermitian_unchecked, eigvals_hermitian_unchecked};
use super::matrix::ComplexMatrix;
use super::svd::svd;
use super::HermitianMatrix;
use crate::error::{Error, Result};

fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent {
            p,
            reason: "expected finite p >= 1",
        });
    }
    Ok(())
}

/// `|A|^p = (A*A)^{p/2}`, computed from the eigendecomposition of `A*A`
/// with negative eigenvalues clamped to zero.
pub fn abs_power(a: &ComplexMatrix, p: f64) -> Result<HermitianMatrix> {
    check_exponent(p)?;
    Ok(HermitianMatrix::from_trusted(abs_power_unchecked(a, p)?))
}

pub(crate) fn abs_power_unchecked(a: &ComplexMatrix, p: f64) -> Result<ComplexMatrix> {
    let gram = &a.adjoint() * a;
    let eig = eig_hermitian_unchecked(&gram)?;
    let half = 0.5 * p;
    Ok(eig.map(|l| if l <= 0.0 { 0.0 } else { l.powf(half) }))
}

/// `f(H)` for a Hermitian `H` by spectral calculus.
pub fn hermitian_function(h: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let eig = eig_hermitian_unchecked(h.as_matrix())?;
    Ok(HermitianMatrix::from_trusted(eig.map(f)))
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    let n = a.n();
    if n == 1 {
        return Ok(a[(0, 0)].norm());
    }
    let gram = &a.adjoint() * a;
    let top = *eigvals_hermitian_unchecked(&gram)?.last().expect("n >= 1");
    Ok(top.max(0.0).sqrt())
}

/// Schatten p-norm `(sum sigma_i^p)^{1/p}`; `p = inf` gives the operator norm.
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        return Ok(svd(a)?.largest());
    }
    check_exponent(p)?;
    let s = svd(a)?;
    Ok(schatten_from_singular_values(&s.values, p))
}

/// `Tr |A|^p = sum sigma_i^p`.
pub fn trace_abs_power(a: &ComplexMatrix, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let s = svd(a)?;
    Ok(s.values.iter().map(|v| v.powf(p)).sum())
}

pub(crate) fn schatten_from_singular_values(values: &[f64], p: f64) -> f64 {
    let top = values.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0.0;
    }
    // scaled to avoid overflow for large p
    let sum: f64 = values.iter().map(|v| (v / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}

/// Polar decomposition `A = U P` with `U` unitary and `P = |A|`.
///
/// On the kernel of `A` the unitary factor is completed from the SVD,
/// preferring the identity wherever the kernel allows it.
#[derive(Debug, Clone)]
pub struct Polar {
    pub unitary: ComplexMatrix,
    pub positive: HermitianMatrix,
}

pub fn polar(a: &ComplexMatrix) -> Result<Polar> {
    let s = svd(a)?;
    let unitary = &s.left * &s.right.adjoint();
    let n = a.n();
    let mut xs = s.right.clone();
    for j in 0..n {
        for i in 0..n {
            xs[(i, j)] *= s.values[j];
        }
    }
    let positive = (&xs * &s.right.adjoint()).hermitian_part();
    Ok(Polar {
        unitary,
        positive: HermitianMatrix::from_trusted(positive),
    })
}

/// `(holds, residual)` with `residual = |V V* V - V|` in operator norm.
pub fn is_partial_isometry(v: &ComplexMatrix, tol: f64) -> Result<(bool, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let vvv = &(&(v * &v.adjoint()) * v) - v;
    let residual = operator_norm(&vvv)?;
    Ok((residual <= tol, residual))
}

/// `|A*A - AA*|` in operator norm.
pub fn normality_defect(a: &ComplexMatrix) -> Result<f64> {
    let ad = a.adjoint();
    operator_norm(&(&(&ad * a) - &(a * &ad)))
}

/// `(I - A A*)^{1/2}`, negative eigenvalues clamped.
pub fn defect_root(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.n();
    let m = &ComplexMatrix::identity(n) - &(a * &a.adjoint());
    let eig = eig_hermitian_unchecked(&m)?;
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}
