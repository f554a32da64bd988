//! Dilations and decompositions: the partial-isometry dilation of a
//! contraction, the mean of two unitaries, and the doubling of a normal
//! matrix into a Hermitian one.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::smallest_enclosing_circle;
use crate::json::{serialize_complex, serialize_complex_vec, serialize_matrix};
use crate::linalg::{
    defect_root, eig_hermitian_unchecked, normality_defect, operator_norm, svd, ComplexMatrix, Density,
};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationKind {
    PartialIsometry,
    Doubling,
}

#[derive(Debug, Clone, Serialize)]
pub struct DilationPair {
    #[serde(serialize_with = "serialize_matrix")]
    pub original: ComplexMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub dilated: ComplexMatrix,
    pub kind: DilationKind,
}

fn check_contraction(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<()> {
    let norm = operator_norm(a)?;
    if norm > 1.0 + tol.contraction {
        return Err(Error::NotContraction { norm });
    }
    Ok(())
}

/// `[[A, (I - AA*)^{1/2}], [0, 0]]`, a partial isometry for any contraction.
pub fn halmos_dilation(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<DilationPair> {
    check_contraction(a, tol)?;
    let n = a.n();
    let zero = ComplexMatrix::zeros(n);
    let dilated = ComplexMatrix::from_blocks(a, &defect_root(a)?, &zero, &zero);
    Ok(DilationPair {
        original: a.clone(),
        dilated,
        kind: DilationKind::PartialIsometry,
    })
}

/// `D (+) 0` padded to `target` dimensions.
pub fn embed_density(d: &Density, target: usize, tol: &ToleranceConfig) -> Result<Density> {
    if target < d.n() {
        return Err(Error::DimensionMismatch {
            left: d.n(),
            right: target,
        });
    }
    Density::new(d.as_matrix().pad_to(target), tol)
}

/// `A = (U1 + U2) / 2` with `U1,2 = W (S +- i (I - S^2)^{1/2}) X*` from the
/// singular value decomposition `A = W S X*`.
pub fn unitary_mean(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_contraction(a, tol)?;
    let s = svd(a)?;
    let n = a.n();
    let build = |sign: f64| {
        let diag: Vec<Complex64> = s
            .values
            .iter()
            .map(|&v| {
                let v = v.min(1.0);
                Complex64::new(v, sign * (1.0 - v * v).max(0.0).sqrt())
            })
            .collect();
        let mut wd = s.left.clone();
        for j in 0..n {
            for i in 0..n {
                wd[(i, j)] *= diag[j];
            }
        }
        &wd * &s.right.adjoint()
    };
    Ok((build(1.0), build(-1.0)))
}

/// Eigenvalues and a unitary eigenbasis of a normal matrix, `A = U diag U*`.
///
/// Diagonalizes the Hermitian combination `Re A + c Im A` for an irrational
/// `c`, which separates the eigenvalues of `A` unless two of them lie on a
/// line of slope `-1/c`; a second `c` covers that case.
pub fn normal_eigen(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let scale = operator_norm(a)?.max(1.0);
    let defect = normality_defect(a)?;
    if defect > tol.normality * scale * scale {
        return Err(Error::NotNormal { residual: defect });
    }
    let re = a.hermitian_part();
    let im = (a - &a.adjoint()).scale(Complex64::new(0.0, -0.5));
    let mut best: Option<(f64, Vec<Complex64>, ComplexMatrix)> = None;
    for c in [0.577_215_664_901_532_9, -1.324_717_957_244_746] {
        let k = &re + &im.scale_real(c);
        let eig = eig_hermitian_unchecked(&k)?;
        let u = eig.vectors;
        let t = &(&u.adjoint() * a) * &u;
        let values = t.diagonal();
        let off = (&t - &ComplexMatrix::from_diag(&values)).max_abs();
        if best.as_ref().is_none_or(|b| off < b.0) {
            best = Some((off, values, u));
        }
        if off <= 1e-12 * scale {
            break;
        }
    }
    let (_, values, u) = best.expect("two attempts");
    Ok((values, u))
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalDoubling {
    /// `diag(l_1..l_n, -conj(l_1)..-conj(l_n))`
    #[serde(serialize_with = "serialize_matrix")]
    pub a_tilde: ComplexMatrix,
    /// `diag(|l_1|..|l_n|, -|l_1|..-|l_n|)`
    #[serde(serialize_with = "serialize_matrix")]
    pub h_tilde: ComplexMatrix,
    /// `A - shift = transition diag(eigenvalues) transition*`
    #[serde(serialize_with = "serialize_matrix")]
    pub transition: ComplexMatrix,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    /// Subtracted from `A` before doubling (zero for the raw variant).
    #[serde(serialize_with = "serialize_complex")]
    pub shift: Complex64,
}

fn doubling_from(a: &ComplexMatrix, shift: Complex64, tol: &ToleranceConfig) -> Result<NormalDoubling> {
    let (eigenvalues, transition) = normal_eigen(&a.shift(shift), tol)?;
    let mut at: Vec<Complex64> = eigenvalues.clone();
    at.extend(eigenvalues.iter().map(|l| -l.conj()));
    let mut ht: Vec<f64> = eigenvalues.iter().map(|l| l.norm()).collect();
    ht.extend(eigenvalues.iter().map(|l| -l.norm()));
    Ok(NormalDoubling {
        a_tilde: ComplexMatrix::from_diag(&at),
        h_tilde: ComplexMatrix::from_real_diag(&ht),
        transition,
        eigenvalues,
        shift,
    })
}

/// Doubling of a normal matrix in its own eigenbasis, without recentering.
pub fn normal_doubling(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<NormalDoubling> {
    doubling_from(a, Complex64::new(0.0, 0.0), tol)
}

/// Doubling after moving the center of the spectrum's smallest enclosing
/// circle to the origin. Only in this position do `A~` and `H~` share the
/// Chebyshev radius of `A`.
pub fn normal_doubling_centered(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<NormalDoubling> {
    let (values, _) = normal_eigen(a, tol)?;
    let center = smallest_enclosing_circle(&values)?.center;
    doubling_from(a, center, tol)
}
