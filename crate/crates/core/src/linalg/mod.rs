//! Dense complex matrix arithmetic and decompositions.

mod eigh;
mod functions;
mod matrix;
mod schur;
mod svd;

use num_complex::Complex64;

pub use eigh::{eig_hermitian, HermitianEigen};
pub use functions::{
    abs_power, defect_root, hermitian_function, is_partial_isometry, normality_defect, operator_norm, polar,
    schatten_norm, trace_abs_power, Polar,
};
pub use matrix::ComplexMatrix;
pub use schur::{eig_general, hessenberg};
pub use svd::{svd, Svd};

pub(crate) use eigh::{eig_hermitian_unchecked, eigvals_hermitian_unchecked};
pub(crate) use functions::abs_power_unchecked;
pub(crate) use matrix::{dot, norm};
pub(crate) use svd::complete_orthonormal;

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

/// A matrix equal to its adjoint up to `ToleranceConfig::hermitian`.
///
/// The stored matrix is exactly Hermitian: validated input is replaced by
/// its Hermitian part.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let defect = m.hermitian_defect();
        let allowed = tol.hermitian * m.max_abs().max(1.0);
        if defect > allowed {
            return Err(Error::NotHermitian {
                asymmetry: defect,
                tol: allowed,
            });
        }
        Ok(Self(m.hermitian_part()))
    }

    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        Self(m.hermitian_part())
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    /// `Tr[self * other]`, real up to rounding when `other` is Hermitian.
    pub fn expectation(&self, other: &ComplexMatrix) -> Complex64 {
        self.0.trace_product(other)
    }
}

/// Positive semidefinite matrix of unit trace.
#[derive(Debug, Clone)]
pub struct Density {
    matrix: HermitianMatrix,
    eigen: HermitianEigen,
}

impl Density {
    pub fn new(m: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let matrix = HermitianMatrix::new(m, tol)?;
        Self::from_hermitian(matrix, tol)
    }

    pub fn from_hermitian(matrix: HermitianMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let eigen = eig_hermitian(&matrix)?;
        let smallest = eigen.values.first().copied().unwrap_or(0.0);
        if smallest < -tol.psd {
            return Err(Error::NotDensity {
                reason: format!("eigenvalue {smallest:.3e} below -{:.1e}", tol.psd),
            });
        }
        let tr = matrix.as_matrix().trace().re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::NotDensity {
                reason: format!("trace {tr} differs from 1 by more than {:.1e}", tol.trace),
            });
        }
        Ok(Self { matrix, eigen })
    }

    /// `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let m = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
        let eigen = HermitianEigen {
            values: vec![1.0 / n as f64; n],
            vectors: ComplexMatrix::identity(n),
        };
        Self {
            matrix: HermitianMatrix(m),
            eigen,
        }
    }

    /// Diagonal density with the given (validated) weights.
    pub fn diagonal(weights: &[f64], tol: &ToleranceConfig) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(weights), tol)
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.matrix.as_matrix()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// Cached eigendecomposition, eigenvalues ascending.
    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    /// Number of eigenvalues above `max(n eps lambda_max, floor)`.
    pub fn rank(&self, floor: f64) -> usize {
        let cutoff = rank_cutoff(&self.eigen.values, floor);
        self.eigen.values.iter().filter(|&&l| l > cutoff).count()
    }

    /// The state `A -> Tr[D A]`.
    pub fn expectation(&self, a: &ComplexMatrix) -> Complex64 {
        self.matrix.as_matrix().trace_product(a)
    }
}

pub(crate) fn rank_cutoff(values: &[f64], floor: f64) -> f64 {
    let n = values.len() as f64;
    let top = values.iter().copied().fold(0.0, f64::max);
    (n * f64::EPSILON * top).max(floor)
}

/// Pure state `x x*` for a unit vector `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneProjection {
    vector: Vec<Complex64>,
}

impl RankOneProjection {
    pub fn new(vector: Vec<Complex64>, tol: &ToleranceConfig) -> Result<Self> {
        let len = norm(&vector);
        if vector.is_empty() || (len - 1.0).abs() > tol.unit_vector {
            return Err(Error::NotUnitVector { norm: len });
        }
        Ok(Self { vector })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(vector: Vec<Complex64>) -> Result<Self> {
        let len = norm(&vector);
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::NotUnitVector { norm: len });
        }
        Ok(Self {
            vector: vector.into_iter().map(|z| z / len).collect(),
        })
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut vector = vec![Complex64::new(0.0, 0.0); n];
        vector[k] = Complex64::new(1.0, 0.0);
        Self { vector }
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn n(&self) -> usize {
        self.vector.len()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.vector, &self.vector)
    }

    pub fn to_density(&self) -> Density {
        let n = self.n();
        let matrix = HermitianMatrix::from_trusted(self.matrix());
        let mut cols: Vec<Option<Vec<Complex64>>> = vec![None; n];
        cols[n - 1] = Some(self.vector.clone());
        let preferred: Vec<Vec<Complex64>> = (0..n)
            .map(|k| {
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[k] = Complex64::new(1.0, 0.0);
                e
            })
            .collect();
        complete_orthonormal(&mut cols, &preferred);
        let vectors = ComplexMatrix::from_columns(&cols.into_iter().map(|c| c.expect("completed")).collect::<Vec<_>>());
        let mut values = vec![0.0; n];
        values[n - 1] = 1.0;
        Density {
            matrix,
            eigen: HermitianEigen { values, vectors },
        }
    }

    /// `<x, A x>`.
    pub fn expectation(&self, a: &ComplexMatrix) -> Complex64 {
        dot(&a.mul_vec(&self.vector), &self.vector)
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::ComplexMatrix;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    pub fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        ComplexMatrix::from_row_major(n, data).unwrap()
    }

    pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
        let h = random_matrix(n, seed).hermitian_part();
        super::eig_hermitian_unchecked(&h).unwrap().vectors
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::random_matrix;
    use super::*;

    #[test]
    fn density_validation() {
        let tol = ToleranceConfig::default();
        assert!(Density::diagonal(&[0.5, 0.5], &tol).is_ok());
        assert!(matches!(
            Density::diagonal(&[0.7, 0.7], &tol),
            Err(Error::NotDensity { .. })
        ));
        assert!(matches!(
            Density::diagonal(&[1.5, -0.5], &tol),
            Err(Error::NotDensity { .. })
        ));
        let g = random_matrix(3, 1);
        assert!(matches!(Density::new(g, &tol), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn density_rank() {
        let tol = ToleranceConfig::default();
        let d = Density::diagonal(&[0.5, 0.5, 0.0], &tol).unwrap();
        assert_eq!(d.rank(tol.rank_floor), 2);
        assert_eq!(Density::maximally_mixed(4).rank(tol.rank_floor), 4);
    }

    #[test]
    fn rank_one_projection() {
        let tol = ToleranceConfig::default();
        assert!(RankOneProjection::new(vec![Complex64::new(2.0, 0.0)], &tol).is_err());
        let p = RankOneProjection::normalized(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        let d = p.to_density();
        assert_eq!(d.rank(tol.rank_floor), 1);
        let back = d.eigen().reconstruct();
        assert!((&back - d.as_matrix()).max_abs() < 1e-15);
        assert!((d.as_matrix().trace().re - 1.0).abs() < 1e-15);
    }
}
