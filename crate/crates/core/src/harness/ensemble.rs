use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, is_partial_isometry, norm, normality_defect, operator_norm, ComplexMatrix, Density, RankOneProjection};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Hermitian,
    Normal,
    Unitary,
    PartialIsometry,
    Contraction,
    Density,
    RankOneDensity,
    /// Scaled complex Gaussian matrix plus a random scalar shift.
    Ginibre,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 8] = [
        Self::Hermitian,
        Self::Normal,
        Self::Unitary,
        Self::PartialIsometry,
        Self::Contraction,
        Self::Density,
        Self::RankOneDensity,
        Self::Ginibre,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub enum Sample {
    Matrix(ComplexMatrix),
    Density(Density),
}

impl Sample {
    pub fn matrix(&self) -> &ComplexMatrix {
        match self {
            Sample::Matrix(m) => m,
            Sample::Density(d) => d.as_matrix(),
        }
    }
}

/// Draws one sample from a ChaCha20 stream seeded with `spec.seed` and
/// checks its defining property.
pub fn generate(spec: &EnsembleSpec) -> Result<Sample> {
    if spec.dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let n = spec.dim;
    let tol = ToleranceConfig::default();
    let sample = match spec.kind {
        EnsembleKind::Hermitian => Sample::Matrix(hermitian(n, &mut rng)),
        EnsembleKind::Normal => Sample::Matrix(normal(n, &mut rng)),
        EnsembleKind::Unitary => Sample::Matrix(haar_unitary(n, &mut rng)),
        EnsembleKind::PartialIsometry => Sample::Matrix(partial_isometry(n, &mut rng)),
        EnsembleKind::Contraction => Sample::Matrix(contraction(n, &mut rng)?),
        EnsembleKind::Ginibre => Sample::Matrix(ginibre(n, &mut rng)),
        EnsembleKind::Density => Sample::Density(wishart_density(n, &mut rng, &tol)?),
        EnsembleKind::RankOneDensity => Sample::Density(random_unit_vector(n, &mut rng).to_density()),
    };
    check_sample(spec.kind, &sample)?;
    Ok(sample)
}

fn check_sample(kind: EnsembleKind, sample: &Sample) -> Result<()> {
    const TOL: f64 = 1e-10;
    let m = sample.matrix();
    let n = m.n();
    let scale = m.max_abs().max(1.0);
    let residual = match kind {
        EnsembleKind::Hermitian => m.hermitian_defect() / scale,
        EnsembleKind::Normal => normality_defect(m)? / (scale * scale),
        EnsembleKind::Unitary => (&(&m.adjoint() * m) - &ComplexMatrix::identity(n)).max_abs(),
        EnsembleKind::PartialIsometry => is_partial_isometry(m, TOL)?.1,
        EnsembleKind::Contraction => (operator_norm(m)? - 1.0).max(0.0),
        EnsembleKind::Density | EnsembleKind::RankOneDensity => {
            let d = match sample {
                Sample::Density(d) => d,
                Sample::Matrix(_) => unreachable!("density kinds produce densities"),
            };
            let low = -d.eigen().values[0];
            low.max((d.as_matrix().trace().re - 1.0).abs()).max(0.0)
        }
        EnsembleKind::Ginibre => 0.0,
    };
    if residual > TOL {
        return Err(Error::InvalidArgument(format!(
            "generated {kind:?} sample violates its defining property by {residual:.3e}"
        )));
    }
    Ok(())
}

pub(crate) fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub(crate) fn gaussian_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data = (0..n * n).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_row_major(n, data).expect("finite samples")
}

pub(crate) fn hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    gaussian_matrix(n, rng).hermitian_part()
}

pub(crate) fn ginibre(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = gaussian_matrix(n, rng).scale_real(1.0 / (n as f64).sqrt());
    let shift = gaussian(rng);
    g.shift(-shift)
}

/// Q factor of a Gaussian matrix with the phases fixed by a positive
/// diagonal in R, which makes it Haar distributed.
pub(crate) fn haar_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = gaussian_matrix(n, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let proj = dot(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let len = norm(&v);
        cols.push(v.into_iter().map(|z| z / len).collect());
    }
    ComplexMatrix::from_columns(&cols)
}

pub(crate) fn normal(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let u = haar_unitary(n, rng);
    let diag: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
    &(&u * &ComplexMatrix::from_diag(&diag)) * &u.adjoint()
}

/// `U P` with `U` Haar and `P` the projection onto a random subspace of
/// uniformly chosen rank.
pub(crate) fn partial_isometry(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let u = haar_unitary(n, rng);
    let w = haar_unitary(n, rng);
    let rank = rng.random_range(1..=n);
    let mut p = ComplexMatrix::zeros(n);
    for k in 0..rank {
        let c = w.column(k);
        p = &p + &ComplexMatrix::outer(&c, &c);
    }
    &u * &p
}

pub(crate) fn contraction(n: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    let g = gaussian_matrix(n, rng);
    let s: f64 = rng.random_range(0.05..=1.0);
    Ok(g.scale_real(s / operator_norm(&g)?))
}

pub(crate) fn wishart_density(n: usize, rng: &mut impl Rng, tol: &ToleranceConfig) -> Result<Density> {
    let g = gaussian_matrix(n, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    Density::new(w.scale_real(1.0 / tr), tol)
}

pub(crate) fn random_unit_vector(n: usize, rng: &mut impl Rng) -> RankOneProjection {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
    RankOneProjection::normalized(v).expect("nonzero Gaussian vector")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_generates_valid_samples() {
        for kind in EnsembleKind::ALL {
            for dim in [1, 2, 5, 8] {
                for seed in 0..5 {
                    generate(&EnsembleSpec { kind, dim, seed }).unwrap();
                }
            }
        }
        assert!(generate(&EnsembleSpec {
            kind: EnsembleKind::Unitary,
            dim: 0,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = EnsembleSpec {
            kind: EnsembleKind::Normal,
            dim: 4,
            seed: 9,
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = generate(&EnsembleSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn unitary_and_partial_isometry_properties() {
        let u = generate(&EnsembleSpec {
            kind: EnsembleKind::Unitary,
            dim: 6,
            seed: 3,
        })
        .unwrap();
        let m = u.matrix();
        assert!((&(&m.adjoint() * m) - &ComplexMatrix::identity(6)).max_abs() < 1e-10);
        let v = generate(&EnsembleSpec {
            kind: EnsembleKind::PartialIsometry,
            dim: 6,
            seed: 3,
        })
        .unwrap();
        assert!(is_partial_isometry(v.matrix(), 1e-10).unwrap().0);
        let d = generate(&EnsembleSpec {
            kind: EnsembleKind::Density,
            dim: 6,
            seed: 3,
        })
        .unwrap();
        assert!((d.matrix().trace().re - 1.0).abs() < 1e-12);
    }
}
