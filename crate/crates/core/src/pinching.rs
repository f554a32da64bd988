//! Pinching `E(A) = sum_i P_i A P_i` onto block-diagonal subalgebras and
//! the dispersion of diagonal entries in an orthonormal basis.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, operator_norm, trace_abs_power, ComplexMatrix};
use crate::moments::check_p;
use crate::tolerance::ToleranceConfig;

/// Disjoint index blocks covering `0..n`, taken with respect to an
/// orthonormal basis (the standard basis when none is given).
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    basis: Option<ComplexMatrix>,
}

impl Partition {
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("index {} out of range 1..={n}", i + 1)));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidPartition(format!("index {} appears twice", i + 1)));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("index {} is not covered", missing + 1)));
        }
        Ok(Self { n, blocks, basis: None })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            blocks: (0..n).map(|i| vec![i]).collect(),
            basis: None,
        }
    }

    pub fn whole(n: usize) -> Self {
        Self {
            n,
            blocks: vec![(0..n).collect()],
            basis: None,
        }
    }

    /// Parses one-based blocks such as `"1,2|3,4"`.
    pub fn parse(n: usize, spec: &str) -> Result<Self> {
        let blocks = spec
            .split('|')
            .map(|block| {
                block
                    .split(',')
                    .map(|tok| {
                        let tok = tok.trim();
                        match tok.parse::<usize>() {
                            Ok(k) if k >= 1 => Ok(k - 1),
                            _ => Err(Error::InvalidPartition(format!("`{tok}` is not a positive index"))),
                        }
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(n, blocks)
    }

    /// Rank-one blocks spanned by the given vectors. Nearly orthonormal
    /// input is repaired by Gram-Schmidt; anything worse is rejected.
    pub fn from_basis(vectors: Vec<Vec<Complex64>>, tol: &ToleranceConfig) -> Result<Self> {
        let n = vectors.len();
        if n == 0 || vectors.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidPartition("basis must consist of n vectors of length n".into()));
        }
        let u = ComplexMatrix::from_columns(&vectors);
        let residual = orthonormality_residual(&u);
        let u = if residual <= tol.orthonormal {
            u
        } else if residual <= tol.orthonormal_repair {
            ComplexMatrix::from_columns(&gram_schmidt(vectors))
        } else {
            return Err(Error::NotOrthonormal { residual });
        };
        Ok(Self {
            basis: Some(u),
            ..Self::singletons(n)
        })
    }

    /// Same blocks, taken in the given orthonormal basis (columns of `u`).
    pub fn with_basis(mut self, u: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let residual = orthonormality_residual(&u);
        if u.n() != self.n || residual > tol.orthonormal {
            return Err(Error::NotOrthonormal { residual });
        }
        self.basis = Some(u);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn basis(&self) -> Option<&ComplexMatrix> {
        self.basis.as_ref()
    }

    fn is_rank_one(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    fn to_frame(&self, a: &ComplexMatrix) -> ComplexMatrix {
        match &self.basis {
            Some(u) => &(&u.adjoint() * a) * u,
            None => a.clone(),
        }
    }

    fn back_from_frame(&self, a: ComplexMatrix) -> ComplexMatrix {
        match &self.basis {
            Some(u) => &(u * &a) * &u.adjoint(),
            None => a,
        }
    }

    fn check_dim(&self, a: &ComplexMatrix) -> Result<()> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: a.n(),
            });
        }
        Ok(())
    }
}

fn orthonormality_residual(u: &ComplexMatrix) -> f64 {
    (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.n())).max_abs()
}

fn gram_schmidt(vectors: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for _ in 0..2 {
            for q in &out {
                let proj = dot(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let len = norm(&v);
        out.push(v.into_iter().map(|z| z / len).collect());
    }
    out
}

/// `E(A) = sum_i P_i A P_i`.
pub fn conditional_expectation(a: &ComplexMatrix, part: &Partition) -> Result<ComplexMatrix> {
    part.check_dim(a)?;
    let b = part.to_frame(a);
    let mut out = ComplexMatrix::zeros(a.n());
    for block in part.blocks() {
        for &i in block {
            for &j in block {
                out[(i, j)] = b[(i, j)];
            }
        }
    }
    Ok(part.back_from_frame(out))
}

/// The same pinching as an average of unitary conjugations,
/// `(1/k) sum_j W^j A W^{-j}` with `W = sum_i w^i P_i` and `w = e^{2 pi i/k}`.
/// For two blocks this is `(A + S A S) / 2` with `S = diag(I, -I)`.
pub fn unitary_average(a: &ComplexMatrix, part: &Partition) -> Result<ComplexMatrix> {
    part.check_dim(a)?;
    let b = part.to_frame(a);
    let k = part.blocks().len();
    let n = a.n();
    let mut label = vec![0usize; n];
    for (bi, block) in part.blocks().iter().enumerate() {
        for &i in block {
            label[i] = bi;
        }
    }
    let mut sum = ComplexMatrix::zeros(n);
    for j in 0..k {
        let phase = |i: usize| {
            if k == 2 {
                Complex64::new(if (label[i] * j).is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0)
            } else {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((label[i] * j) % k) as f64 / k as f64)
            }
        };
        for r in 0..n {
            for c in 0..n {
                sum[(r, c)] += phase(r) * b[(r, c)] * phase(c).conj();
            }
        }
    }
    Ok(part.back_from_frame(sum.scale_real(1.0 / k as f64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractivityCheck {
    pub p: f64,
    /// `Tr |E(A)|^p`
    pub lhs: f64,
    /// `Tr |A|^p`
    pub rhs: f64,
    pub holds: bool,
}

pub fn pinching_contractivity_check(a: &ComplexMatrix, part: &Partition, p: f64) -> Result<ContractivityCheck> {
    check_p(p)?;
    let e = conditional_expectation(a, part)?;
    let lhs = trace_abs_power(&e, p)?;
    let rhs = trace_abs_power(a, p)?;
    Ok(ContractivityCheck {
        p,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9 * (1.0 + rhs),
    })
}

/// `((1/n) sum_i |<A e_i, e_i> - (1/n) sum_j <A e_j, e_j>|^p)^{1/p}`.
pub fn diagonal_moment(a: &ComplexMatrix, basis: &Partition, p: f64) -> Result<f64> {
    check_p(p)?;
    basis.check_dim(a)?;
    if !basis.is_rank_one() {
        return Err(Error::InvalidPartition("diagonal moments need a basis of rank-one blocks".into()));
    }
    let b = basis.to_frame(a);
    let n = a.n() as f64;
    let diag: Vec<Complex64> = basis.blocks().iter().map(|blk| b[(blk[0], blk[0])]).collect();
    let mean: Complex64 = diag.iter().sum::<Complex64>() / n;
    let scale = operator_norm(a)?.max(f64::MIN_POSITIVE);
    // scaled to keep large p finite
    let sum: f64 = diag.iter().map(|d| ((d - mean).norm() / scale).powf(p)).sum::<f64>() / n;
    Ok(scale * sum.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chebyshev_radius, spread, ChebyshevOptions};
    use crate::linalg::tests_support::{random_matrix, random_unitary};
    use crate::linalg::{eig_hermitian, HermitianMatrix};
    use crate::moments::{bernoulli_b, tracial_central_moment};
    use rand::{Rng, SeedableRng};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn random_partition(n: usize, rng: &mut impl Rng) -> Partition {
        let k = rng.random_range(1..=n);
        let mut blocks = vec![Vec::new(); k];
        for i in 0..n {
            let b = if i < k { i } else { rng.random_range(0..k) };
            blocks[b].push(i);
        }
        Partition::from_blocks(n, blocks).unwrap()
    }

    #[test]
    fn partition_validation_and_parsing() {
        let p = Partition::parse(4, "1,2|3,4").unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3]]);
        assert!(Partition::parse(4, "1,2|2,3,4").is_err());
        assert!(Partition::parse(4, "1,2|3").is_err());
        assert!(Partition::parse(4, "1,2|3,5").is_err());
        assert!(Partition::parse(2, "0|1").is_err());
        assert!(Partition::parse(2, "a|1").is_err());
    }

    #[test]
    fn basis_repair_and_rejection() {
        let u = random_unitary(3, 1);
        let mut cols: Vec<Vec<Complex64>> = (0..3).map(|j| u.column(j)).collect();
        cols[1][0] += Complex64::new(1e-8, 0.0);
        let p = Partition::from_basis(cols.clone(), &tol()).unwrap();
        assert!(orthonormality_residual(p.basis().unwrap()) < 1e-14);
        cols[1][0] += Complex64::new(1e-3, 0.0);
        assert!(matches!(Partition::from_basis(cols, &tol()), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn trivial_partitions() {
        let a = random_matrix(4, 3);
        let e = conditional_expectation(&a, &Partition::singletons(4)).unwrap();
        assert_eq!(e, ComplexMatrix::from_diag(&a.diagonal()));
        assert_eq!(conditional_expectation(&a, &Partition::whole(4)).unwrap(), a);
    }

    #[test]
    fn pinching_properties() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for seed in 0..30 {
            let n = 2 + seed as usize % 5;
            let a = random_matrix(n, seed);
            let part = random_partition(n, &mut rng);
            let part = if seed % 3 == 0 {
                part.with_basis(random_unitary(n, 100 + seed), &tol()).unwrap()
            } else {
                part
            };
            let e = conditional_expectation(&a, &part).unwrap();
            assert!((e.trace() - a.trace()).norm() < 1e-10);
            let ee = conditional_expectation(&e, &part).unwrap();
            assert!((&ee - &e).max_abs() < 1e-10);
            // module property with a block-diagonal B
            let b = conditional_expectation(&random_matrix(n, 50 + seed), &part).unwrap();
            let lhs = conditional_expectation(&(&b * &a), &part).unwrap();
            assert!((&lhs - &(&b * &e)).max_abs() < 1e-10);
            // positivity
            let g = random_matrix(n, 70 + seed);
            let psd = &g * &g.adjoint();
            let ep = conditional_expectation(&psd, &part).unwrap();
            let low = eig_hermitian(&HermitianMatrix::new(ep, &tol()).unwrap()).unwrap().values[0];
            assert!(low >= -1e-10);
            // unitary averaging reproduces the pinching exactly
            let avg = unitary_average(&a, &part).unwrap();
            assert!((&avg - &e).max_abs() < 1e-12);
        }
    }

    #[test]
    fn contractivity_examples() {
        let d = ComplexMatrix::from_real_diag(&[1.0, -2.0, 0.5]);
        let c = pinching_contractivity_check(&d, &Partition::singletons(3), 3.0).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-12 && c.holds);
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let c = pinching_contractivity_check(&nil, &Partition::singletons(2), 2.0).unwrap();
        assert!(c.lhs.abs() < 1e-15 && (c.rhs - 1.0).abs() < 1e-14 && c.holds);
    }

    #[test]
    fn contractivity_sweep() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..500u64 {
            let n = rng.random_range(1..=6);
            let a = random_matrix(n, 1000 + trial);
            let part = random_partition(n, &mut rng);
            let p = [1.0, 1.7, 2.0, 3.0, 4.0][trial as usize % 5];
            assert!(pinching_contractivity_check(&a, &part, p).unwrap().holds);
        }
    }

    #[test]
    fn diagonal_moment_examples() {
        let j = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        for p in [1.0, 2.0, 4.0] {
            assert_eq!(diagonal_moment(&j, &Partition::singletons(2), p).unwrap(), 0.0);
        }
        let d = diagonal_moment(&ComplexMatrix::from_real_diag(&[0.0, 1.0]), &Partition::singletons(2), 2.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert!(diagonal_moment(&j, &Partition::whole(2), 2.0).is_err());
    }

    #[test]
    fn diagonal_dispersion_chain() {
        let opts = ChebyshevOptions::default();
        for seed in 0..40 {
            let n = [2, 3, 4, 8][seed as usize % 4];
            let a = random_matrix(n, 300 + seed);
            let u = random_unitary(n, 400 + seed);
            let basis = Partition::from_basis((0..n).map(|j| u.column(j)).collect(), &tol()).unwrap();
            let r = chebyshev_radius(&a, &opts).unwrap().radius;
            for p in [1.0, 2.0, 3.0, 4.0] {
                let dm = diagonal_moment(&a, &basis, p).unwrap();
                let tr = tracial_central_moment(&a, p).unwrap().root;
                let bound = 2.0 * bernoulli_b(p).unwrap().root() * r;
                assert!(dm <= tr + 1e-10, "{dm} > {tr}");
                assert!(tr <= bound + 1e-8, "{tr} > {bound}");
            }
        }
    }

    #[test]
    fn dispersion_by_spread_for_normal_and_hermitian() {
        for seed in 0..30 {
            let n = [2, 4, 8][seed as usize % 3];
            let u = random_unitary(n, 500 + seed);
            let basis = Partition::from_basis((0..n).map(|j| random_unitary(n, 600 + seed).column(j)).collect(), &tol())
                .unwrap();
            let normal = &(&u * &ComplexMatrix::from_diag(&random_matrix(n, 700 + seed).diagonal())) * &u.adjoint();
            let herm = random_matrix(n, 800 + seed).hermitian_part();
            for p in [1.0, 2.0, 4.0] {
                let bp = bernoulli_b(p).unwrap().root();
                let s = spread(&normal).unwrap().value;
                assert!(diagonal_moment(&normal, &basis, p).unwrap() <= 2.0 / 3f64.sqrt() * bp * s + 1e-7);
                let s = spread(&herm).unwrap().value;
                assert!(diagonal_moment(&herm, &basis, p).unwrap() <= bp * s + 1e-7);
            }
        }
    }
}
