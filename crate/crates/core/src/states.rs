//! Spectrahedra of densities, extreme-point rank reduction and the global
//! moment maximum `mu_p(A) = max_D Tr[D |A - Tr(DA)|^p]`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::json::serialize_complex_vec;
use crate::linalg::{
    abs_power_unchecked, dot, eig_hermitian_unchecked, norm, rank_cutoff, ComplexMatrix, Density, HermitianMatrix,
    RankOneProjection,
};
use crate::moments::{central_moment_with, check_p, vector_moment_raw};
use crate::tolerance::ToleranceConfig;

/// `{X >= 0 : Tr X = 1, Tr[X B_i] = alpha_i}`.
#[derive(Debug, Clone)]
pub struct Spectrahedron {
    dim: usize,
    constraints: Vec<(HermitianMatrix, f64)>,
    witness: Option<Density>,
}

impl Spectrahedron {
    pub fn new(dim: usize, constraints: Vec<(HermitianMatrix, f64)>) -> Result<Self> {
        for (b, _) in &constraints {
            if b.n() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: b.n(),
                });
            }
        }
        Ok(Self {
            dim,
            constraints,
            witness: None,
        })
    }

    pub fn with_witness(mut self, d: Density) -> Self {
        self.witness = Some(d);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[(HermitianMatrix, f64)] {
        &self.constraints
    }

    pub fn witness(&self) -> Option<&Density> {
        self.witness.as_ref()
    }

    /// `|Tr X - 1|` followed by `|Tr[X B_i] - alpha_i|` for each constraint.
    pub fn residuals(&self, x: &ComplexMatrix) -> Vec<f64> {
        std::iter::once((x.trace().re - 1.0).abs())
            .chain(
                self.constraints
                    .iter()
                    .map(|(b, alpha)| (x.trace_product(b.as_matrix()).re - alpha).abs()),
            )
            .collect()
    }

    fn check_feasible(&self, x: &ComplexMatrix, tol: f64) -> Result<()> {
        for (i, r) in self.residuals(x).into_iter().enumerate() {
            if !(r <= tol) {
                return Err(Error::Infeasible {
                    constraint: i,
                    residual: r,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionStep {
    pub rank_before: usize,
    pub direction_norm: f64,
    pub step_length: f64,
    pub rank_after: usize,
    /// Largest constraint residual after the step.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    pub final_rank: usize,
}

/// Column factor `D = R R*` with `r` columns of length `n`.
struct Factor {
    cols: Vec<Vec<Complex64>>,
    n: usize,
}

impl Factor {
    fn from_density(d: &Density, floor: f64) -> Self {
        let eig = d.eigen();
        let cutoff = rank_cutoff(&eig.values, floor);
        let cols = (0..d.n())
            .rev()
            .filter(|&k| eig.values[k] > cutoff)
            .map(|k| {
                let s = eig.values[k].sqrt();
                eig.vectors.column(k).into_iter().map(|z| z * s).collect()
            })
            .collect();
        Self { cols, n: d.n() }
    }

    fn rank(&self) -> usize {
        self.cols.len()
    }

    fn product(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n);
        for c in &self.cols {
            for i in 0..self.n {
                for j in 0..self.n {
                    m[(i, j)] += c[i] * c[j].conj();
                }
            }
        }
        m
    }

    /// `R* B R`
    fn compress(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let r = self.rank();
        let bc: Vec<Vec<Complex64>> = self.cols.iter().map(|c| b.mul_vec(c)).collect();
        let mut out = ComplexMatrix::zeros(r);
        for j in 0..r {
            for l in 0..r {
                out[(j, l)] = dot(&bc[l], &self.cols[j]);
            }
        }
        out
    }

    /// `R <- R Y`, where `Y` is `r x r'` given by columns.
    fn mix(&self, y: &[Vec<Complex64>]) -> Self {
        let cols = y
            .iter()
            .map(|yc| {
                let mut out = vec![Complex64::new(0.0, 0.0); self.n];
                for (coef, c) in yc.iter().zip(&self.cols) {
                    for (o, ci) in out.iter_mut().zip(c) {
                        *o += coef * ci;
                    }
                }
                out
            })
            .collect();
        Self { cols, n: self.n }
    }
}

/// Real coordinates of a Hermitian `r x r` matrix in the basis
/// `E_jj`, `E_jl + E_lj`, `i(E_jl - E_lj)` (j < l), and the pairing
/// `Tr[C X]` of a Hermitian `C` with each basis element.
fn hermitian_pairing_row(c: &ComplexMatrix) -> Vec<f64> {
    let r = c.n();
    let mut row = Vec::with_capacity(r * r);
    for j in 0..r {
        row.push(c[(j, j)].re);
    }
    for j in 0..r {
        for l in j + 1..r {
            row.push(2.0 * c[(j, l)].re);
            row.push(2.0 * c[(j, l)].im);
        }
    }
    row
}

fn hermitian_from_coords(coords: &[f64], r: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(r);
    for j in 0..r {
        m[(j, j)] = Complex64::new(coords[j], 0.0);
    }
    let mut k = r;
    for j in 0..r {
        for l in j + 1..r {
            let z = Complex64::new(coords[k], coords[k + 1]);
            m[(j, l)] = z;
            m[(l, j)] = z.conj();
            k += 2;
        }
    }
    m
}

/// A unit null vector of the row space, chosen deterministically: project
/// each standard basis vector onto the orthogonal complement of the rows and
/// keep the first one with the largest residual.
fn null_vector(rows: &[Vec<f64>], dim: usize) -> Option<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for _ in 0..2 {
            for q in &basis {
                let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            basis.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for e in 0..dim {
        let mut v = vec![0.0; dim];
        v[e] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|b| len > b.0) {
            best = Some((len, v));
        }
    }
    let (len, v) = best?;
    (len > 1e-8).then(|| v.into_iter().map(|x| x / len).collect())
}

/// Moves `D` to an extreme point of the spectrahedron with rank at most
/// `floor(sqrt(k + 1))`, where `k` is the number of constraints besides the
/// trace.
///
/// Each step solves `Tr[R* B_i R Delta] = 0` (including `B_0 = I`) for a
/// Hermitian direction `Delta`, then moves along `R (I + t Delta) R*` to
/// the nearest `t` at which `I + t Delta` becomes singular.
pub fn rank_reduce(d: &Density, s: &Spectrahedron, tol: &ToleranceConfig) -> Result<(Density, ReductionTrace)> {
    if d.n() != s.dim() {
        return Err(Error::DimensionMismatch {
            left: d.n(),
            right: s.dim(),
        });
    }
    s.check_feasible(d.as_matrix(), tol.feasibility)?;
    let k = s.constraints().len();
    let identity = ComplexMatrix::identity(s.dim());
    let mut factor = Factor::from_density(d, tol.rank_floor);
    let mut steps = Vec::new();

    while factor.rank() * factor.rank() > k + 1 {
        let r = factor.rank();
        let rows: Vec<Vec<f64>> = std::iter::once(&identity)
            .chain(s.constraints().iter().map(|(b, _)| b.as_matrix()))
            .map(|b| hermitian_pairing_row(&factor.compress(b)))
            .collect();
        let coords = null_vector(&rows, r * r).ok_or(Error::NoNullDirection {
            rank: r,
            equations: k + 1,
        })?;
        let delta = hermitian_from_coords(&coords, r);
        let eig = eig_hermitian_unchecked(&delta)?;
        let (lo, hi) = (eig.values[0], eig.values[r - 1]);
        // I + t Delta loses rank at t = -1/delta_max (t < 0) or -1/delta_min (t > 0)
        let t = if hi.abs() >= lo.abs() { -1.0 / hi } else { -1.0 / lo };
        let mu: Vec<f64> = eig.values.iter().map(|l| 1.0 + t * l).collect();
        let top = mu.iter().copied().fold(0.0, f64::max);
        let drop_below = 1e-12 * top;
        let weakest = (0..r)
            .min_by(|&a, &b| mu[a].total_cmp(&mu[b]))
            .expect("rank >= 1");
        let y: Vec<Vec<Complex64>> = (0..r)
            .filter(|&j| j != weakest && mu[j] > drop_below)
            .map(|j| {
                let sq = mu[j].sqrt();
                eig.vectors.column(j).into_iter().map(|z| z * sq).collect()
            })
            .collect();
        factor = factor.mix(&y);
        let residual = s
            .residuals(&factor.product())
            .into_iter()
            .fold(0.0, f64::max);
        steps.push(ReductionStep {
            rank_before: r,
            direction_norm: delta.frobenius(),
            step_length: t.abs(),
            rank_after: factor.rank(),
            max_residual: residual,
        });
    }

    let out = Density::new(factor.product().hermitian_part(), tol)?;
    let final_rank = factor.rank();
    Ok((out, ReductionTrace { steps, final_rank }))
}

/// The spectrahedron pinning `Tr[X |A_r - alpha|^p]` and `Re Tr[X A_r]`,
/// where `A_r = e^{i theta} A` is rotated so that `alpha = Tr[D A_r] >= 0`.
#[derive(Debug, Clone)]
pub struct MomentSpectrahedron {
    pub spectrahedron: Spectrahedron,
    pub rotated: ComplexMatrix,
    pub theta: f64,
    pub alpha: f64,
}

pub fn build_moment_spectrahedron(d: &Density, a: &ComplexMatrix, p: f64) -> Result<MomentSpectrahedron> {
    check_p(p)?;
    if d.n() != a.n() {
        return Err(Error::DimensionMismatch {
            left: d.n(),
            right: a.n(),
        });
    }
    let mean = d.expectation(a);
    let theta = if mean.norm() < 1e-14 { 0.0 } else { -mean.arg() };
    let rotated = a.scale(Complex64::from_polar(1.0, theta));
    let alpha = if theta == 0.0 { mean.re } else { mean.norm() };
    let b1 = HermitianMatrix::from_trusted(abs_power_unchecked(&rotated.shift(Complex64::new(alpha, 0.0)), p)?);
    let alpha1 = d.expectation(b1.as_matrix()).re;
    let b2 = HermitianMatrix::from_trusted(rotated.hermitian_part());
    let spectrahedron = Spectrahedron::new(d.n(), vec![(b1, alpha1), (b2, alpha)])?.with_witness(d.clone());
    Ok(MomentSpectrahedron {
        spectrahedron,
        rotated,
        theta,
        alpha,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReduction {
    #[serde(serialize_with = "vector_ser")]
    pub projection: RankOneProjection,
    pub theta: f64,
    pub alpha: f64,
    /// Trace residual, then one residual per spectrahedron constraint.
    pub residuals: Vec<f64>,
    pub trace: ReductionTrace,
    pub moment_input: f64,
    pub moment_projection: f64,
    /// Whether the two full central moments agree within 1e-6. Only the
    /// real part of the mean is pinned, so this can legitimately fail.
    pub moment_matches: bool,
}

fn vector_ser<S: serde::Serializer>(x: &RankOneProjection, s: S) -> std::result::Result<S::Ok, S::Error> {
    serialize_complex_vec(x.vector(), s)
}

/// Rank-one projection `P = x x*` in the moment spectrahedron of `(D, A, p)`.
pub fn reduce_to_projection(
    d: &Density,
    a: &ComplexMatrix,
    p: f64,
    tol: &ToleranceConfig,
) -> Result<ProjectionReduction> {
    let ms = build_moment_spectrahedron(d, a, p)?;
    let (reduced, trace) = rank_reduce(d, &ms.spectrahedron, tol)?;
    let eig = reduced.eigen();
    let n = d.n();
    let projection = RankOneProjection::normalized(eig.vectors.column(n - 1))?;
    let residuals = ms.spectrahedron.residuals(&projection.matrix());
    let moment_input = central_moment_with(d, a, p, tol)?.raw;
    let moment_projection = central_moment_with(&projection.to_density(), a, p, tol)?.raw;
    Ok(ProjectionReduction {
        projection,
        theta: ms.theta,
        alpha: ms.alpha,
        residuals,
        trace,
        moment_input,
        moment_projection,
        moment_matches: (moment_input - moment_projection).abs() <= 1e-6 * (1.0 + moment_input.abs()),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct MuOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// A run stops once a step gains less than this.
    pub improvement: f64,
}

impl Default for MuOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            max_iterations: 4000,
            improvement: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MuResult {
    pub p: f64,
    pub value: f64,
    #[serde(serialize_with = "vector_ser")]
    pub argmax: RankOneProjection,
    pub restarts: usize,
    pub best_restart: usize,
}

/// Objective `f(x) = <x, |A - <x, A x>|^p x>` with an ascent direction.
struct MomentObjective<'a> {
    a: &'a ComplexMatrix,
    adj: ComplexMatrix,
    p: f64,
}

impl MomentObjective<'_> {
    fn even_power(&self) -> Option<usize> {
        let half = self.p / 2.0;
        (half.fract() == 0.0 && half <= 16.0).then_some(half as usize)
    }

    fn mean(&self, x: &[Complex64]) -> Complex64 {
        dot(&self.a.mul_vec(x), x)
    }

    /// `H v` with `H = (A - m)^*(A - m)`.
    fn apply_h(&self, m: Complex64, v: &[Complex64]) -> Vec<Complex64> {
        let bv: Vec<Complex64> = self.a.mul_vec(v).iter().zip(v).map(|(y, x)| y - m * x).collect();
        self.adj.mul_vec(&bv).iter().zip(&bv).map(|(y, x)| y - m.conj() * x).collect()
    }

    fn value(&self, x: &[Complex64]) -> f64 {
        let m = self.mean(x);
        match self.even_power() {
            Some(k) => {
                let mut v = x.to_vec();
                for _ in 0..k {
                    v = self.apply_h(m, &v);
                }
                dot(&v, x).re
            }
            None => vector_moment_raw(x, self.a, m, self.p).unwrap_or(f64::NEG_INFINITY),
        }
    }

    /// Wirtinger gradient `df/d conj(x)` (up to a positive factor).
    fn gradient(&self, x: &[Complex64]) -> Vec<Complex64> {
        let m = self.mean(x);
        let (gx, c2) = match self.even_power() {
            Some(k) => {
                let mut powers = vec![x.to_vec()];
                for _ in 0..k {
                    let next = self.apply_h(m, powers.last().expect("nonempty"));
                    powers.push(next);
                }
                // Tr[S (A - m)] with S = sum_j H^{k-1-j} x x* H^j
                let mut c2 = Complex64::new(0.0, 0.0);
                for j in 0..k {
                    let u = &powers[k - 1 - j];
                    let bu: Vec<Complex64> = self.a.mul_vec(u).iter().zip(u).map(|(y, x)| y - m * x).collect();
                    c2 += dot(&bu, &powers[j]);
                }
                (powers.pop().expect("nonempty"), c2)
            }
            None => match self.spectral_gradient_parts(x, m) {
                Some(parts) => parts,
                None => return self.finite_difference_gradient(x),
            },
        };
        let ax = self.a.mul_vec(x);
        let ahx = self.adj.mul_vec(x);
        gx.iter()
            .zip(ax.iter().zip(&ahx))
            .map(|(g, (u, w))| g - c2.conj() * u - c2 * w)
            .collect()
    }

    /// `(g(H) x, Tr[S (A - m)])` by the Daleckii-Krein formula, or `None`
    /// when `g(s) = s^{p/2}` is not differentiable at the spectrum.
    fn spectral_gradient_parts(&self, x: &[Complex64], m: Complex64) -> Option<(Vec<Complex64>, Complex64)> {
        let b = self.a.shift(m);
        let h = &b.adjoint() * &b;
        let eig = eig_hermitian_unchecked(&h).ok()?;
        let n = x.len();
        let scale = eig.values.last().copied().unwrap_or(0.0).max(1e-300);
        let half = 0.5 * self.p;
        if self.p < 2.0 && eig.values[0] <= 1e-10 * scale {
            return None;
        }
        let s: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
        let g: Vec<f64> = s.iter().map(|v| v.powf(half)).collect();
        let w = &eig.vectors;
        let wh = w.adjoint();
        let y = wh.mul_vec(x);
        let mut inner = ComplexMatrix::zeros(n);
        for j in 0..n {
            for l in 0..n {
                let dd = if (s[j] - s[l]).abs() > 1e-9 * scale {
                    (g[j] - g[l]) / (s[j] - s[l])
                } else {
                    let mid = 0.5 * (s[j] + s[l]);
                    half * mid.powf(half - 1.0)
                };
                inner[(j, l)] = y[j] * y[l].conj() * dd;
            }
        }
        let sm = &(w * &inner) * &wh;
        let c2 = sm.trace_product(&b);
        let gy: Vec<Complex64> = y.iter().zip(&g).map(|(v, gv)| v * gv).collect();
        Some((w.mul_vec(&gy), c2))
    }

    fn finite_difference_gradient(&self, x: &[Complex64]) -> Vec<Complex64> {
        const H: f64 = 1e-6;
        let eval = |v: &[Complex64]| {
            let len = norm(v);
            let u: Vec<Complex64> = v.iter().map(|z| z / len).collect();
            self.value(&u)
        };
        (0..x.len())
            .map(|k| {
                let mut parts = [0.0; 2];
                for (slot, dir) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)].into_iter().enumerate() {
                    let mut plus = x.to_vec();
                    let mut minus = x.to_vec();
                    plus[k] += dir * H;
                    minus[k] -= dir * H;
                    parts[slot] = (eval(&plus) - eval(&minus)) / (2.0 * H);
                }
                0.5 * Complex64::new(parts[0], parts[1])
            })
            .collect()
    }
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let len = norm(&v);
    v.into_iter().map(|z| z / len).collect()
}

/// Riemannian ascent on the unit sphere with a backtracking and expanding
/// step rule.
fn ascend(obj: &MomentObjective, start: Vec<Complex64>, opts: &MuOptions) -> (Vec<Complex64>, f64) {
    let mut x = normalized(start);
    let mut fx = obj.value(&x);
    let mut step = 0.1;
    for _ in 0..opts.max_iterations {
        let g = obj.gradient(&x);
        let radial = dot(&g, &x).re;
        let d: Vec<Complex64> = g.iter().zip(&x).map(|(gi, xi)| gi - xi * radial).collect();
        let dn = norm(&d);
        if !(dn > 1e-15) {
            break;
        }
        let d: Vec<Complex64> = d.into_iter().map(|z| z / dn).collect();
        let trial = |t: f64| {
            let y = normalized(x.iter().zip(&d).map(|(xi, di)| xi + di * t).collect());
            let fy = obj.value(&y);
            (y, fy)
        };
        let (mut y, mut fy) = trial(step);
        if fy > fx {
            // expand while it keeps paying off
            for _ in 0..30 {
                let (y2, f2) = trial(step * 2.0);
                if f2 > fy {
                    step *= 2.0;
                    y = y2;
                    fy = f2;
                } else {
                    break;
                }
            }
        } else {
            let mut found = false;
            for _ in 0..60 {
                step *= 0.5;
                let (y2, f2) = trial(step);
                if f2 > fx {
                    y = y2;
                    fy = f2;
                    found = true;
                    break;
                }
            }
            if !found {
                break;
            }
        }
        let gain = fy - fx;
        x = y;
        fx = fy;
        if gain < opts.improvement {
            break;
        }
    }
    (x, fx)
}

/// `mu_p(A) = max_x <x, |A - <x, A x>|^p x>` over unit vectors, which by the
/// rank-one reduction equals the maximum over all densities.
pub fn mu_p(a: &ComplexMatrix, p: f64, opts: &MuOptions) -> Result<MuResult> {
    check_p(p)?;
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let n = a.n();
    let obj = MomentObjective {
        a,
        adj: a.adjoint(),
        p,
    };
    let mut best: Option<(usize, Vec<Complex64>, f64)> = None;
    for restart in 0..opts.restarts {
        let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
        rng.set_stream(restart as u64);
        let start: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let (x, fx) = ascend(&obj, start, opts);
        if best.as_ref().is_none_or(|b| fx > b.2) {
            best = Some((restart, x, fx));
        }
    }
    let (best_restart, x, value) = best.expect("restarts >= 1");
    Ok(MuResult {
        p,
        value: value.max(0.0),
        argmax: RankOneProjection::normalized(x)?,
        restarts: opts.restarts,
        best_restart,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chebyshev_radius, ChebyshevOptions};
    use crate::linalg::tests_support::{random_matrix, random_unitary};
    use crate::moments::vector_central_moment;
    use crate::optimize::{nelder_mead, NelderMeadOptions};
    use std::f64::consts::PI;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn random_density(n: usize, rank: usize, seed: u64) -> Density {
        let g = random_matrix(n, seed);
        let mut w = ComplexMatrix::zeros(n);
        for k in 0..rank {
            let c = g.column(k);
            w = &w + &ComplexMatrix::outer(&c, &c);
        }
        let tr = w.trace().re;
        Density::new(w.scale_real(1.0 / tr), &tol()).unwrap()
    }

    fn jordan() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap()
    }

    fn example_v() -> ComplexMatrix {
        let s = 1.0 / 3f64.sqrt();
        ComplexMatrix::from_real_rows(&[
            &[s, s, s, 0.0],
            &[s, -0.5 * s, -0.5 * s, s],
            &[s, -0.5 * s, -0.5 * s, -s],
            &[0.0, 0.0, 0.0, s],
        ])
        .unwrap()
    }

    fn bloch_vector(x: &[Complex64]) -> [f64; 3] {
        let rho01 = x[0] * x[1].conj();
        [2.0 * rho01.re, -2.0 * rho01.im, x[0].norm_sqr() - x[1].norm_sqr()]
    }

    fn bloch_point(theta: f64, phi: f64) -> Vec<Complex64> {
        vec![
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ]
    }

    #[test]
    fn null_vector_is_orthogonal() {
        let rows = vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0]];
        let v = null_vector(&rows, 4).unwrap();
        for r in &rows {
            assert!(r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-14);
        }
        assert!(null_vector(&[vec![1.0]], 1).is_none());
    }

    #[test]
    fn hermitian_coordinates_pair_with_trace() {
        let c = random_matrix(3, 1).hermitian_part();
        let x = random_matrix(3, 2).hermitian_part();
        let row = hermitian_pairing_row(&c);
        // coordinates of x in the basis
        let mut coords = vec![x[(0, 0)].re, x[(1, 1)].re, x[(2, 2)].re];
        for j in 0..3 {
            for l in j + 1..3 {
                coords.push(x[(j, l)].re);
                coords.push(x[(j, l)].im);
            }
        }
        let back = hermitian_from_coords(&coords, 3);
        assert!((&back - &x).max_abs() < 1e-15);
        let paired: f64 = row.iter().zip(&coords).map(|(a, b)| a * b).sum();
        assert!((paired - c.trace_product(&x).re).abs() < 1e-12);
    }

    #[test]
    fn rank_one_input_is_unchanged() {
        let x = RankOneProjection::normalized(random_matrix(3, 4).column(0)).unwrap();
        let d = x.to_density();
        let ms = build_moment_spectrahedron(&d, &random_matrix(3, 5), 4.0).unwrap();
        let (out, trace) = rank_reduce(&d, &ms.spectrahedron, &tol()).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(trace.final_rank, 1);
        assert!((out.as_matrix() - d.as_matrix()).max_abs() < 1e-14);
        let red = reduce_to_projection(&d, &random_matrix(3, 5), 4.0, &tol()).unwrap();
        assert!(dot(red.projection.vector(), x.vector()).norm() > 1.0 - 1e-12);
    }

    #[test]
    fn phase_rotation_conventions() {
        let d = Density::maximally_mixed(2);
        let a = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let ms = build_moment_spectrahedron(&d, &a, 2.0).unwrap();
        assert_eq!(ms.theta, 0.0);
        assert_eq!(ms.alpha, 0.0);
        let h = random_matrix(3, 3).hermitian_part();
        let ms = build_moment_spectrahedron(&Density::maximally_mixed(3), &h, 2.0).unwrap();
        let tr = h.trace().re / 3.0;
        assert!((ms.alpha - tr.abs()).abs() < 1e-14);
        assert!(ms.theta == 0.0 || (ms.theta.abs() - PI).abs() < 1e-14);
        for seed in 0..5 {
            let a = random_matrix(4, seed);
            let d = random_density(4, 4, 10 + seed);
            let ms = build_moment_spectrahedron(&d, &a, 3.0).unwrap();
            assert!(ms.alpha >= 0.0);
            let m = d.expectation(&ms.rotated);
            assert!(m.im.abs() < 1e-14 && (m.re - ms.alpha).abs() < 1e-14);
            let res = ms.spectrahedron.residuals(d.as_matrix());
            assert!(res.iter().all(|&r| r <= 1e-10), "{res:?}");
        }
    }

    #[test]
    fn reduction_reaches_rank_bound_and_keeps_constraints() {
        for seed in 0..30 {
            let n = 2 + seed as usize % 7;
            let a = random_matrix(n, 300 + seed);
            let d = random_density(n, n, 400 + seed);
            let p = [1.0, 2.0, 4.0][seed as usize % 3];
            let ms = build_moment_spectrahedron(&d, &a, p).unwrap();
            let (out, trace) = rank_reduce(&d, &ms.spectrahedron, &tol()).unwrap();
            assert_eq!(trace.final_rank, 1);
            assert_eq!(out.rank(tol().rank_floor), 1);
            for w in trace.steps.windows(2) {
                assert!(w[1].rank_before < w[0].rank_before);
            }
            for s in &trace.steps {
                assert!(s.rank_after < s.rank_before);
                assert!(s.max_residual <= 1e-8, "{s:?}");
            }
            let res = ms.spectrahedron.residuals(out.as_matrix());
            assert!(res.iter().all(|&r| r <= 1e-8), "{res:?}");
        }
    }

    #[test]
    fn more_constraints_leave_higher_rank() {
        // k = 8 constraints allow rank 3
        let n = 6;
        let d = random_density(n, n, 5);
        let constraints = (0..8)
            .map(|k| {
                let b = HermitianMatrix::from_trusted(random_matrix(n, 40 + k).hermitian_part());
                let alpha = d.expectation(b.as_matrix()).re;
                (b, alpha)
            })
            .collect();
        let s = Spectrahedron::new(n, constraints).unwrap();
        let (out, trace) = rank_reduce(&d, &s, &tol()).unwrap();
        assert!(trace.final_rank <= 3);
        assert!(trace.final_rank * trace.final_rank <= 9);
        assert!(s.residuals(out.as_matrix()).iter().all(|&r| r <= 1e-8));
    }

    #[test]
    fn infeasible_input_is_rejected() {
        let d = Density::maximally_mixed(2);
        let b = HermitianMatrix::from_trusted(ComplexMatrix::from_real_diag(&[1.0, 0.0]));
        let s = Spectrahedron::new(2, vec![(b, 0.9)]).unwrap();
        assert!(matches!(rank_reduce(&d, &s, &tol()), Err(Error::Infeasible { constraint: 1, .. })));
    }

    /// Endpoints of the feasible chord `{r : |r| <= 1, <b_i, r> = c_i}` of
    /// the Bloch ball, found by dense sampling along the chord and bisection.
    fn bloch_chord_endpoints(s: &Spectrahedron) -> Vec<[f64; 3]> {
        let coeffs: Vec<([f64; 3], f64)> = s
            .constraints()
            .iter()
            .map(|(b, alpha)| {
                let m = b.as_matrix();
                let bv = [m[(0, 1)].re, -m[(0, 1)].im, 0.5 * (m[(0, 0)].re - m[(1, 1)].re)];
                // Tr[rho B] = Tr B / 2 + <bv, r>
                (bv, alpha - 0.5 * m.trace().re)
            })
            .collect();
        let (b1, c1) = coeffs[0];
        let (b2, c2) = coeffs[1];
        let cross = [
            b1[1] * b2[2] - b1[2] * b2[1],
            b1[2] * b2[0] - b1[0] * b2[2],
            b1[0] * b2[1] - b1[1] * b2[0],
        ];
        // point on the line: least-norm solution of the 2x2 system in span{b1, b2}
        let g11: f64 = b1.iter().map(|x| x * x).sum();
        let g22: f64 = b2.iter().map(|x| x * x).sum();
        let g12: f64 = b1.iter().zip(&b2).map(|(x, y)| x * y).sum();
        let det = g11 * g22 - g12 * g12;
        let u = (c1 * g22 - c2 * g12) / det;
        let v = (c2 * g11 - c1 * g12) / det;
        let r0: Vec<f64> = (0..3).map(|i| u * b1[i] + v * b2[i]).collect();
        let at = |t: f64| -> [f64; 3] { [r0[0] + t * cross[0], r0[1] + t * cross[1], r0[2] + t * cross[2]] };
        let len = |r: [f64; 3]| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let cn = len(cross);
        let span = 4.0 / cn;
        let samples = 20_000;
        let mut ends = Vec::new();
        let mut prev = (-span, len(at(-span)) <= 1.0);
        for k in 1..=samples {
            let t = -span + 2.0 * span * k as f64 / samples as f64;
            let inside = len(at(t)) <= 1.0;
            if inside != prev.1 {
                let (mut lo, mut hi) = (prev.0, t);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if (len(at(mid)) <= 1.0) == prev.1 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                ends.push(at(0.5 * (lo + hi)));
            }
            prev = (t, inside);
        }
        ends
    }

    #[test]
    fn two_dimensional_reduction_hits_chord_endpoint() {
        for seed in 0..20 {
            let d = if seed % 2 == 0 {
                Density::maximally_mixed(2)
            } else {
                random_density(2, 2, 900 + seed)
            };
            let constraints: Vec<(HermitianMatrix, f64)> = (0..2)
                .map(|k| {
                    let b = HermitianMatrix::from_trusted(random_matrix(2, 800 + 2 * seed + k).hermitian_part());
                    let alpha = d.expectation(b.as_matrix()).re;
                    (b, alpha)
                })
                .collect();
            let s = Spectrahedron::new(2, constraints).unwrap();
            let (out, trace) = rank_reduce(&d, &s, &tol()).unwrap();
            assert_eq!(trace.final_rank, 1);
            let x = out.eigen().vectors.column(1);
            let r = bloch_vector(&x);
            let ends = bloch_chord_endpoints(&s);
            assert_eq!(ends.len(), 2);
            let best = ends
                .iter()
                .map(|e| ((e[0] - r[0]).powi(2) + (e[1] - r[1]).powi(2) + (e[2] - r[2]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-6, "seed {seed}: distance {best}");
        }
    }

    #[test]
    fn projection_for_diagonal_example() {
        let d = Density::maximally_mixed(2);
        let a = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let red = reduce_to_projection(&d, &a, 2.0, &tol()).unwrap();
        let pm = red.projection.matrix();
        assert!((pm[(1, 1)].re - 0.5).abs() < 1e-8);
        assert!(red.residuals.iter().all(|&r| r < 1e-8));
        assert!((red.moment_projection - 0.25).abs() < 1e-8);
    }

    #[test]
    fn projection_for_partial_isometry_example() {
        let red = reduce_to_projection(&Density::maximally_mixed(4), &example_v(), 4.0, &tol()).unwrap();
        assert!(red.residuals.iter().all(|&r| r < 1e-8), "{:?}", red.residuals);
        assert_eq!(red.trace.final_rank, 1);
    }

    #[test]
    fn mu_of_simple_matrices() {
        let opts = MuOptions {
            restarts: 16,
            ..Default::default()
        };
        let r = mu_p(&jordan(), 4.0, &MuOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        let r = mu_p(&ComplexMatrix::identity(3).scale(Complex64::new(0.0, 2.0)), 4.0, &opts).unwrap();
        assert!(r.value.abs() < 1e-20);
        let r = mu_p(&ComplexMatrix::from_real_diag(&[1.0, -1.0]), 4.0, &opts).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-8, "{}", r.value);
        let v = vector_central_moment(&r.argmax, &ComplexMatrix::from_real_diag(&[1.0, -1.0]), 4.0).unwrap();
        assert!((v.raw - r.value).abs() < 1e-12);
        assert!(mu_p(&jordan(), 4.0, &MuOptions { restarts: 0, ..opts }).is_err());
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..6 {
            let a = random_matrix(3, 70 + seed);
            for p in [1.5, 2.0, 3.0, 4.0] {
                let obj = MomentObjective {
                    a: &a,
                    adj: a.adjoint(),
                    p,
                };
                let x = normalized(random_matrix(3, 90 + seed).column(0));
                let g = obj.gradient(&x);
                let fd = obj.finite_difference_gradient(&x);
                let radial = |v: &[Complex64]| -> Vec<Complex64> {
                    let r = dot(v, &x).re;
                    v.iter().zip(&x).map(|(vi, xi)| vi - xi * r).collect()
                };
                let (g, fd) = (radial(&g), radial(&fd));
                let diff: Vec<Complex64> = g.iter().zip(&fd).map(|(u, v)| u - v).collect();
                assert!(norm(&diff) < 1e-5 * (1.0 + norm(&fd)), "p={p}: {:?} vs {:?}", g, fd);
            }
        }
    }

    fn bloch_grid_max(a: &ComplexMatrix, p: f64) -> f64 {
        let obj = |theta: f64, phi: f64| {
            let x = RankOneProjection::normalized(bloch_point(theta, phi)).unwrap();
            vector_central_moment(&x, a, p).unwrap().raw
        };
        let steps = 100;
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for i in 0..=steps {
            for j in 0..steps {
                let theta = PI * i as f64 / steps as f64;
                let phi = 2.0 * PI * j as f64 / steps as f64;
                let v = obj(theta, phi);
                if v > best.2 {
                    best = (theta, phi, v);
                }
            }
        }
        let m = nelder_mead(
            &mut |z: &[f64]| -obj(z[0], z[1]),
            &[best.0, best.1],
            &NelderMeadOptions {
                initial_step: 0.05,
                ..Default::default()
            },
        );
        (-m.value).max(best.2)
    }

    #[test]
    fn mu_matches_bloch_sphere_oracle() {
        let opts = MuOptions::default();
        for seed in 0..8 {
            let a = random_matrix(2, 500 + seed);
            for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
                let mu = mu_p(&a, p, &opts).unwrap().value;
                let oracle = bloch_grid_max(&a, p);
                assert!((mu - oracle).abs() < 1e-6 * (1.0 + oracle), "seed {seed} p={p}: {mu} vs {oracle}");
            }
        }
    }

    #[test]
    fn mu_two_is_squared_chebyshev_radius() {
        for seed in 0..10 {
            let n = [2, 4][seed as usize % 2];
            let a = random_matrix(n, 600 + seed);
            let mu = mu_p(&a, 2.0, &MuOptions::default()).unwrap().value;
            let r = chebyshev_radius(&a, &ChebyshevOptions::default()).unwrap().radius;
            assert!((mu - r * r).abs() < 1e-6, "{mu} vs {}", r * r);
        }
    }

    #[test]
    fn mu_four_respects_radius_bound() {
        for seed in 0..6 {
            let u = random_unitary(3, seed);
            let a = &(&u * &random_matrix(3, 700 + seed)) * &u.adjoint();
            let mu = mu_p(&a, 4.0, &MuOptions::default()).unwrap().value;
            let r = chebyshev_radius(&a, &ChebyshevOptions::default()).unwrap().radius;
            assert!(mu <= 4.0 / 3.0 * r.powi(4) + 1e-8);
        }
    }
}
