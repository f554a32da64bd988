//! Spectral geometry: spread, smallest enclosing circle, Chebyshev radius
//! `min_lambda |A - lambda I|` and Jung's planar inequality.
//!
//! For normal `A` the Chebyshev radius equals the radius of the smallest
//! disk containing the spectrum. Stampfli's identity
//! `2 min_lambda |A - lambda I| = max_{|X| = 1} |AX - XA|` is not computed here.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::json::serialize_complex;
use crate::linalg::{eig_general, eigvals_hermitian_unchecked, ComplexMatrix};
use crate::optimize::{nelder_mead, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Circle {
    #[serde(serialize_with = "serialize_complex")]
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    fn from_point(p: Complex64) -> Self {
        Self { center: p, radius: 0.0 }
    }

    fn from_diameter(a: Complex64, b: Complex64) -> Self {
        Self {
            center: (a + b) * 0.5,
            radius: (a - b).norm() * 0.5,
        }
    }

    /// Circumcircle, or `None` when the points are (numerically) collinear.
    fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> Option<Self> {
        let ab = b - a;
        let ac = c - a;
        let d = 2.0 * (ab.re * ac.im - ab.im * ac.re);
        let scale = ab.norm_sqr().max(ac.norm_sqr());
        if d.abs() <= 1e-14 * scale {
            return None;
        }
        let ux = (ac.im * ab.norm_sqr() - ab.im * ac.norm_sqr()) / d;
        let uy = (ab.re * ac.norm_sqr() - ac.re * ab.norm_sqr()) / d;
        let offset = Complex64::new(ux, uy);
        Some(Self {
            center: a + offset,
            radius: offset.norm(),
        })
    }

    pub fn contains(&self, p: Complex64, slack: f64) -> bool {
        (p - self.center).norm() <= self.radius + slack
    }
}

fn containment_slack(r: f64) -> f64 {
    1e-14 * (1.0 + r)
}

fn circle_with_two(points: &[Complex64], a: Complex64, b: Complex64) -> Circle {
    let mut c = Circle::from_diameter(a, b);
    for (k, &q) in points.iter().enumerate() {
        if !c.contains(q, containment_slack(c.radius)) {
            c = match Circle::circumcircle(a, b, q) {
                Some(cc) => cc,
                None => {
                    // collinear: the widest pair among {a, b, q} and the prefix
                    let mut widest = Circle::from_diameter(a, b);
                    for cand in [Circle::from_diameter(a, q), Circle::from_diameter(b, q)] {
                        if cand.radius > widest.radius {
                            widest = cand;
                        }
                    }
                    let _ = k;
                    widest
                }
            };
        }
    }
    c
}

/// Smallest enclosing circle (Welzl, iterative move-to-front form) with the
/// point order shuffled by a ChaCha20 stream keyed by `seed`.
pub fn smallest_enclosing_circle_seeded(points: &[Complex64], seed: u64) -> Result<Circle> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("enclosing circle of an empty set".into()));
    }
    if points.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidArgument("points must be finite".into()));
    }
    let mut pts = points.to_vec();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    pts.shuffle(&mut rng);

    let mut c = Circle::from_point(pts[0]);
    for i in 1..pts.len() {
        if c.contains(pts[i], containment_slack(c.radius)) {
            continue;
        }
        c = Circle::from_point(pts[i]);
        for j in 0..i {
            if c.contains(pts[j], containment_slack(c.radius)) {
                continue;
            }
            c = circle_with_two(&pts[..j], pts[i], pts[j]);
        }
    }
    Ok(c)
}

pub fn smallest_enclosing_circle(points: &[Complex64]) -> Result<Circle> {
    smallest_enclosing_circle_seeded(points, 0)
}

/// Largest pairwise distance and a pair attaining it.
pub fn diameter(points: &[Complex64]) -> (f64, (Complex64, Complex64)) {
    let mut best = (0.0, (points[0], points[0]));
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            let d = (a - b).norm();
            if d > best.0 {
                best = (d, (a, b));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadResult {
    pub value: f64,
    #[serde(serialize_with = "crate::json::serialize_complex_pair")]
    pub witness: (Complex64, Complex64),
}

/// `spd(A) = max_{i,j} |lambda_i - lambda_j|` over the QR-iteration eigenvalues.
pub fn spread(a: &ComplexMatrix) -> Result<SpreadResult> {
    let eigs = eig_general(a)?;
    let (value, witness) = diameter(&eigs);
    Ok(SpreadResult { value, witness })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JungCheck {
    pub radius: f64,
    pub diameter: f64,
    pub holds: bool,
}

/// Checks `r <= d / sqrt(3)` for a planar point set.
pub fn jung_check(points: &[Complex64]) -> Result<JungCheck> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("Jung's inequality needs at least two points".into()));
    }
    let radius = smallest_enclosing_circle(points)?.radius;
    let (d, _) = diameter(points);
    Ok(JungCheck {
        radius,
        diameter: d,
        holds: radius <= d / 3f64.sqrt() + 1e-10,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ChebyshevOptions {
    /// Restart Nelder-Mead from the best point until the gain drops below
    /// this (relative to the radius).
    pub improvement: f64,
    pub max_restarts: usize,
}

impl Default for ChebyshevOptions {
    fn default() -> Self {
        Self {
            improvement: 1e-10,
            max_restarts: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevRadius {
    #[serde(serialize_with = "serialize_complex")]
    pub lambda_star: Complex64,
    pub radius: f64,
}

/// `sigma_1(A - lambda I)`.
pub(crate) fn shifted_norm(a: &ComplexMatrix, gram: &ComplexMatrix, lambda: Complex64) -> f64 {
    let n = a.n();
    if n == 1 {
        return (a[(0, 0)] - lambda).norm();
    }
    // (A - l)^*(A - l) = A*A - l A* - conj(l) A + |l|^2 I
    let mut h = gram.clone();
    let ln = lambda.norm_sqr();
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] -= lambda * a[(j, i)].conj() + lambda.conj() * a[(i, j)];
        }
        h[(i, i)] += ln;
    }
    match eigvals_hermitian_unchecked(&h) {
        Ok(v) => v.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => f64::INFINITY,
    }
}

/// `Delta(A) = min_lambda |A - lambda I|` by Nelder-Mead over the plane,
/// started from the center of the spectrum's enclosing circle, from
/// `Tr A / n` and from the origin. `sigma_1(A - lambda I)` is convex in
/// `lambda`, so every local minimum is global.
pub fn chebyshev_radius(a: &ComplexMatrix, opts: &ChebyshevOptions) -> Result<ChebyshevRadius> {
    let n = a.n();
    let gram = &a.adjoint() * a;
    let mean = a.trace() / n as f64;
    let mut starts = Vec::with_capacity(3);
    if let Ok(eigs) = eig_general(a) {
        if let Ok(c) = smallest_enclosing_circle(&eigs) {
            starts.push(c.center);
        }
    }
    starts.push(mean);
    starts.push(Complex64::new(0.0, 0.0));

    let mut objective = |x: &[f64]| shifted_norm(a, &gram, Complex64::new(x[0], x[1]));
    let scale = objective(&[mean.re, mean.im]).max(f64::MIN_POSITIVE);
    if scale <= 1e-300 {
        return Ok(ChebyshevRadius {
            lambda_star: mean,
            radius: 0.0,
        });
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let mut point = vec![start.re, start.im];
        let mut value = objective(&point);
        let mut step = 0.25 * scale;
        for _ in 0..opts.max_restarts {
            let m = nelder_mead(
                &mut objective,
                &point,
                &NelderMeadOptions {
                    initial_step: step,
                    min_diameter: 1e-14 * (scale + point[0].abs() + point[1].abs()),
                    value_spread: 0.0,
                    max_evaluations: 600,
                },
            );
            let gain = value - m.value;
            if m.value < value {
                point = m.point;
                value = m.value;
            }
            if gain <= opts.improvement * scale {
                break;
            }
            step = (step * 0.1).max(1e-9 * scale);
        }
        if best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((point, value));
        }
    }
    let (point, radius) = best.expect("at least one start");
    Ok(ChebyshevRadius {
        lambda_star: Complex64::new(point[0], point[1]),
        radius,
    })
}
