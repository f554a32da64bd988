//! Central moments `Tr[D |A - Tr(DA)|^p]`, their tracial versions and the
//! Bernoulli constants `b_p`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{chebyshev_radius, ChebyshevOptions, ChebyshevRadius};
use crate::json::serialize_complex;
use crate::linalg::{abs_power_unchecked, dot, eig_hermitian_unchecked, svd, ComplexMatrix, Density, RankOneProjection};
use crate::optimize::golden_section_max;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub p: f64,
    /// `Tr[D |A - mean|^p]`
    pub raw: f64,
    /// `raw^(1/p)`
    pub root: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub mean: Complex64,
}

impl MomentValue {
    fn new(p: f64, raw: f64, mean: Complex64, tol: &ToleranceConfig) -> Result<Self> {
        let raw = clamp_moment(raw, tol)?;
        Ok(Self {
            p,
            raw,
            root: raw.powf(1.0 / p),
            mean,
        })
    }
}

fn clamp_moment(raw: f64, tol: &ToleranceConfig) -> Result<f64> {
    if raw.is_nan() {
        return Err(Error::NegativeMoment { value: raw });
    }
    if raw < 0.0 {
        if raw < -tol.moment_clamp {
            return Err(Error::NegativeMoment { value: raw });
        }
        return Ok(0.0);
    }
    Ok(raw)
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent {
            p,
            reason: "expected finite p >= 1",
        });
    }
    Ok(())
}

fn check_dims(d: usize, a: usize) -> Result<()> {
    if d != a {
        return Err(Error::DimensionMismatch { left: d, right: a });
    }
    Ok(())
}

pub fn central_moment(d: &Density, a: &ComplexMatrix, p: f64) -> Result<MomentValue> {
    central_moment_with(d, a, p, &ToleranceConfig::default())
}

pub fn central_moment_with(d: &Density, a: &ComplexMatrix, p: f64, tol: &ToleranceConfig) -> Result<MomentValue> {
    check_p(p)?;
    check_dims(d.n(), a.n())?;
    let mean = d.expectation(a);
    let power = abs_power_unchecked(&a.shift(mean), p)?;
    MomentValue::new(p, d.as_matrix().trace_product(&power).re, mean, tol)
}

/// Moment under the pure state of a unit vector `x`.
pub fn vector_central_moment(x: &RankOneProjection, a: &ComplexMatrix, p: f64) -> Result<MomentValue> {
    check_p(p)?;
    check_dims(x.n(), a.n())?;
    let mean = x.expectation(a);
    let raw = vector_moment_raw(x.vector(), a, mean, p)?;
    MomentValue::new(p, raw, mean, &ToleranceConfig::default())
}

/// `<x, |A - m|^p x>` using the spectral decomposition of `(A - m)^*(A - m)`.
pub(crate) fn vector_moment_raw(x: &[Complex64], a: &ComplexMatrix, m: Complex64, p: f64) -> Result<f64> {
    let b = a.shift(m);
    let gram = &b.adjoint() * &b;
    let eig = eig_hermitian_unchecked(&gram)?;
    let n = a.n();
    let mut total = 0.0;
    for k in 0..n {
        let s = eig.values[k];
        if s <= 0.0 {
            continue;
        }
        let w = eig.vectors.column(k);
        total += s.powf(0.5 * p) * dot(x, &w).norm_sqr();
    }
    Ok(total)
}

/// `(1/n) Tr |A - (Tr A / n)|^p` from the singular values of the centered matrix.
pub fn tracial_central_moment(a: &ComplexMatrix, p: f64) -> Result<MomentValue> {
    check_p(p)?;
    let n = a.n() as f64;
    let mean = a.trace() / n;
    let s = svd(&a.shift(mean))?;
    let raw = s.values.iter().map(|v| v.powf(p)).sum::<f64>() / n;
    MomentValue::new(p, raw, mean, &ToleranceConfig::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernoulliConstant {
    pub p: f64,
    pub b_p: f64,
    pub argmax_t: f64,
}

impl BernoulliConstant {
    /// `b_p^(1/p)`
    pub fn root(&self) -> f64 {
        self.b_p.powf(1.0 / self.p)
    }
}

/// `t^p (1 - t) + t (1 - t)^p`
pub fn bernoulli_profile(p: f64, t: f64) -> f64 {
    t.powf(p) * (1.0 - t) + t * (1.0 - t).powf(p)
}

const PRESCAN: usize = 2000;

/// Largest p-th central moment of a Bernoulli variable.
///
/// Closed forms cover `p` in `[1, 2]` (maximum at `t = 1/2`), `p = 3` and
/// `p = 4`. Otherwise the profile is pre-scanned on `[0, 1/2]` and the best
/// cell refined by golden section.
pub fn bernoulli_b(p: f64) -> Result<BernoulliConstant> {
    check_p(p)?;
    if p <= 2.0 {
        return Ok(BernoulliConstant {
            p,
            b_p: 0.5f64.powf(p),
            argmax_t: 0.5,
        });
    }
    if p == 3.0 {
        return Ok(BernoulliConstant {
            p,
            b_p: 0.125,
            argmax_t: 0.5,
        });
    }
    if p == 4.0 {
        // t (1 - t) = 1/6
        let t = 0.5 * (1.0 - (1.0f64 / 3.0).sqrt());
        return Ok(BernoulliConstant {
            p,
            b_p: 1.0 / 12.0,
            argmax_t: t,
        });
    }
    let h = 0.5 / PRESCAN as f64;
    let best = (0..=PRESCAN)
        .map(|k| k as f64 * h)
        .max_by(|&x, &y| bernoulli_profile(p, x).total_cmp(&bernoulli_profile(p, y)))
        .expect("nonempty grid");
    let lo = (best - h).max(0.0);
    let hi = (best + h).min(0.5);
    let (t, b) = golden_section_max(|t| bernoulli_profile(p, t), lo, hi, 1e-12);
    Ok(BernoulliConstant { p, b_p: b, argmax_t: t })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReportEntry {
    pub moment: MomentValue,
    pub checks: Vec<BoundCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub chebyshev: ChebyshevRadius,
    pub entries: Vec<MomentReportEntry>,
}

impl MomentReport {
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.checks.iter().all(|c| c.holds))
    }
}

/// Moments for every `p` together with the Chebyshev-radius bounds that
/// apply: `root <= r` for `p <= 2` and `raw <= (4/3) r^4` for `p = 4`.
pub fn moment_report(d: &Density, a: &ComplexMatrix, ps: &[f64], tol: &ToleranceConfig) -> Result<MomentReport> {
    let chebyshev = chebyshev_radius(a, &ChebyshevOptions::default())?;
    let r = chebyshev.radius;
    let mut entries = Vec::with_capacity(ps.len());
    for &p in ps {
        let moment = central_moment_with(d, a, p, tol)?;
        let mut checks = Vec::new();
        if p <= 2.0 {
            checks.push(BoundCheck {
                name: "root <= chebyshev radius",
                lhs: moment.root,
                bound: r,
                holds: moment.root <= r + tol.slack,
            });
        }
        if p == 4.0 {
            let bound = 4.0 / 3.0 * r.powi(4);
            checks.push(BoundCheck {
                name: "raw <= 4/3 r^4",
                lhs: moment.raw,
                bound,
                holds: moment.raw <= bound + tol.slack,
            });
        }
        entries.push(MomentReportEntry { moment, checks });
    }
    Ok(MomentReport { chebyshev, entries })
}
