use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{chebyshev_radius, ChebyshevOptions};
use crate::linalg::{eig_general, polar, ComplexMatrix, Density, RankOneProjection};
use crate::moments::{central_moment, vector_central_moment};
use crate::states::{mu_p, MuOptions};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleCheck {
    pub example: String,
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExamplesReport {
    pub checks: Vec<ExampleCheck>,
    pub passed: bool,
}

/// The 4x4 partial isometry whose fourth moment at `e1` reaches `4/3`.
pub fn example_one_matrix() -> ComplexMatrix {
    let s = 1.0 / 3f64.sqrt();
    ComplexMatrix::from_real_rows(&[
        &[1.0, 1.0, 1.0, 0.0],
        &[1.0, -0.5, -0.5, 1.0],
        &[1.0, -0.5, -0.5, -1.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
    .expect("finite constant matrix")
    .scale_real(s)
}

pub fn jordan_block() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).expect("finite constant matrix")
}

fn check(example: &str, name: &str, observed: f64, expected: f64, tolerance: f64) -> ExampleCheck {
    ExampleCheck {
        example: example.into(),
        name: name.into(),
        observed,
        expected,
        tolerance,
        passed: (observed - expected).abs() <= tolerance,
    }
}

/// Largest distance from an expected eigenvalue to the nearest unused
/// computed one.
fn spectrum_mismatch(computed: &[Complex64], expected: &[Complex64]) -> f64 {
    let mut unused: Vec<Complex64> = computed.to_vec();
    let mut worst: f64 = 0.0;
    for e in expected {
        let Some((k, d)) = unused
            .iter()
            .enumerate()
            .map(|(k, z)| (k, (z - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return f64::INFINITY;
        };
        worst = worst.max(d);
        unused.swap_remove(k);
    }
    worst
}

pub fn run_examples() -> Result<ExamplesReport> {
    let tol = ToleranceConfig::default();
    let mut checks = Vec::new();

    let v = example_one_matrix();
    let q = RankOneProjection::basis(4, 0);
    checks.push(check(
        "partial_isometry",
        "fourth_moment_at_e1",
        vector_central_moment(&q, &v, 4.0)?.raw,
        4.0 / 3.0,
        1e-10,
    ));
    let expected: Vec<Complex64> = [1.0, 1.0 / 3f64.sqrt(), 0.0, -1.0]
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    checks.push(check(
        "partial_isometry",
        "spectrum_mismatch",
        spectrum_mismatch(&eig_general(&v)?, &expected),
        0.0,
        1e-8,
    ));
    checks.push(check(
        "partial_isometry",
        "chebyshev_radius",
        chebyshev_radius(&v, &ChebyshevOptions::default())?.radius,
        1.0,
        1e-7,
    ));
    let abs_v = polar(&v)?.positive.into_matrix();
    let qm = q.matrix();
    let commutator = &(&abs_v * &qm) - &(&qm * &abs_v);
    checks.push(check(
        "partial_isometry",
        "equality_case_commutator",
        commutator.frobenius(),
        0.0,
        1e-8,
    ));

    let j = jordan_block();
    checks.push(check(
        "jordan_block",
        "mu_4_jordan",
        mu_p(&j, 4.0, &MuOptions::default())?.value,
        1.0,
        1e-6,
    ));
    let mut profile_gap: f64 = 0.0;
    for k in 0..100 {
        let t = k as f64 / 99.0;
        let z = vec![Complex64::new((1.0 - t * t).max(0.0).sqrt(), 0.0), Complex64::new(t, 0.0)];
        let x = RankOneProjection::normalized(z)?;
        let observed = vector_central_moment(&x, &j, 4.0)?.raw;
        profile_gap = profile_gap.max((observed - (4.0 * t.powi(6) - 3.0 * t.powi(8))).abs());
    }
    checks.push(check("jordan_block", "profile_max_gap", profile_gap, 0.0, 1e-10));

    let p_state = Density::diagonal(&[0.0, 1.0], &tol)?;
    for p in [1.0, 1.5, 2.0] {
        checks.push(check(
            "commutative_bound",
            &format!("jordan_moment_p{p}"),
            central_moment(&p_state, &j, p)?.raw,
            1.0,
            1e-12,
        ));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(ExamplesReport { checks, passed })
}
