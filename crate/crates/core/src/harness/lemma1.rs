use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1Result {
    pub max_value: f64,
    /// `(x1, x2, x3, x4)`
    pub argmax: [f64; 4],
    pub resolution: usize,
}

/// `2 x1^2 x3 - 2 x1 x4 + x2^2`
pub fn lemma1_objective(x: [f64; 4]) -> f64 {
    2.0 * x[0] * x[0] * x[2] - 2.0 * x[0] * x[3] + x[1] * x[1]
}

/// Feasibility under `0 <= x3 <= x2 <= 1`,
/// `x1 <= x4 + sqrt((1 - x2^2)(x2^2 - x3^2))`, together with `0 <= x1 <= 1`
/// and `|x4| <= x2 x3`, which hold wherever the lemma is applied.
pub fn lemma1_feasible(x: [f64; 4], slack: f64) -> bool {
    let [x1, x2, x3, x4] = x;
    let root = ((1.0 - x2 * x2) * (x2 * x2 - x3 * x3)).max(0.0).sqrt();
    (-slack..=1.0 + slack).contains(&x1)
        && -slack <= x3
        && x3 <= x2 + slack
        && x2 <= 1.0 + slack
        && x4.abs() <= x2 * x3 + slack
        && x1 <= x4 + root + slack
}

/// Best value over `x1` for fixed `(x2, x3, x4)`. The objective is convex
/// in `x1`, so the maximum sits at an end of the feasible interval
/// `[0, min(1, x4 + sqrt(...))]`.
fn best_over_x1(x2: f64, x3: f64, x4: f64) -> Option<([f64; 4], f64)> {
    let root = ((1.0 - x2 * x2) * (x2 * x2 - x3 * x3)).max(0.0).sqrt();
    let hi = (x4 + root).min(1.0);
    if hi < 0.0 {
        return None;
    }
    [0.0, hi]
        .into_iter()
        .map(|x1| {
            let x = [x1, x2, x3, x4];
            (x, lemma1_objective(x))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// Maps free coordinates into the feasible `(x2, x3, x4)` region.
fn clamp_params(z: &[f64]) -> (f64, f64, f64) {
    let x2 = z[0].clamp(0.0, 1.0);
    let x3 = z[1].clamp(0.0, x2);
    let bound = x2 * x3;
    let x4 = z[2].clamp(-bound, bound);
    (x2, x3, x4)
}

/// Grid search over `x2, x3, x4` (with `x1` at its interval ends) followed
/// by a Nelder-Mead polish from the best grid point.
pub fn lemma1_bruteforce(resolution: usize) -> Result<Lemma1Result> {
    if resolution < 50 {
        return Err(Error::InvalidArgument("resolution must be at least 50".into()));
    }
    let r = resolution as f64;
    let mut best: Option<([f64; 4], f64)> = None;
    for i in 0..=resolution {
        let x2 = i as f64 / r;
        for j in 0..=i {
            let x3 = j as f64 / r;
            let bound = x2 * x3;
            for k in 0..=resolution {
                let x4 = -bound + 2.0 * bound * k as f64 / r;
                if let Some(cand) = best_over_x1(x2, x3, x4) {
                    if best.is_none_or(|b| cand.1 > b.1) {
                        best = Some(cand);
                    }
                }
                if bound == 0.0 {
                    break;
                }
            }
        }
    }
    let (mut argmax, mut max_value) = best.expect("x1 = 0 is always feasible");

    let mut neg = |z: &[f64]| {
        let (x2, x3, x4) = clamp_params(z);
        best_over_x1(x2, x3, x4).map_or(f64::INFINITY, |(_, v)| -v)
    };
    let polished = nelder_mead(
        &mut neg,
        &[argmax[1], argmax[2], argmax[3]],
        &NelderMeadOptions {
            initial_step: 1.0 / r,
            ..Default::default()
        },
    );
    if -polished.value > max_value {
        let (x2, x3, x4) = clamp_params(&polished.point);
        if let Some((x, v)) = best_over_x1(x2, x3, x4) {
            argmax = x;
            max_value = v;
        }
    }
    Ok(Lemma1Result {
        max_value,
        argmax,
        resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn known_feasible_points() {
        assert_eq!(lemma1_objective([1.0, 1.0, 1.0, 1.0]), 1.0);
        assert!(lemma1_feasible([1.0, 1.0, 1.0, 1.0], 0.0));
        for x2 in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(lemma1_objective([0.0, x2, 0.5 * x2, 0.0]), x2 * x2);
        }
    }

    #[test]
    fn literal_constraints_are_unbounded_without_the_box() {
        // x1 -> -inf with x3 > 0 satisfies the literal upper constraint
        let x = [-1e3, 0.5, 0.5, 0.0];
        assert!(lemma1_objective(x) > 1e5);
        assert!(!lemma1_feasible(x, 0.0));
    }

    #[test]
    fn bruteforce_finds_one() {
        let r = lemma1_bruteforce(60).unwrap();
        assert!(r.max_value >= 0.999 && r.max_value <= 1.0 + 1e-9, "{r:?}");
        assert!(lemma1_feasible(r.argmax, 1e-12));
        assert!(lemma1_bruteforce(10).is_err());
    }

    #[test]
    fn random_feasible_points_stay_below_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut seen = 0;
        while seen < 20_000 {
            let x2: f64 = rng.random();
            let x3 = x2 * rng.random::<f64>();
            let x4 = x2 * x3 * (2.0 * rng.random::<f64>() - 1.0);
            let x1: f64 = rng.random();
            let x = [x1, x2, x3, x4];
            if lemma1_feasible(x, 0.0) {
                seen += 1;
                assert!(lemma1_objective(x) <= 1.0 + 1e-12, "{x:?}");
            }
        }
    }
}
