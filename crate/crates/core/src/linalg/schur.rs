//! Eigenvalues of general complex matrices: Householder reduction to upper
//! Hessenberg form followed by single-shift complex QR iteration.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Reduces `a` to upper Hessenberg form by Householder similarity transforms.
pub fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.n();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if tail == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        // v = x + phase |x| e1, reflector I - 2 v v* / (v* v)
        let mut v = x;
        v[0] += phase * xnorm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let scale = 2.0 / vnorm2;

        // H <- P H : rows k+1..n
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (r, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + r, j)];
            }
            s *= scale;
            for (r, vi) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= vi * s;
            }
        }
        // H <- H P : columns k+1..n
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (r, vi) in v.iter().enumerate() {
                s += h[(i, k + 1 + r)] * vi;
            }
            s *= scale;
            for (r, vi) in v.iter().enumerate() {
                h[(i, k + 1 + r)] -= s * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Givens rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All `n` eigenvalues (with multiplicity) of a general complex matrix.
///
/// The iteration cap is `100 n` QR sweeps; on failure the error carries the
/// eigenvalues already deflated.
pub fn eig_general(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.n();
    let mut h = hessenberg(a);
    let mut eigs = vec![Complex64::new(0.0, 0.0); n];
    let cap = 100 * n.max(1);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n;
    while hi > 0 {
        let active = hi - 1;
        if active == 0 {
            eigs[0] = h[(0, 0)];
            break;
        }
        // locate the start of the unreduced block ending at `active`
        let mut lo = active;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if diag == 0.0 { h.max_abs() } else { diag };
            if sub <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == active {
            eigs[active] = h[(active, active)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if total >= cap {
            let sub = h[(active, active - 1)].norm();
            return Err(Error::NoConvergence {
                routine: "hessenberg qr",
                iterations: total,
                residual: sub,
                partial: eigs[hi..].to_vec(),
            });
        }
        total += 1;
        since_deflation += 1;

        let mu = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h[(active, active)] + Complex64::new(0.75 * h[(active, active - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(active - 1, active - 1)],
                h[(active - 1, active)],
                h[(active, active - 1)],
                h[(active, active)],
            )
        };

        for i in lo..=active {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(active - lo);
        for k in lo..active {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=active {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex64::new(0.0, 0.0);
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + offset;
            let last = (k + 2).min(active);
            for i in lo..=last {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -(x * s) + y * c;
            }
        }
        for i in lo..=active {
            h[(i, i)] += mu;
        }
    }
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tests_support::random_matrix;

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let a = random_matrix(6, 1);
        let h = hessenberg(&a);
        for i in 2..6 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
        assert!((h.trace() - a.trace()).norm() < 1e-12);
        assert!((h.frobenius() - a.frobenius()).abs() < 1e-12);
    }

    #[test]
    fn jordan_block_has_double_eigenvalue() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        for l in eig_general(&a).unwrap() {
            assert!((l - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_matrix_has_conjugate_pair() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let e = sorted_re(eig_general(&a).unwrap());
        let mut ims: Vec<f64> = e.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_trace_identity() {
        for seed in 0..20 {
            let a = random_matrix(6, 40 + seed);
            let e = eig_general(&a).unwrap();
            let sum: Complex64 = e.iter().sum();
            let scale = a.frobenius();
            assert!((sum - a.trace()).norm() <= 1e-8 * 6.0 * scale);
            // each eigenvalue makes A - lambda I singular
            for l in e {
                let s = crate::linalg::svd(&a.shift(l)).unwrap();
                assert!(s.values[5] < 1e-9 * scale, "{}", s.values[5]);
            }
        }
    }

    #[test]
    fn triangular_input() {
        let mut a = random_matrix(5, 9);
        for i in 0..5 {
            for j in 0..i {
                a[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        let diag = sorted_re(a.diagonal());
        let e = sorted_re(eig_general(&a).unwrap());
        for (x, y) in diag.iter().zip(&e) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
