//! Reference implementations used by the acceptance suite.
//!
//! Everything here is computed by a different route from `rotor-core`: dense
//! matrices instead of FFTs, adaptive quadrature instead of AGM/Landen, and
//! plain sums instead of the trapezoid kernels.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

/// One-period evolution matrix in the momentum basis, built entry by entry.
///
/// Entry `(p', p)` is `Σ_j ⟨p'|θ_j⟩ e^{−iK cos θ_j} ⟨θ_j|p⟩ e^{−ip²Δ/2}` over
/// the `m` grid angles, with momenta in wrap-around order.
pub fn dense_floquet(m: usize, kick_strength: f64, delta: f64) -> Vec<Vec<Complex64>> {
    let momentum = |i: usize| {
        if i < m / 2 {
            i as f64
        } else {
            i as f64 - m as f64
        }
    };
    let thetas: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
    (0..m)
        .map(|row| {
            let pr = momentum(row);
            (0..m)
                .map(|col| {
                    let pc = momentum(col);
                    let acc: Complex64 = thetas
                        .iter()
                        .map(|&th| Complex64::from_polar(1.0, (pc - pr) * th - kick_strength * th.cos()))
                        .sum();
                    acc / m as f64 * Complex64::from_polar(1.0, -0.5 * pc * pc * delta)
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(op: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    op.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `𝒦(k) = ∫₀^{π/2} dφ / √(1 − k² sin²φ)` by quadrature.
pub fn complete_k_quadrature(k: f64) -> f64 {
    simpson(
        &|t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
        0.0,
        0.5 * PI,
        1e-14,
    )
}

/// `J0(x) = (1/π) ∫₀^π cos(x sin φ) dφ`, summed on a periodic grid.
pub fn bessel_j0(x: f64) -> f64 {
    let n = 200_000;
    (0..n)
        .map(|j| (x * (PI * j as f64 / n as f64).sin()).cos())
        .sum::<f64>()
        / n as f64
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
