use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotor_core::{complete_k, jacobi};

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
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

fn incomplete_f(phi: f64, k: f64) -> f64 {
    simpson(&|t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-14)
}

#[test]
fn complete_k_against_quadrature() {
    let mut k = 0.0;
    while k <= 0.99 + 1e-12 {
        let q = incomplete_f(FRAC_PI_2, k);
        let a = complete_k(k).unwrap();
        assert!((a - q).abs() < 1e-10, "k={k}: {a} vs {q}");
        k += 0.01;
    }
    assert!((complete_k(0.5).unwrap() - incomplete_f(FRAC_PI_2, 0.5)).abs() < 1e-12);
}

#[test]
fn complete_k_small_modulus_series() {
    // 𝒦 = π/2 · (1 + k²/4 + 9k⁴/64 + 25k⁶/256 + ...)
    let k: f64 = 1e-3;
    let m = k * k;
    let series = FRAC_PI_2 * (1.0 + m / 4.0 + 9.0 * m * m / 64.0 + 25.0 * m * m * m / 256.0);
    assert!((complete_k(k).unwrap() - series).abs() < 1e-15);
}

#[test]
fn sn_inverts_the_incomplete_integral() {
    for &k in &[0.2, 0.7, 0.95] {
        for &phi in &[0.3, 1.0, 1.4, 2.5] {
            let u = incomplete_f(phi, k);
            let t = jacobi(u, k).unwrap();
            assert!((t.sn - phi.sin()).abs() < 1e-11, "k={k} phi={phi}");
            assert!((t.cn - phi.cos()).abs() < 1e-11);
        }
    }
}

#[test]
fn identities_on_pseudo_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let u = rng.random_range(-20.0..20.0);
        let k: f64 = rng.random_range(-0.999..0.999);
        let t = jacobi(u, k).unwrap();
        assert!((t.sn * t.sn + t.cn * t.cn - 1.0).abs() < 1e-12);
        assert!((t.dn * t.dn + k * k * t.sn * t.sn - 1.0).abs() < 1e-12);
    }
}

#[test]
fn degenerate_moduli() {
    for i in 0..200 {
        let u = -10.0 + 0.1 * i as f64;
        let c = jacobi(u, 0.0).unwrap();
        assert!((c.sn - u.sin()).abs() < 1e-13 && (c.cn - u.cos()).abs() < 1e-13 && c.dn == 1.0);
        let h = jacobi(u, 1.0).unwrap();
        assert!((h.sn - u.tanh()).abs() < 1e-12);
        assert!((h.cn - 1.0 / u.cosh()).abs() < 1e-12);
        assert!((h.dn - 1.0 / u.cosh()).abs() < 1e-12);
    }
}

#[test]
fn complete_k_is_increasing() {
    let mut prev = complete_k(0.0).unwrap();
    assert_eq!(prev, FRAC_PI_2);
    for i in 1..1000 {
        let v = complete_k(i as f64 / 1000.0).unwrap();
        assert!(v > prev && v > FRAC_PI_2);
        prev = v;
    }
    assert!(complete_k(1.0).is_err());
}

proptest! {
    #[test]
    fn periodicity_and_parity(u in -20.0f64..20.0, k in -0.999f64..0.999) {
        let q = complete_k(k).unwrap();
        let base = jacobi(u, k).unwrap();
        prop_assert!((jacobi(u + 4.0 * q, k).unwrap().cn - base.cn).abs() < 1e-10);
        prop_assert!((jacobi(u + 2.0 * q, k).unwrap().cn + base.cn).abs() < 1e-10);
        let neg = jacobi(-u, k).unwrap();
        prop_assert!((neg.cn - base.cn).abs() < 1e-12);
        prop_assert!((neg.sn + base.sn).abs() < 1e-12);
        prop_assert!((neg.dn - base.dn).abs() < 1e-12);
    }

    #[test]
    fn quarter_period_zero(k in -0.9999f64..0.9999) {
        let q = complete_k(k).unwrap();
        prop_assert!(jacobi(q, k).unwrap().cn.abs() < 1e-10);
        prop_assert!((jacobi(2.0 * q, k).unwrap().sn).abs() < 1e-10);
    }
}

#[test]
fn lemniscatic_value() {
    // 𝒦(1/√2) = Γ(1/4)²/(4√π)
    let gamma_quarter = 3.625_609_908_221_908;
    let expect = gamma_quarter * gamma_quarter / (4.0 * PI.sqrt());
    assert!((complete_k(0.5f64.sqrt()).unwrap() - expect).abs() < 1e-14);
}
