//! Complete elliptic integral of the first kind and the Jacobi elliptic
//! functions, both driven by the arithmetic–geometric mean.
//!
//! Everything here uses the modulus `k` (not the parameter `m = k²`).
//! Results depend on `k` only through `k²`, so negative moduli are accepted.

use std::f64::consts::FRAC_PI_2;

use crate::error::{finite, invalid, Error, Result};

/// Largest modulus the semiclassical layer feeds in. Closer to 1 the quarter
/// period grows like `ln(4/√(1−k²))` and relative accuracy of the descending
/// recursion degrades to roughly `ε/(1−|k|)`.
pub const MODULUS_CAP: f64 = 1.0 - 1e-12;

const MAX_AGM_STEPS: usize = 64;

/// Elliptic modulus with `|k| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        let k = finite("k", k)?;
        if k.abs() > 1.0 {
            return Err(invalid("k", format!("|k| must be <= 1, got {k}")));
        }
        Ok(Self(k))
    }

    /// Clamps `|k|` to [`MODULUS_CAP`], keeping the sign.
    pub fn capped(k: f64) -> Result<Self> {
        let m = Self::new(k)?;
        Ok(Self(m.0.clamp(-MODULUS_CAP, MODULUS_CAP)))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Complementary modulus `√(1 − k²)`, formed without cancellation.
    pub fn complement(self) -> f64 {
        let k = self.0.abs();
        ((1.0 - k) * (1.0 + k)).sqrt()
    }
}

/// `(sn, cn, dn)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl JacobiTriple {
    /// `cn/dn`, the combination entering the pendulum trajectory.
    pub fn cd(&self) -> f64 {
        self.cn / self.dn
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_AGM_STEPS {
        let next_a = 0.5 * (a + b);
        let next_b = (a * b).sqrt();
        if (next_a - next_b).abs() <= f64::EPSILON * next_a {
            return 0.5 * (next_a + next_b);
        }
        if next_a == a && next_b == b {
            break;
        }
        a = next_a;
        b = next_b;
    }
    0.5 * (a + b)
}

/// Quarter period `𝒦(k) = π / (2·AGM(1, √(1−k²)))` for `|k| < 1`.
pub fn complete_k(k: f64) -> Result<f64> {
    let m = EllipticModulus::new(k)?;
    if m.value().abs() >= 1.0 {
        return Err(Error::Divergence { k });
    }
    Ok(FRAC_PI_2 / agm(1.0, m.complement()))
}

/// Jacobi `sn`, `cn`, `dn` by the descending AGM (Landen) recursion.
///
/// `k = 0` and `|k| = 1` short-circuit to the circular and hyperbolic forms.
pub fn jacobi(u: f64, k: f64) -> Result<JacobiTriple> {
    let u = finite("u", u)?;
    let m = EllipticModulus::new(k)?;
    let k = m.value().abs();
    if k == 0.0 {
        let (sn, cn) = u.sin_cos();
        return Ok(JacobiTriple { sn, cn, dn: 1.0 });
    }
    if k == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        });
    }

    let mut a = [0.0f64; MAX_AGM_STEPS + 1];
    let mut c = [0.0f64; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = m.complement();
    let mut n = 0;
    while n < MAX_AGM_STEPS && c[n].abs() > f64::EPSILON * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }

    let mut phi = (n as f64).exp2() * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] * phi.sin() / a[j]).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = k'² + k²cn² stays accurate near cn = 0, where cn/cos(φ1 − φ0) is 0/0.
    let kc = m.complement();
    let dn = (kc * kc + k * k * cn * cn).sqrt();
    Ok(JacobiTriple { sn, cn, dn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quarter_period_at_zero_modulus() {
        assert_eq!(complete_k(0.0).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn divergence_at_unit_modulus() {
        assert!(matches!(complete_k(1.0), Err(Error::Divergence { .. })));
        assert!(matches!(complete_k(-1.0), Err(Error::Divergence { .. })));
        assert!(complete_k(1.5).is_err());
    }

    #[test]
    fn known_value() {
        // 𝒦(1/√2) = Γ(1/4)² / (4√π)
        let gamma_quarter = 3.625_609_908_221_908;
        let expect = gamma_quarter * gamma_quarter / (4.0 * PI.sqrt());
        assert!((complete_k(0.5f64.sqrt()).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn origin_and_degenerations() {
        for &k in &[0.0, 0.3, 0.9, 1.0] {
            let t = jacobi(0.0, k).unwrap();
            assert_eq!((t.sn, t.cn, t.dn), (0.0, 1.0, 1.0));
        }
        for &u in &[-7.0, -1.3, 0.4, 2.0, 19.0] {
            let t = jacobi(u, 0.0).unwrap();
            assert!((t.sn - f64::sin(u)).abs() < 1e-13);
            assert!((t.cn - f64::cos(u)).abs() < 1e-13);
            assert_eq!(t.dn, 1.0);
            let h = jacobi(u, 1.0).unwrap();
            assert!((h.sn - u.tanh()).abs() < 1e-12);
            assert!((h.cn - 1.0 / u.cosh()).abs() < 1e-12);
            assert!((h.dn - 1.0 / u.cosh()).abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_period_zero_of_cn() {
        let kq = complete_k(0.7).unwrap();
        let t = jacobi(kq, 0.7).unwrap();
        assert!(t.cn.abs() < 1e-10, "{}", t.cn);
        assert!((t.sn - 1.0).abs() < 1e-12);
        assert!((t.dn - EllipticModulus::new(0.7).unwrap().complement()).abs() < 1e-12);
    }

    #[test]
    fn sign_of_modulus_is_irrelevant() {
        assert_eq!(jacobi(1.7, 0.4).unwrap(), jacobi(1.7, -0.4).unwrap());
        assert_eq!(complete_k(0.4).unwrap(), complete_k(-0.4).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(jacobi(f64::NAN, 0.5).is_err());
        assert!(jacobi(f64::INFINITY, 0.5).is_err());
        assert!(jacobi(1.0, 1.01).is_err());
    }

    #[test]
    fn cap_keeps_sign() {
        assert_eq!(EllipticModulus::capped(-1.0).unwrap().value(), -MODULUS_CAP);
        assert_eq!(EllipticModulus::capped(0.3).unwrap().value(), 0.3);
    }
}
