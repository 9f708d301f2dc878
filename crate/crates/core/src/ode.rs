//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights equal the last row of A (FSAL); these are the 4th-order ones.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step-size controls.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`, returning `y(t1)`.
pub fn integrate<const N: usize, F>(mut f: F, t0: f64, y0: [f64; N], t1: f64, tol: Tolerance) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if t1 == t0 {
        return Ok(y0);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = span.min(0.01 * span.max(1e-3));
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y)?;
    let mut steps = 0usize;
    while dir * (t1 - t) > 0.0 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::Integration {
                t,
                reason: "step limit exceeded".into(),
            });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().take(s).enumerate() {
                    acc += A[s][j] * kj[i];
                }
                *yi += hs * acc;
            }
            k[s] = f(t + C[s] * hs, &ys)?;
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for s in 0..7 {
                let w5 = if s < 6 { A[6][s] } else { 0.0 };
                acc5 += w5 * k[s][i];
                acc4 += B4[s] * k[s][i];
            }
            y5[i] = y[i] + hs * acc5;
            let e = hs * (acc5 - acc4);
            let scale = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::Integration {
                t,
                reason: "non-finite error estimate".into(),
            });
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = y5;
            k[0] = k[6];
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 * span.max(t.abs()) {
            return Err(Error::Integration {
                t,
                reason: "step size underflow".into(),
            });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let y = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [1.0, 0.0],
            10.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn exponential_backwards() {
        let y = integrate(|_, y: &[f64; 1]| Ok([y[0]]), 1.0, [1.0], 0.0, Tolerance::default()).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn zero_span_is_identity() {
        let y = integrate(|_, y: &[f64; 1]| Ok([y[0]]), 2.0, [3.0], 2.0, Tolerance::default()).unwrap();
        assert_eq!(y, [3.0]);
    }
}
