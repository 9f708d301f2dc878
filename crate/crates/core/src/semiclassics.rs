//! Continuum pendulum picture of the near-resonant rotor.
//!
//! In the limit `Δ → 0` the ε-classical orbits follow `θ̈ = (K/Δ) sin θ`,
//! a pendulum oscillating about the stable point `θ = π`:
//!
//! ```text
//! θ(t) = π + 2 arcsin[k · cn(ωt, k) / dn(ωt, k)],   k = sin((θ0 − π)/2),   ω = √(K/Δ)
//! ```
//!
//! Caustics are the zeros of `∂θ/∂θ0`; for a family launched at rest they
//! first form at `θ = π` after roughly a quarter period. Internally, all
//! time integration uses the scaled time `s = ωt`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use crate::elliptic::{complete_k, jacobi, EllipticModulus, MODULUS_CAP};
use crate::error::{finite, invalid, Error, Result};
use crate::ode::{integrate, Tolerance};

/// Finite-difference step in `k` for the caustic equation.
pub const CAUSTIC_K_STEP: f64 = 1e-6;

/// Relative bracket width at which bisection stops.
pub const CAUSTIC_ROOT_RTOL: f64 = 1e-10;

const BRACKET_SCAN_INTERVALS: usize = 64;

fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if !(value.is_finite() && value > 0.0) {
        return Err(invalid(name, format!("must be finite and > 0, got {value}")));
    }
    Ok(value)
}

/// One pendulum orbit launched at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum {
    k: f64,
    omega: f64,
}

impl Pendulum {
    /// Orbit starting at rest from `theta0 ∈ (0, 2π)`.
    pub fn new(theta0: f64, kick_strength: f64, delta: f64) -> Result<Self> {
        let theta0 = finite("theta0", theta0)?;
        if theta0 == 0.0 || theta0 == TAU {
            return Err(Error::Separatrix { theta0 });
        }
        if !(0.0..TAU).contains(&theta0) {
            return Err(invalid("theta0", format!("must lie in (0, 2π), got {theta0}")));
        }
        Self::from_modulus(((theta0 - PI) / 2.0).sin(), kick_strength, delta)
    }

    /// Orbit labelled by its modulus; `|k|` is capped just below 1.
    pub fn from_modulus(k: f64, kick_strength: f64, delta: f64) -> Result<Self> {
        let kick_strength = check_positive("K", kick_strength)?;
        let delta = check_positive("delta", delta)?;
        if k.abs() >= 1.0 {
            return Err(Error::Separatrix {
                theta0: PI + 2.0 * k.clamp(-1.0, 1.0).asin(),
            });
        }
        Ok(Self {
            k: EllipticModulus::capped(k)?.value(),
            omega: (kick_strength / delta).sqrt(),
        })
    }

    pub fn modulus(&self) -> f64 {
        self.k
    }

    /// Angular frequency `√(K/Δ)` of small oscillations.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Quarter period `𝒦(|k|)/ω` in continuous time.
    pub fn quarter_period(&self) -> f64 {
        complete_k(self.k).expect("modulus is capped below 1") / self.omega
    }

    fn cd(&self, s: f64) -> Result<f64> {
        Ok(jacobi(s, self.k)?.cd())
    }

    /// Angle at scaled time `s = ωt`.
    pub fn angle_scaled(&self, s: f64) -> Result<f64> {
        let x = (self.k * self.cd(s)?).clamp(-1.0, 1.0);
        Ok(PI + 2.0 * x.asin())
    }

    /// Angle at time `t`.
    pub fn angle(&self, t: f64) -> Result<f64> {
        self.angle_scaled(self.omega * t)
    }

    /// `cos θ` at scaled time, using `cos(π + 2 arcsin x) = 2x² − 1`.
    fn cos_angle_scaled(&self, s: f64) -> Result<f64> {
        let x = self.k * self.cd(s)?;
        Ok(2.0 * x * x - 1.0)
    }

    /// Solves `y'' = cos θ(s) · y` in scaled time.
    fn tangent(&self, y0: [f64; 2], s: f64) -> Result<[f64; 2]> {
        integrate(
            |s, y: &[f64; 2]| Ok([y[1], self.cos_angle_scaled(s)? * y[0]]),
            0.0,
            y0,
            s,
            Tolerance::default(),
        )
    }

    /// `v(t) = ∂θ/∂θ0` along the orbit: `v̈ = (K/Δ) cos θ · v`, `v(0) = 1`, `v̇(0) = 0`.
    pub fn variational(&self, t: f64) -> Result<f64> {
        Ok(self.tangent([1.0, 0.0], self.omega * t)?[0])
    }

    /// Gelfand–Yaglom solution `u(t)`: same equation, `u(0) = 0`, `u̇(0) = 1`.
    pub fn gelfand_yaglom(&self, t: f64) -> Result<f64> {
        Ok(self.tangent([0.0, 1.0], self.omega * t)?[0] / self.omega)
    }

    /// Zeros in `(0, t_max]` of the tangent solution with initial data `y0`,
    /// returned in continuous time.
    fn tangent_zeros(&self, y0: [f64; 2], t_max: f64) -> Result<Vec<f64>> {
        let s_max = self.omega * t_max;
        let ds = 0.02 * complete_k(self.k)?;
        let samples = (s_max / ds).ceil().max(1.0) as usize;
        let step = s_max / samples as f64;
        let rhs = |s: f64, y: &[f64; 2]| Ok([y[1], self.cos_angle_scaled(s)? * y[0]]);
        let tol = Tolerance::default();
        let mut zeros = Vec::new();
        let mut s = 0.0;
        let mut y = y0;
        for i in 1..=samples {
            let s_next = step * i as f64;
            let y_next = integrate(rhs, s, y, s_next, tol)?;
            if y[0] != 0.0 && y[0].signum() != y_next[0].signum() {
                let (mut lo, mut hi) = (s, s_next);
                while hi - lo > 1e-13 * hi {
                    let mid = 0.5 * (lo + hi);
                    let y_mid = integrate(rhs, s, y, mid, tol)?;
                    if y_mid[0].signum() == y[0].signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                zeros.push(0.5 * (lo + hi) / self.omega);
            }
            s = s_next;
            y = y_next;
        }
        Ok(zeros)
    }

    /// Caustic times: zeros of `∂θ/∂θ0` up to `t_max`.
    pub fn variational_zeros(&self, t_max: f64) -> Result<Vec<f64>> {
        self.tangent_zeros([1.0, 0.0], t_max)
    }

    /// Zeros of the Gelfand–Yaglom solution in `(0, t_max]`.
    pub fn gelfand_yaglom_zeros(&self, t_max: f64) -> Result<Vec<f64>> {
        self.tangent_zeros([0.0, 1.0], t_max)
    }
}

/// Continuous time matched to iterate `n` of an ε-classical orbit started at
/// `p = 0`.
///
/// Iterates 0 and 1 share the same angle, so the turning point of the
/// continuum orbit sits at `n = ½`; iterate `n` corresponds to `|n − ½|·Δ`.
pub fn map_step_time(n: usize, delta: f64) -> f64 {
    (n as f64 - 0.5).abs() * delta
}

/// Pendulum angle at time `t` for an orbit launched at rest from `theta0`.
pub fn pendulum_solution(theta0: f64, t: f64, kick_strength: f64, delta: f64) -> Result<f64> {
    let t = finite("t", t)?;
    if t < 0.0 {
        return Err(invalid("t", "must be >= 0"));
    }
    Pendulum::new(theta0, kick_strength, delta)?.angle(t)
}

/// `S = Σ_j [(θ_{j+1} − θ_j)²/(2Δ) − K cos θ_{j+1}]` over an unwrapped angle path.
pub fn discrete_action(path: &[f64], kick_strength: f64, delta: f64) -> Result<f64> {
    if path.len() < 2 {
        return Err(invalid("path", "needs at least two angles"));
    }
    let delta = check_positive("delta", delta)?;
    let kick_strength = finite("K", kick_strength)?;
    Ok(path
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            d * d / (2.0 * delta) - kick_strength * w[1].cos()
        })
        .sum())
}

/// Kick count of the `m`-th caustic for one orbit: `(2m+1)·𝒦(|k|)/√(KΔ)`.
pub fn caustic_time_for_k(k: f64, kick_strength: f64, delta: f64, m: u32) -> Result<f64> {
    let kick_strength = check_positive("K", kick_strength)?;
    let delta = check_positive("delta", delta)?;
    let quarter = complete_k(k)?;
    Ok((2 * m + 1) as f64 * quarter / (kick_strength * delta).sqrt())
}

/// Dominant kick count of the `m`-th cusp for a uniform launch, `(2m+1)π/(2√(KΔ))`.
///
/// This is the `k → 0` value of [`caustic_time_for_k`].
pub fn mean_caustic_kicks(kick_strength: f64, delta: f64, m: u32) -> f64 {
    (2 * m + 1) as f64 * FRAC_PI_2 / (kick_strength * delta).sqrt()
}

/// `cn/dn + k ∂(cn/dn)/∂k` at scaled time `s`; its zeros are the caustics.
///
/// Callers keep `|k| + CAUSTIC_K_STEP` below the modulus cap.
fn caustic_residual(s: f64, k: f64) -> Result<f64> {
    let h = CAUSTIC_K_STEP;
    let derivative = (jacobi(s, k + h)?.cd() - jacobi(s, k - h)?.cd()) / (2.0 * h);
    Ok(jacobi(s, k)?.cd() + k * derivative)
}

/// Time of the `m`-th caustic of the orbit with modulus `k`, found by
/// bisection on the caustic equation.
///
/// The search bracket is `[(2m+1)τ − τ/2, (2m+1)τ + τ]` with `τ` the quarter
/// period; it is scanned for the first sign change before bisecting.
pub fn solve_caustic_equation(k: f64, kick_strength: f64, delta: f64, m: u32) -> Result<f64> {
    let k = finite("k", k)?;
    if k == 0.0 || k.abs() >= 1.0 {
        return Err(invalid("k", format!("must satisfy 0 < |k| < 1, got {k}")));
    }
    let pendulum = Pendulum::from_modulus(k, kick_strength, delta)?;
    let k = pendulum.modulus();
    let quarter = complete_k(k)?;
    let centre = (2 * m + 1) as f64 * quarter;
    let (s_lo, s_hi) = (centre - 0.5 * quarter, centre + quarter);
    let omega = pendulum.omega();
    let no_root = || Error::NoRoot {
        k,
        lo: s_lo / omega,
        hi: s_hi / omega,
    };
    // Closer to the separatrix the k-stencil would cross the cap.
    if k.abs() + CAUSTIC_K_STEP > MODULUS_CAP {
        return Err(no_root());
    }

    let ds = (s_hi - s_lo) / BRACKET_SCAN_INTERVALS as f64;
    let mut a = s_lo;
    let mut fa = caustic_residual(a, k)?;
    let mut bracket = None;
    for i in 1..=BRACKET_SCAN_INTERVALS {
        let b = s_lo + ds * i as f64;
        let fb = caustic_residual(b, k)?;
        if fa == 0.0 {
            return Ok(a / omega);
        }
        if fa.signum() != fb.signum() {
            bracket = Some((a, fa, b));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut lo, mut f_lo, mut hi) = bracket.ok_or_else(no_root)?;
    while hi - lo > CAUSTIC_ROOT_RTOL * 0.5 * (lo + hi) {
        let mid = 0.5 * (lo + hi);
        let f_mid = caustic_residual(mid, k)?;
        if f_mid == 0.0 {
            return Ok(mid / omega);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / omega)
}

/// One semiclassical caustic point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausticPrediction {
    pub m: u32,
    pub k: f64,
    /// Continuous time, `t = nΔ`.
    pub time: f64,
    /// `time/Δ` rounded to the nearest kick.
    pub kick_index: usize,
    pub theta: f64,
}

/// Caustic curve of one branch plus the grid points that failed to solve.
#[derive(Debug, Clone)]
pub struct CausticCurve {
    pub points: Vec<CausticPrediction>,
    pub failures: Vec<(f64, Error)>,
}

/// Cusp point of branch `m`: `θ = π` at the mean caustic time.
pub fn cusp_point(kick_strength: f64, delta: f64, m: u32) -> CausticPrediction {
    let kicks = mean_caustic_kicks(kick_strength, delta, m);
    CausticPrediction {
        m,
        k: 0.0,
        time: kicks * delta,
        kick_index: kicks.round() as usize,
        theta: PI,
    }
}

/// Caustic curve of branch `m` over a grid of moduli.
///
/// Each `k ≠ 0` yields the caustic time from [`solve_caustic_equation`] and
/// the angle of that orbit at that time. The `k = 0` cusp point is always
/// included. Points come back sorted by `k`.
pub fn caustic_curve(kick_strength: f64, delta: f64, m: u32, k_grid: &[f64]) -> Result<CausticCurve> {
    check_positive("K", kick_strength)?;
    check_positive("delta", delta)?;
    let solved: Vec<(f64, Result<CausticPrediction>)> = k_grid
        .par_iter()
        .filter(|&&k| k != 0.0)
        .map(|&k| {
            let point = (|| {
                if k.is_nan() || k.abs() >= 1.0 {
                    return Err(invalid("k", format!("grid value {k} outside (-1, 1)")));
                }
                let time = solve_caustic_equation(k, kick_strength, delta, m)?;
                let theta = Pendulum::from_modulus(k, kick_strength, delta)?.angle(time)?;
                Ok(CausticPrediction {
                    m,
                    k,
                    time,
                    kick_index: (time / delta).round() as usize,
                    theta,
                })
            })();
            (k, point)
        })
        .collect();

    let mut points = vec![cusp_point(kick_strength, delta, m)];
    let mut failures = Vec::new();
    for (k, r) in solved {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push((k, e)),
        }
    }
    points.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(CausticCurve { points, failures })
}

/// `∂θ/∂θ0` at time `t` along the orbit launched from `theta0`.
pub fn variational_derivative(theta0: f64, t: f64, kick_strength: f64, delta: f64) -> Result<f64> {
    Pendulum::new(theta0, kick_strength, delta)?.variational(finite("t", t)?)
}

/// Gelfand–Yaglom determinant `u(t)` for the fluctuation operator
/// `−d²/dt² + (K/Δ) cos θ(t)` along the orbit launched from `theta0`.
pub fn gelfand_yaglom(theta0: f64, t: f64, kick_strength: f64, delta: f64) -> Result<f64> {
    Pendulum::new(theta0, kick_strength, delta)?.gelfand_yaglom(finite("t", t)?)
}
