//! Amplitude scaling at the first cusp.
//!
//! Near the cusp the wave amplitude grows as `|λ|^{1/4}` with
//! `λ = −(π/48)√(K/Δ)`, i.e. as `(K/Δ)^{1/8}`. The prefactor 2 of the
//! predicted amplitude is an empirical constant fitted to simulations.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quantum::{evolve, first_cusp_window, peak_amplitude, PeakSample};
use crate::semiclassics::mean_caustic_kicks;
use crate::state::{uniform_state, SimParams};

/// Empirical prefactor in `2|λ|^{1/4}`.
pub const CUSP_PREFACTOR: f64 = 2.0;

/// Smallest allowed quadrature node count for [`cusp_integral`].
pub const MIN_QUAD_POINTS: usize = 1000;

/// Relative change between node doublings above which [`cusp_integral`] fails.
pub const QUAD_TOLERANCE: f64 = 1e-4;

/// The first cusp must be at least this many kicks away to be measured.
pub const MIN_CAUSTIC_KICKS: f64 = 5.0;

/// Cusp amplitude measured on one `(K, Δ)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRecord {
    pub kick_strength: f64,
    pub delta: f64,
    pub lambda: f64,
    pub measured: f64,
    pub predicted: f64,
    pub peak: PeakSample,
}

fn check_positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Quartic coefficient `λ = −(π/48)√(K/Δ)` at the first cusp time.
pub fn lambda_param(kick_strength: f64, delta: f64) -> f64 {
    -(PI / 48.0) * (kick_strength / delta).sqrt()
}

/// `2|λ|^{1/4}`.
pub fn predicted_cusp_amplitude(kick_strength: f64, delta: f64) -> f64 {
    CUSP_PREFACTOR * lambda_param(kick_strength, delta).abs().powf(0.25)
}

/// Runs the uniform start through the first cusp and records the peak amplitude
/// in the default first-cusp window.
pub fn measure_cusp_amplitude(params: &SimParams) -> Result<ScalingRecord> {
    if params.g() != 0.0 {
        return Err(invalid("g", "cusp scaling is defined for the linear rotor"));
    }
    let (k, d) = (
        check_positive("K", params.kick_strength())?,
        check_positive("delta", params.delta())?,
    );
    let expected = mean_caustic_kicks(k, d, 0);
    if expected < MIN_CAUSTIC_KICKS {
        return Err(invalid(
            "delta",
            format!("first cusp expected after {expected:.2} kicks; need at least {MIN_CAUSTIC_KICKS}"),
        ));
    }
    let window = first_cusp_window(k, d);
    let run = params.with_kicks(window.end);
    let record = evolve(&uniform_state(params.basis_size())?, &run)?;
    let peak = peak_amplitude(&record, window)?;
    Ok(ScalingRecord {
        kick_strength: k,
        delta: d,
        lambda: lambda_param(k, d),
        measured: peak.value,
        predicted: predicted_cusp_amplitude(k, d),
        peak,
    })
}

/// Measures every `(K, Δ)` pair in parallel; output order follows the input.
pub fn measure_grid(params: &[SimParams]) -> Vec<Result<ScalingRecord>> {
    params.par_iter().map(measure_cusp_amplitude).collect()
}

/// Least-squares line `log(measured) = exponent · log(K/Δ) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArnoldFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

impl ArnoldFit {
    /// Exponent against `log|λ|` (twice the `K/Δ` exponent).
    pub fn lambda_exponent(&self) -> f64 {
        2.0 * self.exponent
    }
}

/// Fits the power law `measured ∝ (K/Δ)^q` to the records.
pub fn fit_arnold_index(records: &[ScalingRecord]) -> Result<ArnoldFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .map(|r| ((r.kick_strength / r.delta).ln(), r.measured.ln()))
        .collect();
    fit_log_line(&points)
}

/// Least squares on `(log x, log y)` pairs; needs ≥ 3 points spanning a decade.
pub fn fit_log_line(points: &[(f64, f64)]) -> Result<ArnoldFit> {
    if points.len() < 3 {
        return Err(invalid("records", format!("need at least 3, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(invalid(
            "records",
            "amplitudes and parameters must be positive and finite",
        ));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), (x, _)| {
            (l.min(*x), h.max(*x))
        });
    if hi - lo < 10f64.ln() * (1.0 - 1e-12) {
        return Err(invalid("records", "K/Δ must span at least one decade"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (points
        .iter()
        .map(|p| {
            let r = p.1 - (exponent * p.0 + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ArnoldFit {
        exponent,
        intercept,
        residual,
    })
}

/// Prefactor `c` minimizing the log-space misfit of `c|λ|^{1/4}` to the records.
/// The published comparison uses the fixed [`CUSP_PREFACTOR`].
pub fn refit_prefactor(records: &[ScalingRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(invalid("records", "need at least one"));
    }
    let mean = records
        .iter()
        .map(|r| (r.measured / r.lambda.abs().powf(0.25)).ln())
        .sum::<f64>()
        / records.len() as f64;
    Ok(mean.exp())
}

fn trapezoid(delta_angle: f64, t: f64, kick_strength: f64, delta: f64, nodes: usize) -> Complex64 {
    let a = kick_strength / delta * t;
    let constant = 2.0 * a * delta_angle.cos() - kick_strength * delta_angle.sin() * delta_angle;
    let slope = kick_strength * delta_angle.sin();
    let h = TAU / nodes as f64;
    // Closed rule with half-weight endpoints. For delta_angle != 0 the linear
    // term breaks periodicity, so the open rule would only be first order.
    let f = |d0: f64| Complex64::from_polar(1.0, constant - a * d0.cos() + slope * d0);
    let interior: Complex64 = (1..nodes).map(|j| f(-PI + h * j as f64)).sum();
    let sum = interior + 0.5 * (f(-PI) + f(PI));
    sum * h
}

/// Unnormalized diffraction integral over `δ0 ∈ [−π, π]` of
/// `exp{i[(2K/Δ)t cos δ − (K/Δ)t cos δ0 − K sin δ (δ − δ0)]}`.
///
/// Evaluated with `quad_points` and `2·quad_points` trapezoid nodes; the finer
/// value is returned when the two agree to [`QUAD_TOLERANCE`].
pub fn cusp_integral(
    delta_angle: f64,
    t: f64,
    kick_strength: f64,
    delta: f64,
    quad_points: usize,
) -> Result<Complex64> {
    check_positive("t", t)?;
    check_positive("K", kick_strength)?;
    check_positive("delta", delta)?;
    if !delta_angle.is_finite() {
        return Err(invalid("delta_angle", "must be finite"));
    }
    if quad_points < MIN_QUAD_POINTS {
        return Err(invalid("quad_points", format!("must be >= {MIN_QUAD_POINTS}")));
    }
    let coarse = trapezoid(delta_angle, t, kick_strength, delta, quad_points);
    let fine = trapezoid(delta_angle, t, kick_strength, delta, 2 * quad_points);
    let change = (fine - coarse).norm() / fine.norm().max(f64::MIN_POSITIVE);
    if change > QUAD_TOLERANCE {
        return Err(Error::NonConvergence {
            change,
            nodes: quad_points,
            doubled: 2 * quad_points,
        });
    }
    Ok(fine)
}

/// First cusp time `(π/2)√(Δ/K)` in continuous time.
pub fn first_cusp_time(kick_strength: f64, delta: f64) -> f64 {
    0.5 * PI * (delta / kick_strength).sqrt()
}
