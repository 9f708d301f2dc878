//! Run parameters, the angle grid, and the momentum-basis wave state.
//!
//! Momenta are integers `p ∈ {−M/2, …, M/2−1}` stored in FFT wrap-around
//! order: slot `i` holds `p = i` for `i < M/2` and `p = i − M` otherwise.
//! Momentum amplitudes are ℓ²-normalized. Angle-space values carry the
//! continuum density, `ψ(θ_j) = Σ_p c_p e^{ipθ_j} / √(2π)`, so the uniform
//! state reads `1/√(2π)` at every node and `Σ_j |ψ(θ_j)|² · 2π/M = 1`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

/// Basis size used when the caller does not choose one.
pub const DEFAULT_BASIS_SIZE: usize = 2048;

/// Allowed deviation of an input state's norm from 1 before a stepper rejects it.
pub const NORM_INPUT_TOLERANCE: f64 = 1e-9;

/// Uniform background amplitude `1/√(2π)` of the plane-wave state.
pub fn uniform_background() -> f64 {
    1.0 / TAU.sqrt()
}

/// Control parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    kick_strength: f64,
    delta: f64,
    period: f64,
    g: f64,
    basis_size: usize,
    n_kicks: usize,
}

impl SimParams {
    /// Kick strength `K`.
    pub fn kick_strength(&self) -> f64 {
        self.kick_strength
    }

    /// Detuning `Δ` from the `4π` resonance.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Kicking period `T = 4π + Δ`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Mean-field interaction strength.
    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    pub fn n_kicks(&self) -> usize {
        self.n_kicks
    }

    /// Effective strength `KΔ` of the ε-classical map.
    pub fn eps_strength(&self) -> f64 {
        self.kick_strength * self.delta
    }

    /// Same parameters with a different kick count.
    pub fn with_kicks(mut self, n_kicks: usize) -> Self {
        self.n_kicks = n_kicks;
        self
    }

    /// Same parameters with a different interaction strength.
    pub fn with_g(mut self, g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(invalid("g", "must be finite"));
        }
        self.g = g;
        Ok(self)
    }

    pub fn with_basis_size(self, basis_size: usize) -> Result<Self> {
        check_basis_size(basis_size)?;
        Ok(Self { basis_size, ..self })
    }
}

fn check_basis_size(basis_size: usize) -> Result<()> {
    if basis_size < 2 || !basis_size.is_multiple_of(2) {
        return Err(invalid(
            "basis_size",
            format!("must be an even integer >= 2, got {basis_size}"),
        ));
    }
    Ok(())
}

/// Validates and assembles run parameters. `K = 0` is admitted (free evolution).
///
/// `n_kicks` is signed only so that a negative request can be reported
/// instead of wrapping.
pub fn make_params(kick_strength: f64, delta: f64, basis_size: i64, n_kicks: i64, g: f64) -> Result<SimParams> {
    if !kick_strength.is_finite() || kick_strength < 0.0 {
        return Err(invalid("K", format!("must be finite and >= 0, got {kick_strength}")));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(invalid("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if !g.is_finite() {
        return Err(invalid("g", "must be finite"));
    }
    if basis_size <= 0 {
        return Err(invalid(
            "basis_size",
            format!("must be an even integer >= 2, got {basis_size}"),
        ));
    }
    let basis_size = basis_size as usize;
    check_basis_size(basis_size)?;
    if n_kicks < 0 {
        return Err(invalid("n_kicks", format!("must be >= 0, got {n_kicks}")));
    }
    let period = 4.0 * PI + delta;
    // Keep `period - 4π == delta` bit-exact; fall back to reconstructing the
    // period from the stored difference when rounding would break it.
    let delta = if period - 4.0 * PI == delta {
        delta
    } else {
        period - 4.0 * PI
    };
    Ok(SimParams {
        kick_strength,
        delta,
        period,
        g,
        basis_size,
        n_kicks: n_kicks as usize,
    })
}

/// Momentum carried by storage slot `index` of an `M`-slot vector.
pub fn momentum_of_index(index: usize, basis_size: usize) -> i64 {
    let half = basis_size / 2;
    if index < half {
        index as i64
    } else {
        index as i64 - basis_size as i64
    }
}

/// Storage slot of momentum `p`, if it is representable.
pub fn index_of_momentum(p: i64, basis_size: usize) -> Option<usize> {
    let half = (basis_size / 2) as i64;
    if p < -half || p >= half {
        None
    } else if p >= 0 {
        Some(p as usize)
    } else {
        Some((p + basis_size as i64) as usize)
    }
}

/// Equally spaced angles `θ_j = 2πj/M` on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    nodes: Vec<f64>,
}

impl AngleGrid {
    pub fn new(size: usize) -> Result<Self> {
        check_basis_size(size)?;
        let nodes = (0..size).map(|j| TAU * j as f64 / size as f64).collect();
        Ok(Self { nodes })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.size() as f64
    }

    /// Index of the node closest to `theta` (taken modulo 2π); ties go to the lower index.
    pub fn nearest_node(&self, theta: f64) -> usize {
        let m = self.size();
        let x = theta.rem_euclid(TAU) / self.spacing();
        let lower = x.floor();
        let j = if x - lower > 0.5 { lower + 1.0 } else { lower };
        (j as usize) % m
    }

    /// Node nearest to `π`; exactly `M/2` for even `M`.
    pub fn pi_node(&self) -> usize {
        self.size() / 2
    }
}

/// Quantum state in the truncated integer-momentum basis.
#[derive(Clone, PartialEq)]
pub struct WaveState {
    amplitudes: Vec<Complex64>,
}

impl fmt::Debug for WaveState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveState")
            .field("basis_size", &self.amplitudes.len())
            .field("norm_sqr", &self.norm_sqr())
            .finish()
    }
}

impl WaveState {
    /// Wraps amplitudes in wrap-around order after rescaling them to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_basis_size(amplitudes.len())?;
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("amplitudes", "norm must be finite and nonzero"));
        }
        for c in &mut amplitudes {
            *c /= norm;
        }
        Ok(Self { amplitudes })
    }

    /// Momentum eigenstate `|p⟩`.
    pub fn momentum_eigenstate(basis_size: usize, p: i64) -> Result<Self> {
        check_basis_size(basis_size)?;
        let slot =
            index_of_momentum(p, basis_size).ok_or_else(|| invalid("p", format!("momentum {p} outside the basis")))?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis_size];
        amplitudes[slot] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis_size(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitudes in wrap-around order.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, p: i64) -> Option<Complex64> {
        index_of_momentum(p, self.basis_size()).map(|i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Probability carried by momenta with `|p| ≥ M/4`.
    pub fn tail_mass(&self) -> f64 {
        let quarter = (self.basis_size() / 4) as i64;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| momentum_of_index(*i, self.basis_size()).abs() >= quarter)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        let deviation = (self.norm_sqr().sqrt() - 1.0).abs();
        if deviation > NORM_INPUT_TOLERANCE || !deviation.is_finite() {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(())
    }
}

/// Plane-wave initial state `ψ(θ) = 1/√(2π)`: all weight on `p = 0`.
pub fn uniform_state(basis_size: usize) -> Result<WaveState> {
    WaveState::momentum_eigenstate(basis_size, 0)
}

/// Wave function sampled on the angle grid, continuum-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleState {
    values: Vec<Complex64>,
}

impl AngleState {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        check_basis_size(values.len())?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_j |ψ(θ_j)|² · 2π/M`.
    pub fn norm_sqr(&self) -> f64 {
        let w = TAU / self.values.len() as f64;
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * w
    }
}

/// Cached FFT plans for switching between momentum and angle representations.
#[derive(Clone)]
pub struct Fourier {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    to_angle_scale: f64,
    to_momentum_scale: f64,
}

impl fmt::Debug for Fourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier").field("size", &self.size).finish()
    }
}

impl Fourier {
    pub fn new(size: usize) -> Result<Self> {
        check_basis_size(size)?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Ok(Self {
            size,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            to_angle_scale: 1.0 / TAU.sqrt(),
            to_momentum_scale: TAU.sqrt() / size as f64,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Momentum amplitudes → continuum angle values, in place.
    pub fn to_angle_in_place(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.size);
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        let s = self.to_angle_scale;
        buf.iter_mut().for_each(|c| *c *= s);
    }

    /// Continuum angle values → momentum amplitudes, in place.
    pub fn to_momentum_in_place(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.size);
        self.forward.process_with_scratch(buf, &mut self.scratch);
        let s = self.to_momentum_scale;
        buf.iter_mut().for_each(|c| *c *= s);
    }
}

/// Angle representation of `state`.
pub fn to_angle(state: &WaveState) -> AngleState {
    let mut fourier = Fourier::new(state.basis_size()).expect("WaveState has a valid size");
    let mut values = state.amplitudes.clone();
    fourier.to_angle_in_place(&mut values);
    AngleState { values }
}

/// Momentum representation of an angle-space wave function.
///
/// The result is norm-preserving but not renormalized.
pub fn to_momentum(field: &AngleState) -> WaveState {
    let mut fourier = Fourier::new(field.len()).expect("AngleState has a valid size");
    let mut amplitudes = field.values.clone();
    fourier.to_momentum_in_place(&mut amplitudes);
    WaveState { amplitudes }
}

/// Like [`to_momentum`], but checks the size against an expected basis.
pub fn to_momentum_sized(field: &AngleState, basis_size: usize) -> Result<WaveState> {
    if field.len() != basis_size {
        return Err(Error::SizeMismatch {
            expected: basis_size,
            actual: field.len(),
        });
    }
    Ok(to_momentum(field))
}

/// `|ψ(θ_j, t_n)|` for every recorded kick `n` (rows) and grid node `j` (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeField {
    grid: AngleGrid,
    rows: usize,
    values: Vec<f64>,
}

impl AmplitudeField {
    pub fn new(grid: AngleGrid) -> Self {
        Self {
            grid,
            rows: 0,
            values: Vec::new(),
        }
    }

    /// Builds a field from row-major data.
    pub fn from_rows(grid: AngleGrid, values: Vec<f64>) -> Result<Self> {
        let m = grid.size();
        if !values.len().is_multiple_of(m) {
            return Err(Error::SizeMismatch {
                expected: m * (values.len() / m + 1),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("values", "amplitudes must be finite and non-negative"));
        }
        Ok(Self {
            rows: values.len() / m,
            grid,
            values,
        })
    }

    pub(crate) fn push_row(&mut self, angle_values: &[Complex64]) {
        debug_assert_eq!(angle_values.len(), self.grid.size());
        self.values.extend(angle_values.iter().map(|c| c.norm()));
        self.rows += 1;
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    /// Number of recorded kicks (row 0 is the initial state).
    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.size()
    }

    pub fn row(&self, kick: usize) -> &[f64] {
        let m = self.grid.size();
        &self.values[kick * m..(kick + 1) * m]
    }

    pub fn value(&self, kick: usize, node: usize) -> f64 {
        self.values[kick * self.grid.size() + node]
    }

    /// Row-major flat view.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_j value² · 2π/M` for one row.
    pub fn row_norm_sqr(&self, kick: usize) -> f64 {
        self.row(kick).iter().map(|v| v * v).sum::<f64>() * self.grid.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_params_accepts_figure_one_values() {
        let p = make_params(5.0, 1e-4, 2048, 300, 0.0).unwrap();
        assert_eq!(p.period(), 4.0 * PI + 1e-4);
        assert_eq!(p.period() - 4.0 * PI, p.delta());
        assert_eq!(p.basis_size(), 2048);
        assert_eq!(p.n_kicks(), 300);
    }

    #[test]
    fn make_params_degenerate() {
        let p = make_params(0.0, 0.0, 2, 0, 0.0).unwrap();
        assert_eq!(p.period(), 4.0 * PI);
        assert_eq!(p.n_kicks(), 0);
    }

    #[test]
    fn make_params_rejects_bad_input() {
        assert!(make_params(5.0, 1e-4, 2047, 10, 0.0).is_err());
        assert!(make_params(5.0, 1e-4, 0, 10, 0.0).is_err());
        assert!(make_params(5.0, 1e-4, -4, 10, 0.0).is_err());
        assert!(make_params(5.0, -1e-4, 2048, 10, 0.0).is_err());
        assert!(make_params(5.0, 1e-4, 2048, -1, 0.0).is_err());
        assert!(make_params(-1.0, 1e-4, 2048, 1, 0.0).is_err());
        assert!(make_params(f64::NAN, 1e-4, 2048, 1, 0.0).is_err());
    }

    #[test]
    fn stored_delta_matches_period_offset() {
        for &d in &[1e-4, 5e-4, 1e-3, 0.1, 2f64.sqrt(), 1.0 / 3.0, 0.05, 7e-9] {
            let p = make_params(1.0, d, 8, 1, 0.0).unwrap();
            assert_eq!(p.period() - 4.0 * PI, p.delta(), "delta {d}");
            assert!((p.delta() - d).abs() <= 4.0 * f64::EPSILON * 4.0 * PI);
        }
    }

    #[test]
    fn momentum_layout_is_wrap_around() {
        let m = 8;
        let ps: Vec<i64> = (0..m).map(|i| momentum_of_index(i, m)).collect();
        assert_eq!(ps, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for (i, p) in ps.iter().enumerate() {
            assert_eq!(index_of_momentum(*p, m), Some(i));
        }
        assert_eq!(index_of_momentum(4, m), None);
        assert_eq!(index_of_momentum(-5, m), None);
    }

    #[test]
    fn grid_nodes_exact() {
        let g = AngleGrid::new(256).unwrap();
        assert_eq!(g.node(0), 0.0);
        for j in 0..256 {
            assert_eq!(g.node(j), TAU * j as f64 / 256.0);
        }
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.pi_node(), 128);
        assert_eq!(g.node(g.pi_node()), PI);
        assert_eq!(g.nearest_node(PI + 1e-9), 128);
        assert_eq!(g.nearest_node(TAU - 1e-9), 0);
    }

    #[test]
    fn uniform_state_has_single_amplitude() {
        let s = uniform_state(8).unwrap();
        assert_eq!(s.amplitude(0), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(s.amplitudes().iter().filter(|c| c.norm() != 0.0).count(), 1);
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(uniform_state(7).is_err());
    }

    #[test]
    fn uniform_state_is_flat_in_angle() {
        let a = to_angle(&uniform_state(64).unwrap());
        for v in a.values() {
            assert!((v.norm() - uniform_background()).abs() < 1e-15);
        }
        assert!((a.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unit_momentum_has_plane_wave_phase() {
        let m = 32;
        let grid = AngleGrid::new(m).unwrap();
        let a = to_angle(&WaveState::momentum_eigenstate(m, 1).unwrap());
        for (j, v) in a.values().iter().enumerate() {
            let expect = Complex64::from_polar(uniform_background(), grid.node(j));
            assert!((v - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn size_mismatch_is_reported() {
        let a = to_angle(&uniform_state(8).unwrap());
        assert!(matches!(
            to_momentum_sized(&a, 16),
            Err(Error::SizeMismatch {
                expected: 16,
                actual: 8
            })
        ));
    }

    #[test]
    fn tail_mass_counts_outer_quarter() {
        let s = WaveState::momentum_eigenstate(16, -4).unwrap();
        assert_eq!(s.tail_mass(), 1.0);
        let s = WaveState::momentum_eigenstate(16, 3).unwrap();
        assert_eq!(s.tail_mass(), 0.0);
    }
}
