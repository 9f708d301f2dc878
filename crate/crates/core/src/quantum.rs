//! Split-step Floquet evolution of the linear kicked rotor.
//!
//! One period applies the free phase `e^{−ip²T/2}` in the momentum basis and
//! the kick `e^{−iK cos θ}` on the angle grid. For integer `p` the free phase
//! reduces exactly to `e^{−ip²Δ/2}` because `e^{−i2πp²} = 1`; only the
//! reduced form is ever evaluated, which keeps the phase argument small.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::state::{momentum_of_index, AmplitudeField, AngleGrid, Fourier, SimParams, WaveState};

/// Largest momentum tail mass a run may accumulate before it is rejected.
pub const TAIL_MASS_LIMIT: f64 = 1e-10;

/// Reusable one-period propagator with cached phases and FFT plans.
#[derive(Debug, Clone)]
pub struct FloquetPropagator {
    fourier: Fourier,
    free_phase: Vec<Complex64>,
    kick_phase: Vec<Complex64>,
}

/// `e^{−ip²Δ/2}` for every slot, in wrap-around order.
pub(crate) fn free_phases(basis_size: usize, duration: f64) -> Vec<Complex64> {
    (0..basis_size)
        .map(|i| {
            let p = momentum_of_index(i, basis_size) as f64;
            Complex64::from_polar(1.0, -0.5 * p * p * duration)
        })
        .collect()
}

/// `e^{−iK cos θ_j}` on the grid.
pub(crate) fn kick_phases(grid: &AngleGrid, kick_strength: f64) -> Vec<Complex64> {
    grid.nodes()
        .iter()
        .map(|&theta| Complex64::from_polar(1.0, -kick_strength * theta.cos()))
        .collect()
}

impl FloquetPropagator {
    /// Propagator for the linear rotor; interaction strength in `params` is ignored.
    pub fn new(params: &SimParams) -> Result<Self> {
        let m = params.basis_size();
        let grid = AngleGrid::new(m)?;
        Ok(Self {
            fourier: Fourier::new(m)?,
            free_phase: free_phases(m, params.delta()),
            kick_phase: kick_phases(&grid, params.kick_strength()),
        })
    }

    pub fn basis_size(&self) -> usize {
        self.free_phase.len()
    }

    /// Advances momentum amplitudes by one period in place. On return `buf`
    /// holds momentum amplitudes again and `angle` the post-kick angle values.
    pub(crate) fn step_in_place(&mut self, buf: &mut [Complex64], angle: &mut [Complex64]) {
        for (c, f) in buf.iter_mut().zip(&self.free_phase) {
            *c *= f;
        }
        self.fourier.to_angle_in_place(buf);
        for (c, k) in buf.iter_mut().zip(&self.kick_phase) {
            *c *= k;
        }
        angle.copy_from_slice(buf);
        self.fourier.to_momentum_in_place(buf);
    }

    pub fn step(&mut self, state: &WaveState) -> Result<WaveState> {
        check_state(state, self.basis_size())?;
        let mut buf = state.amplitudes().to_vec();
        let mut angle = vec![Complex64::new(0.0, 0.0); buf.len()];
        self.step_in_place(&mut buf, &mut angle);
        Ok(WaveState::from_raw(buf))
    }

    pub(crate) fn fourier_mut(&mut self) -> &mut Fourier {
        &mut self.fourier
    }
}

pub(crate) fn check_state(state: &WaveState, basis_size: usize) -> Result<()> {
    if state.basis_size() != basis_size {
        return Err(Error::SizeMismatch {
            expected: basis_size,
            actual: state.basis_size(),
        });
    }
    state.check_normalized()
}

/// One Floquet period `e^{−iK cos θ} e^{−ip²Δ/2}` applied to `state`.
pub fn floquet_step(state: &WaveState, params: &SimParams) -> Result<WaveState> {
    if params.g() != 0.0 {
        return Err(invalid("g", "linear stepper requires g = 0; use the nonlinear module"));
    }
    FloquetPropagator::new(params)?.step(state)
}

/// Result of a multi-kick run.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    pub params: SimParams,
    pub field: AmplitudeField,
    /// `|ψ(π, t_n)|` per kick, read from grid node `M/2`.
    pub axis_cut: Vec<f64>,
    /// Largest `Σ_{|p|≥M/4} |c_p|²` seen over the run.
    pub tail_mass: f64,
    /// Largest `|Σ|c_p|² − 1|` seen over the run.
    pub max_norm_drift: f64,
    pub final_state: WaveState,
}

impl EvolutionRecord {
    /// Index of the θ = π column.
    pub fn axis_node(&self) -> usize {
        self.field.grid().pi_node()
    }
}

/// Accumulates rows and diagnostics while a stepper runs.
pub(crate) struct Recorder {
    field: AmplitudeField,
    axis_cut: Vec<f64>,
    tail_mass: f64,
    max_norm_drift: f64,
    pi_node: usize,
}

impl Recorder {
    pub(crate) fn start(grid: AngleGrid, initial: &WaveState, fourier: &mut Fourier) -> Self {
        let pi_node = grid.pi_node();
        let mut rec = Self {
            field: AmplitudeField::new(grid),
            axis_cut: Vec::new(),
            tail_mass: 0.0,
            max_norm_drift: 0.0,
            pi_node,
        };
        let mut angle = initial.amplitudes().to_vec();
        fourier.to_angle_in_place(&mut angle);
        rec.observe(initial.amplitudes(), &angle);
        rec
    }

    pub(crate) fn observe(&mut self, momentum: &[Complex64], angle: &[Complex64]) {
        self.field.push_row(angle);
        self.axis_cut.push(angle[self.pi_node].norm());
        let m = momentum.len();
        let quarter = (m / 4) as i64;
        let mut norm = 0.0;
        let mut tail = 0.0;
        for (i, c) in momentum.iter().enumerate() {
            let w = c.norm_sqr();
            norm += w;
            if momentum_of_index(i, m).abs() >= quarter {
                tail += w;
            }
        }
        self.tail_mass = self.tail_mass.max(tail);
        self.max_norm_drift = self.max_norm_drift.max((norm - 1.0).abs());
    }

    pub(crate) fn finish(self, params: SimParams, final_state: WaveState) -> Result<EvolutionRecord> {
        // At Δ = 0 the free phase e^{−i2πp²} is 1 for every integer p, so
        // wrap-around is exact and a full tail costs nothing.
        let exact_wrap = params.delta() == 0.0 && params.g() == 0.0;
        if self.tail_mass > TAIL_MASS_LIMIT && !exact_wrap {
            return Err(Error::TailMass {
                mass: self.tail_mass,
                limit: TAIL_MASS_LIMIT,
            });
        }
        Ok(EvolutionRecord {
            params,
            field: self.field,
            axis_cut: self.axis_cut,
            tail_mass: self.tail_mass,
            max_norm_drift: self.max_norm_drift,
            final_state,
        })
    }
}

/// Applies `params.n_kicks()` Floquet periods, recording `|ψ|` after every kick.
pub fn evolve(state: &WaveState, params: &SimParams) -> Result<EvolutionRecord> {
    if params.g() != 0.0 {
        return Err(invalid(
            "g",
            "linear evolution requires g = 0; use the nonlinear module",
        ));
    }
    let mut prop = FloquetPropagator::new(params)?;
    check_state(state, prop.basis_size())?;
    let grid = AngleGrid::new(params.basis_size())?;
    let mut rec = Recorder::start(grid, state, prop.fourier_mut());
    let mut buf = state.amplitudes().to_vec();
    let mut angle = vec![Complex64::new(0.0, 0.0); buf.len()];
    for _ in 0..params.n_kicks() {
        prop.step_in_place(&mut buf, &mut angle);
        rec.observe(&buf, &angle);
    }
    rec.finish(*params, WaveState::from_raw(buf))
}

/// Inclusive range of kick indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KickWindow {
    pub start: usize,
    pub end: usize,
}

impl KickWindow {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    /// `[⌈lo·center⌉, ⌊hi·center⌋]`, with the start kept at kick 1 or later.
    pub fn around(center: f64, lo: f64, hi: f64) -> Self {
        let start = ((lo * center).ceil().max(1.0)) as usize;
        let end = ((hi * center).floor().max(0.0)) as usize;
        Self { start, end }
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            self.end - self.start + 1
        }
    }

    pub(crate) fn check(&self, recorded: usize) -> Result<()> {
        if self.is_empty() || self.end >= recorded {
            return Err(Error::InvalidWindow {
                start: self.start,
                end: self.end,
                recorded,
            });
        }
        Ok(())
    }
}

/// Default search window for the first cusp: `[0.5, 1.5]` times the mean caustic time.
pub fn first_cusp_window(kick_strength: f64, delta: f64) -> KickWindow {
    KickWindow::around(
        crate::semiclassics::mean_caustic_kicks(kick_strength, delta, 0),
        0.5,
        1.5,
    )
}

/// Location and height of a field maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSample {
    pub kick: usize,
    pub node: usize,
    pub theta: f64,
    pub value: f64,
}

/// Maximum of the field over a kick window. Ties go to the smallest kick,
/// then to the smallest node.
pub fn peak_amplitude(record: &EvolutionRecord, window: KickWindow) -> Result<PeakSample> {
    field_peak(&record.field, window)
}

pub(crate) fn field_peak(field: &AmplitudeField, window: KickWindow) -> Result<PeakSample> {
    window.check(field.n_rows())?;
    let mut best: Option<(usize, usize, f64)> = None;
    for kick in window.start..=window.end {
        for (node, &v) in field.row(kick).iter().enumerate() {
            if best.is_none_or(|(_, _, b)| v > b) {
                best = Some((kick, node, v));
            }
        }
    }
    let (kick, node, value) = best.expect("window is non-empty");
    Ok(PeakSample {
        kick,
        node,
        theta: field.grid().node(node),
        value,
    })
}

/// Maximum of the θ = π axis cut over a window, ties to the earliest kick.
pub fn axis_peak(record: &EvolutionRecord, window: KickWindow) -> Result<(usize, f64)> {
    window.check(record.axis_cut.len())?;
    let mut best = (window.start, record.axis_cut[window.start]);
    for kick in window.start + 1..=window.end {
        if record.axis_cut[kick] > best.1 {
            best = (kick, record.axis_cut[kick]);
        }
    }
    Ok(best)
}
