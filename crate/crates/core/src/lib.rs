//! Quantum, classical and semiclassical dynamics of the kicked rotor near
//! the quantum resonance `T = 4π`, with tools for locating caustics and
//! measuring how cusp amplitudes scale with `K/Δ`.
//!
//! Angle-space values use the continuum normalization `∫|ψ|² dθ = 1`, so the
//! plane wave sits at `1/√(2π)` everywhere.

pub mod classical;
pub mod elliptic;
mod error;
pub mod nonlinear;
pub mod ode;
pub mod quantum;
pub mod scaling;
pub mod semiclassics;
pub mod state;

pub use classical::{fold_detect, propagate, ClassicalEnsemble, FoldPoint, MapKind, PhasePoint, Sampling};
pub use elliptic::{complete_k, jacobi, JacobiTriple};
pub use error::{Error, Result};
pub use nonlinear::{evolve_nonlinear, suppression_metric, NonlinearConfig, Variant};
pub use quantum::{evolve, floquet_step, peak_amplitude, EvolutionRecord, KickWindow, PeakSample};
pub use scaling::{fit_arnold_index, measure_cusp_amplitude, ScalingRecord};
pub use semiclassics::{caustic_curve, map_step_time, CausticCurve, CausticPrediction, Pendulum};
pub use state::{make_params, uniform_state, AmplitudeField, AngleGrid, AngleState, SimParams, WaveState};
