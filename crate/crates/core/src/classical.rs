//! Classical standard map, ε-classical map, ensembles and fold detection.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{finite, invalid, Result};
use crate::state::SimParams;

/// Chirikov threshold `K_c` for the onset of global chaos in the standard map.
pub const CHIRIKOV_THRESHOLD: f64 = 0.9716;

/// `KΔ` at which the ε-classical map is globally chaotic.
pub const GLOBAL_CHAOS_STRENGTH: f64 = 5.0;

/// Literature chaos thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosThresholds {
    pub chirikov: f64,
    pub global_chaos: f64,
}

impl Default for ChaosThresholds {
    fn default() -> Self {
        Self {
            chirikov: CHIRIKOV_THRESHOLD,
            global_chaos: GLOBAL_CHAOS_STRENGTH,
        }
    }
}

/// Angle in `[0, 2π)` and angular momentum just after a kick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub theta: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(theta: f64, p: f64) -> Self {
        Self { theta, p }
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed angular difference `a − b` folded into `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// `θ' = θ + pT (mod 2π)`, `p' = p + K sin θ'`.
pub fn standard_map_step(point: PhasePoint, kick_strength: f64, period: f64) -> Result<PhasePoint> {
    finite("theta", point.theta)?;
    finite("p", point.p)?;
    finite("K", kick_strength)?;
    finite("T", period)?;
    Ok(raw_step(point, kick_strength, period))
}

fn checked_point(point: PhasePoint) -> Result<PhasePoint> {
    Ok(PhasePoint::new(
        wrap_angle(finite("theta", point.theta)?),
        finite("p", point.p)?,
    ))
}

#[inline]
fn raw_step(point: PhasePoint, kick_strength: f64, period: f64) -> PhasePoint {
    let theta = wrap_angle(point.theta + point.p * period);
    PhasePoint {
        theta,
        p: point.p + kick_strength * theta.sin(),
    }
}

/// One step of the ε-classical map: the standard map with strength `KΔ` and unit period.
pub fn eps_classical_step(point: PhasePoint, kick_strength: f64, delta: f64) -> Result<PhasePoint> {
    finite("delta", delta)?;
    standard_map_step(point, kick_strength * delta, 1.0)
}

/// Which classical map to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// Strength `K`, period `T = 4π + Δ`.
    Standard,
    /// Strength `KΔ`, unit period.
    EpsClassical,
}

impl MapKind {
    /// `(strength, period)` the map uses for these parameters.
    pub fn coefficients(self, params: &SimParams) -> (f64, f64) {
        match self {
            MapKind::Standard => (params.kick_strength(), params.period()),
            MapKind::EpsClassical => (params.eps_strength(), 1.0),
        }
    }

    pub fn step(self, point: PhasePoint, params: &SimParams) -> Result<PhasePoint> {
        let (k, t) = self.coefficients(params);
        standard_map_step(point, k, t)
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapKind::Standard => "standard",
            MapKind::EpsClassical => "eps_classical",
        })
    }
}

impl FromStr for MapKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(MapKind::Standard),
            "eps_classical" | "eps" => Ok(MapKind::EpsClassical),
            other => Err(invalid("map", format!("unknown map kind `{other}`"))),
        }
    }
}

/// How an ensemble was seeded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub count: usize,
    pub p0: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

/// Ordered phase-space points; index `i` always descends from initial point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    pub points: Vec<PhasePoint>,
    pub provenance: Sampling,
}

impl ClassicalEnsemble {
    /// `count` points at momentum `p0` with `θ_i = lo + (hi − lo)·i/count`.
    pub fn uniform(count: usize, p0: f64, theta_lo: f64, theta_hi: f64) -> Self {
        let span = theta_hi - theta_lo;
        let points = (0..count)
            .map(|i| PhasePoint::new(wrap_angle(theta_lo + span * i as f64 / count as f64), p0))
            .collect();
        Self {
            points,
            provenance: Sampling {
                count,
                p0,
                theta_lo,
                theta_hi,
            },
        }
    }

    /// Ensemble from explicit angles, all at momentum `p0`.
    pub fn from_angles(thetas: &[f64], p0: f64) -> Self {
        let (lo, hi) = thetas
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &t| (l.min(t), h.max(t)));
        Self {
            points: thetas.iter().map(|&t| PhasePoint::new(wrap_angle(t), p0)).collect(),
            provenance: Sampling {
                count: thetas.len(),
                p0,
                theta_lo: lo,
                theta_hi: hi,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Iterates every point `n_steps` times. Returns `n_steps + 1` snapshots, the
/// first being the input.
pub fn propagate(
    ensemble: &ClassicalEnsemble,
    kind: MapKind,
    params: &SimParams,
    n_steps: usize,
) -> Result<Vec<ClassicalEnsemble>> {
    let (k, t) = kind.coefficients(params);
    for pt in &ensemble.points {
        standard_map_step(*pt, k, t)?;
    }
    let mut snapshots = Vec::with_capacity(n_steps + 1);
    snapshots.push(ensemble.clone());
    let mut current = ensemble.points.clone();
    for _ in 0..n_steps {
        for pt in &mut current {
            *pt = raw_step(*pt, k, t);
        }
        snapshots.push(ClassicalEnsemble {
            points: current.clone(),
            provenance: ensemble.provenance,
        });
    }
    Ok(snapshots)
}

/// Iterates a single trajectory, returning `n_steps + 1` points.
pub fn trajectory(start: PhasePoint, kind: MapKind, params: &SimParams, n_steps: usize) -> Result<Vec<PhasePoint>> {
    let (k, t) = kind.coefficients(params);
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut pt = checked_point(start)?;
    out.push(pt);
    for _ in 0..n_steps {
        pt = raw_step(pt, k, t);
        out.push(pt);
    }
    Ok(out)
}

/// A point where the trajectory family `θ_n(θ_0)` folds over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldPoint {
    pub step: usize,
    pub theta: f64,
}

/// Fold points of the family started at `p = 0` from each angle of `theta0_grid`.
///
/// At each step the derivative `∂θ_n/∂θ_0` is estimated by central differences
/// at interior grid nodes. Where it changes sign between neighbouring nodes, a
/// fold point is emitted at the midpoint of their current angles. Step 0 is
/// never a fold.
pub fn fold_detect(theta0_grid: &[f64], kind: MapKind, params: &SimParams, n_steps: usize) -> Result<Vec<FoldPoint>> {
    if theta0_grid.len() < 3 {
        return Err(invalid("theta0_grid", "needs at least 3 points"));
    }
    if theta0_grid.iter().any(|t| !t.is_finite()) || theta0_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("theta0_grid", "must be finite and strictly increasing"));
    }
    let (k, t) = kind.coefficients(params);
    finite("K", k)?;
    finite("T", t)?;
    let mut points: Vec<PhasePoint> = theta0_grid
        .iter()
        .map(|&th| PhasePoint::new(wrap_angle(th), 0.0))
        .collect();
    let n = points.len();
    let mut folds = Vec::new();
    let mut derivative = vec![0.0; n - 2];
    for step in 1..=n_steps {
        for pt in &mut points {
            *pt = raw_step(*pt, k, t);
        }
        for i in 1..n - 1 {
            let dtheta = angle_diff(points[i + 1].theta, points[i - 1].theta);
            derivative[i - 1] = dtheta / (theta0_grid[i + 1] - theta0_grid[i - 1]);
        }
        for i in 1..n - 2 {
            let (a, b) = (derivative[i - 1], derivative[i]);
            if (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0) {
                let half = 0.5 * angle_diff(points[i + 1].theta, points[i].theta);
                folds.push(FoldPoint {
                    step,
                    theta: wrap_angle(points[i].theta + half),
                });
            }
        }
    }
    Ok(folds)
}

/// Every iterate of every seed, seeds first, in step-major order.
pub fn poincare_section(
    params: &SimParams,
    kind: MapKind,
    seeds: &[PhasePoint],
    n_steps: usize,
) -> Result<Vec<PhasePoint>> {
    let ensemble = ClassicalEnsemble {
        points: seeds.to_vec(),
        provenance: Sampling {
            count: seeds.len(),
            p0: f64::NAN,
            theta_lo: f64::NAN,
            theta_hi: f64::NAN,
        },
    };
    let snapshots = propagate(&ensemble, kind, params, n_steps)?;
    Ok(snapshots.into_iter().flat_map(|s| s.points).collect())
}

/// Largest `|p − p_0|` each seed reaches within `n_steps`.
pub fn momentum_excursions(
    params: &SimParams,
    kind: MapKind,
    seeds: &[PhasePoint],
    n_steps: usize,
) -> Result<Vec<f64>> {
    let (k, t) = kind.coefficients(params);
    seeds
        .iter()
        .map(|&seed| {
            let mut pt = checked_point(seed)?;
            let mut max = 0.0f64;
            for _ in 0..n_steps {
                pt = raw_step(pt, k, t);
                max = max.max((pt.p - seed.p).abs());
            }
            Ok(max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::make_params;

    #[test]
    fn pi_is_a_fixed_point() {
        for &(k, t) in &[(5.0, 4.0 * PI), (0.3, 1.0), (100.0, 4.0 * PI + 0.1)] {
            let p = standard_map_step(PhasePoint::new(PI, 0.0), k, t).unwrap();
            assert_eq!(p.theta, PI);
            assert!(p.p.abs() < 1e-12);
        }
        let p = eps_classical_step(PhasePoint::new(PI, 0.0), 5.0, 1e-4).unwrap();
        assert_eq!(p.theta, PI);
    }

    #[test]
    fn free_motion_at_rest() {
        let p = standard_map_step(PhasePoint::new(1.0, 0.0), 0.0, 4.0 * PI).unwrap();
        assert_eq!(p, PhasePoint::new(1.0, 0.0));
    }

    #[test]
    fn wrapping_lands_in_range() {
        assert_eq!(wrap_angle(-1e-20), 0.0);
        assert_eq!(wrap_angle(TAU), 0.0);
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        let p = standard_map_step(PhasePoint::new(6.0, 1.0), 0.0, 1.0).unwrap();
        assert!(p.theta >= 0.0 && p.theta < TAU);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(standard_map_step(PhasePoint::new(f64::NAN, 0.0), 1.0, 1.0).is_err());
        assert!(standard_map_step(PhasePoint::new(0.0, 0.0), f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn map_kind_parsing() {
        assert_eq!("standard".parse::<MapKind>().unwrap(), MapKind::Standard);
        assert_eq!("eps_classical".parse::<MapKind>().unwrap(), MapKind::EpsClassical);
        assert!("henon".parse::<MapKind>().is_err());
    }

    #[test]
    fn empty_ensemble_gives_empty_snapshots() {
        let params = make_params(5.0, 1e-4, 8, 0, 0.0).unwrap();
        let e = ClassicalEnsemble::uniform(0, 0.0, 0.0, TAU);
        let snaps = propagate(&e, MapKind::EpsClassical, &params, 10).unwrap();
        assert_eq!(snaps.len(), 11);
        assert!(snaps.iter().all(|s| s.is_empty()));
    }

    #[test]
    fn fold_detect_needs_three_points() {
        let params = make_params(5.0, 1e-4, 8, 0, 0.0).unwrap();
        assert!(fold_detect(&[1.0, 2.0], MapKind::EpsClassical, &params, 5).is_err());
        assert!(fold_detect(&[1.0, 2.0, 1.5], MapKind::EpsClassical, &params, 5).is_err());
    }

    #[test]
    fn free_motion_never_folds() {
        let params = make_params(0.0, 1e-4, 8, 0, 0.0).unwrap();
        let grid: Vec<f64> = (0..64).map(|j| TAU * (j as f64 + 0.5) / 64.0).collect();
        for kind in [MapKind::Standard, MapKind::EpsClassical] {
            assert!(fold_detect(&grid, kind, &params, 200).unwrap().is_empty());
        }
    }

    #[test]
    fn section_with_zero_steps_returns_seeds() {
        let params = make_params(100.0, 0.001, 8, 0, 0.0).unwrap();
        let seeds = vec![PhasePoint::new(0.5, 0.0), PhasePoint::new(2.5, 0.1)];
        assert_eq!(
            poincare_section(&params, MapKind::EpsClassical, &seeds, 0).unwrap(),
            seeds
        );
    }
}
