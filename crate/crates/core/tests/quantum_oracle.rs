use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotor_core::quantum::{axis_peak, first_cusp_window, FloquetPropagator};
use rotor_core::state::{momentum_of_index, to_angle, to_momentum, uniform_background};
use rotor_core::{evolve, floquet_step, make_params, peak_amplitude, uniform_state, KickWindow, WaveState};

fn random_state(rng: &mut ChaCha8Rng, m: usize) -> WaveState {
    let amps = (0..m)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    WaveState::normalized(amps).unwrap()
}

/// Explicit one-period matrix in the momentum basis, built entry by entry from
/// `⟨p'|θ_j⟩ e^{−iK cos θ_j} ⟨θ_j|p⟩ e^{−ip²Δ/2}` summed over the grid.
fn dense_operator(m: usize, k: f64, delta: f64) -> Vec<Vec<Complex64>> {
    let thetas: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
    (0..m)
        .map(|row| {
            let pr = momentum_of_index(row, m) as f64;
            (0..m)
                .map(|col| {
                    let pc = momentum_of_index(col, m) as f64;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &th in &thetas {
                        acc += Complex64::from_polar(1.0, -pr * th - k * th.cos() + pc * th);
                    }
                    acc / m as f64 * Complex64::from_polar(1.0, -0.5 * pc * pc * delta)
                })
                .collect()
        })
        .collect()
}

fn apply(op: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    op.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

#[test]
fn split_step_matches_dense_operator() {
    let (m, k, delta) = (64, 5.0, 1e-4);
    let op = dense_operator(m, k, delta);
    let params = make_params(k, delta, m as i64, 1, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let mut s = random_state(&mut rng, m);
        let mut v = s.amplitudes().to_vec();
        for _ in 0..10 {
            s = floquet_step(&s, &params).unwrap();
            v = apply(&op, &v);
        }
        for (a, b) in s.amplitudes().iter().zip(&v) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn dense_operator_with_larger_detuning() {
    let (m, k, delta) = (32, 1.3, 0.7);
    let op = dense_operator(m, k, delta);
    let params = make_params(k, delta, m as i64, 1, 0.0).unwrap();
    let s = uniform_state(m).unwrap();
    let out = floquet_step(&s, &params).unwrap();
    let v = apply(&op, s.amplitudes());
    for (a, b) in out.amplitudes().iter().zip(&v) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn composition_of_runs() {
    let params = make_params(5.0, 1e-2, 512, 0, 0.0).unwrap();
    let s = uniform_state(512).unwrap();
    let whole = evolve(&s, &params.with_kicks(30)).unwrap();
    let first = evolve(&s, &params.with_kicks(12)).unwrap();
    let second = evolve(&first.final_state, &params.with_kicks(18)).unwrap();
    for n in 0..=30 {
        let row = if n <= 12 {
            first.field.row(n)
        } else {
            second.field.row(n - 12)
        };
        for (a, b) in whole.field.row(n).iter().zip(row) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn resonance_keeps_any_modulus_profile() {
    let params = make_params(5.0, 0.0, 1024, 20, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // A smooth random profile: only low momenta populated.
    let amps: Vec<Complex64> = (0..1024)
        .map(|i| {
            if momentum_of_index(i, 1024).abs() <= 6 {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let s = WaveState::normalized(amps).unwrap();
    let rec = evolve(&s, &params).unwrap();
    for n in 1..rec.field.n_rows() {
        for (a, b) in rec.field.row(n).iter().zip(rec.field.row(0)) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn parity_about_pi_is_preserved() {
    let m = 512;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut amps = vec![Complex64::new(0.0, 0.0); m];
    for p in 0..8i64 {
        let c = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        amps[rotor_core::state::index_of_momentum(p, m).unwrap()] = c;
        amps[rotor_core::state::index_of_momentum(-p, m).unwrap()] = c;
    }
    let s = WaveState::normalized(amps).unwrap();
    let rec = evolve(&s, &make_params(5.0, 1e-2, m as i64, 40, 0.0).unwrap()).unwrap();
    for n in 0..rec.field.n_rows() {
        let row = rec.field.row(n);
        for j in 1..m {
            assert!((row[j] - row[m - j]).abs() < 1e-10);
        }
    }
}

#[test]
fn unitarity_over_many_steps() {
    let params = make_params(5.0, 1e-4, 2048, 300, 0.0).unwrap();
    let rec = evolve(&uniform_state(2048).unwrap(), &params).unwrap();
    assert!(rec.max_norm_drift < 1e-10);
    for n in 0..rec.field.n_rows() {
        assert!((rec.field.row_norm_sqr(n) - 1.0).abs() < 1e-9);
    }
    for (n, v) in rec.axis_cut.iter().enumerate() {
        assert_eq!(*v, rec.field.value(n, 1024));
    }
}

#[test]
fn first_cusp_sits_on_the_axis() {
    let params = make_params(5.0, 1e-4, 2048, 110, 0.0).unwrap();
    let rec = evolve(&uniform_state(2048).unwrap(), &params).unwrap();
    let peak = peak_amplitude(&rec, KickWindow::new(40, 100)).unwrap();
    assert_eq!(peak.node, 1024);
    assert!((peak.theta - PI).abs() < 1e-15);
    let (kick, value) = axis_peak(&rec, first_cusp_window(5.0, 1e-4)).unwrap();
    assert_eq!(kick, peak.kick);
    assert_eq!(value, peak.value);
}

#[test]
fn free_rotation_of_eigenstate() {
    let params = make_params(0.0, 0.5, 16, 1, 0.0).unwrap();
    let s = WaveState::momentum_eigenstate(16, 3).unwrap();
    let out = floquet_step(&s, &params).unwrap();
    let expect = Complex64::from_polar(1.0, -9.0 * 0.25);
    assert!((out.amplitude(3).unwrap() - expect).norm() < 1e-14);
    assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
}

#[test]
fn propagator_reuse_matches_single_steps() {
    let params = make_params(2.0, 3e-3, 128, 1, 0.0).unwrap();
    let mut prop = FloquetPropagator::new(&params).unwrap();
    let mut a = uniform_state(128).unwrap();
    let mut b = a.clone();
    for _ in 0..5 {
        a = prop.step(&a).unwrap();
        b = floquet_step(&b, &params).unwrap();
    }
    assert_eq!(a, b);
}

#[test]
fn uniform_angle_profile() {
    for &m in &[2, 8, 256] {
        let a = to_angle(&uniform_state(m).unwrap());
        for v in a.values() {
            assert!((v.norm() - uniform_background()).abs() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn basis_round_trip(seed in any::<u64>(), exp in 1u32..12) {
        let m = 1usize << exp;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng, m);
        let back = to_momentum(&to_angle(&s));
        for (a, b) in s.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        let dens = to_angle(&s).norm_sqr();
        prop_assert!((dens - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_preserves_norm(seed in any::<u64>(), k in 0.0f64..10.0, delta in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng, 64);
        let params = make_params(k, delta, 64, 1, 0.0).unwrap();
        let out = floquet_step(&s, &params).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
