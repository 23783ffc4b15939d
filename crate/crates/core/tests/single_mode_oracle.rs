//! Fock-space oracle against the closed-form single-mode witnesses.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use dephase_core::kernels::reduced_state_from_exponent;
use dephase_core::singlemode::{
    det_p, discrete_kernels, ept_value, gamma_integral_single, min_pt_eigenvalue, tau_ent_single,
};
use dephase_core::{FockSystem, ModeSpec, QubitBloch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn reduced_dynamics_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let omega = rng.random_range(0.5..2.0);
        let g = rng.random_range(0.05..0.4) * omega;
        let temperature = rng.random_range(0.2..2.0);
        let omega_q = rng.random_range(-1.0..1.0);
        let r: f64 = rng.random_range(0.1..1.0);
        let z = rng.random_range(-r..r);
        let state = QubitBloch::from_polar(r, z, rng.random_range(0.0..2.0 * PI)).unwrap();
        let mode = ModeSpec::new(omega, g, temperature, None).unwrap();
        let sys = FockSystem::new(mode, omega_q).unwrap();
        for k in 0..=40 {
            let t = 4.0 * PI / omega * k as f64 / 40.0;
            let got = sys.evolve(&state, t).unwrap().reduced_qubit();
            let want = reduced_state_from_exponent(&state, omega_q, t, gamma_integral_single(&mode, t));
            assert!((got.rho01 - want.rho01).norm() < 1e-8, "t = {t}: {} vs {}", got.rho01, want.rho01);
            assert!((got.rho00 - want.rho00).abs() < 1e-8);
        }
    }
}

#[test]
fn witnesses_are_sound_on_a_grid() {
    let state = QubitBloch::from_polar(0.75, 0.2, 0.0).unwrap();
    let temperatures: Vec<f64> = (0..8).map(|i| 0.1 * 25f64.powf(i as f64 / 7.0)).collect();
    for &temperature in &temperatures {
        let mode = ModeSpec::new(1.0, 0.2, temperature, None).unwrap();
        let sys = FockSystem::new(mode, 0.0).unwrap();
        for k in 1..=20 {
            let t = 2.0 * PI * k as f64 / 20.0;
            let lam = min_pt_eigenvalue(&sys.evolve(&state, t).unwrap()).unwrap();
            if det_p(&state, &mode, t).unwrap() >= 0.0 {
                assert!(lam >= -1e-8, "separable but NPT at T = {temperature}, t = {t}: {lam}");
            }
            if ept_value(&state, &mode, t).unwrap() < 0.0 {
                assert!(lam < 0.0, "witness fired but PPT at T = {temperature}, t = {t}");
            }
        }
    }
}

#[test]
fn kernels_and_classification_revive() {
    let mode = ModeSpec::new(1.3, 0.25, 0.6, None).unwrap();
    let period = 2.0 * PI / 1.3;
    for &t in &[0.4, 1.7, 3.1] {
        let a = discrete_kernels(&mode, t).unwrap();
        let b = discrete_kernels(&mode, t + 3.0 * period).unwrap();
        assert_relative_eq!(a.e, b.e, max_relative = 1e-9);
        assert_relative_eq!(a.s, b.s, max_relative = 1e-9);
        assert_relative_eq!(gamma_integral_single(&mode, t), gamma_integral_single(&mode, t + period), max_relative = 1e-9);
    }
    let state = QubitBloch::from_polar(0.75, 0.2, 0.0).unwrap();
    let times = tau_ent_single(&state, &mode, 3.0 * period);
    assert_eq!(times.len(), 6);
    for pair in times.chunks(2).collect::<Vec<_>>().windows(2) {
        assert_relative_eq!(pair[1][0] - pair[0][0], period, max_relative = 1e-12);
    }
}

#[test]
fn fock_crossings_track_closed_form() {
    let state = QubitBloch::from_polar(0.75, 0.2, 0.0).unwrap();
    for &temperature in &[0.3, 1.0, 1.8] {
        let mode = ModeSpec::new(1.0, 0.2, temperature, None).unwrap();
        let sys = FockSystem::new(mode, 0.0).unwrap();
        let numeric = sys.tau_crit(&state, 2.0 * PI, 400).unwrap();
        let analytic = tau_ent_single(&state, &mode, 2.0 * PI);
        assert_eq!(numeric.len(), analytic.len(), "T = {temperature}: {numeric:?} vs {analytic:?}");
        for (n, a) in numeric.iter().zip(&analytic) {
            assert!((n - a).abs() / a <= 0.02, "T = {temperature}: {n} vs {a}");
        }
    }
}

#[test]
fn pure_state_is_npt_immediately() {
    let state = QubitBloch::from_polar(1.0, 0.3, 0.5).unwrap();
    let mode = ModeSpec::new(1.0, 0.2, 0.5, None).unwrap();
    let sys = FockSystem::new(mode, 0.2).unwrap();
    assert!(min_pt_eigenvalue(&sys.evolve(&state, 0.05).unwrap()).unwrap() < 0.0);
    assert_eq!(tau_ent_single(&state, &mode, 1.0)[0], 0.0);
}
