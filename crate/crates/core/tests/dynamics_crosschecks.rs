//! Cross-checks between the closed-form observables and the numerical
//! 6-level dynamics over large randomized parameter sweeps: the two code
//! paths share no arithmetic, so agreement here pins both.

use nvspin_core::dynamics::{
    build_hamiltonian, flip_probability_trace, manifold_splitting, run_sequence, xy8_trace,
    Manifold, NuclearSpin, Propagator, PulseSequence, Segment, SpinHamiltonianParams, SpinState,
    TimeGrid, Xy8Settings,
};
use nvspin_core::hfi::SecularParams;
use nvspin_core::observables::{at_field, FieldPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn random_params(rng: &mut ChaCha8Rng) -> (SecularParams, f64) {
    let a_zz = rng.gen_range(-1e4..=1e4);
    let t_nd = rng.gen_range(0.0..=1e3);
    let phi = rng.gen_range(-TAU..TAU);
    let b_gauss = rng.gen_range(0.0..=1e3);
    (SecularParams::with_phase(a_zz, t_nd, phi), b_gauss)
}

/// 1000 random (a_zz, t_nd, φ, B) draws: the numerically built 6-level
/// Hamiltonian must reproduce every closed-form splitting to 1e-9 kHz, and
/// the gridded flip-probability supremum must reproduce every closed-form
/// maximum flip probability to 1e-6.
#[test]
fn random_draws_match_closed_form_splittings_and_flip_maxima() {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    for draw in 0..1000 {
        let (sp, b_gauss) = random_params(&mut rng);
        let field = FieldPoint::new(b_gauss);
        let obs = at_field(&sp, &field);
        let params = SpinHamiltonianParams::secular(sp, b_gauss);
        let h = build_hamiltonian(&params);

        let cases = [
            (Manifold::Plus, obs.delta_plus_khz, obs.gamma_plus),
            (Manifold::Zero, obs.delta_n_khz, 0.0),
            (Manifold::Minus, obs.delta_minus_khz, obs.gamma_minus),
        ];
        for (manifold, delta_khz, gamma) in cases {
            let split = manifold_splitting(&h, manifold);
            assert!(
                (split - delta_khz).abs() < 1e-9,
                "draw {draw} {manifold:?}: splitting {split} vs closed form {delta_khz}"
            );

            let trace = flip_probability_trace(&params, manifold, TimeGrid::default())
                .expect("valid parameters");
            // The grid supremum can only undershoot the true maximum; the
            // default grid resolves one Rabi period finely enough that the
            // deficit stays below 1e-6 (and far below for generic draws).
            let deficit = gamma - trace.sup;
            assert!(
                (-1e-12..1e-6).contains(&deficit),
                "draw {draw} {manifold:?}: sup {} vs closed form {gamma}",
                trace.sup
            );
        }
    }
}

/// At zero field the ±1 manifolds are mirror images: both must reproduce
/// the zero-field flip maximum t²/Δ₀² and splitting Δ₀.
#[test]
fn zero_field_manifolds_are_degenerate_mirrors() {
    let mut rng = ChaCha8Rng::seed_from_u64(602);
    for _ in 0..100 {
        let (sp, _) = random_params(&mut rng);
        let params = SpinHamiltonianParams::secular(sp, 0.0);
        let h = build_hamiltonian(&params);
        let zf = nvspin_core::observables::zero_field(&sp).unwrap();
        let (delta0, gamma0) = (zf.delta0_khz, zf.gamma0);
        for manifold in [Manifold::Plus, Manifold::Minus] {
            assert!((manifold_splitting(&h, manifold) - delta0).abs() < 1e-9);
            let trace =
                flip_probability_trace(&params, manifold, TimeGrid::default()).unwrap();
            assert!((gamma0 - trace.sup).abs() < 1e-6);
        }
        assert!(manifold_splitting(&h, Manifold::Zero).abs() < 1e-12);
    }
}

/// Unitarity under time reversal: evolving forward then backward restores
/// the initial amplitudes elementwise.
#[test]
fn evolution_is_reversible() {
    let mut rng = ChaCha8Rng::seed_from_u64(603);
    for _ in 0..50 {
        let (sp, b_gauss) = random_params(&mut rng);
        let params = SpinHamiltonianParams::secular(sp, b_gauss);
        let prop = Propagator::new(&build_hamiltonian(&params)).unwrap();
        let init = SpinState::basis_state(Manifold::Minus, NuclearSpin::Up);
        let t_us = rng.gen_range(0.0..=50.0);
        let back = prop.evolve(&prop.evolve(&init, t_us), -t_us);
        let diff = (back.amplitudes() - init.amplitudes()).norm();
        assert!(diff < 1e-9, "round trip error {diff} at t = {t_us} µs");
    }
}

/// A 10⁴-segment sequence mixing free evolution, microwave rotations, and
/// radio-frequency drives must conserve the state norm to 1e-9 and report
/// the exact wall-clock total.
#[test]
fn ten_thousand_segment_sequence_conserves_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(604);
    let sp = SecularParams::with_phase(-49.1, 1.4, 0.3);
    let params = SpinHamiltonianParams::secular(sp, 338.2);

    let mut segments = Vec::with_capacity(10_000);
    let mut expected_time_us = 0.0;
    for k in 0..10_000usize {
        match k % 4 {
            0 => {
                let d = rng.gen_range(0.0..=2.0);
                expected_time_us += d;
                segments.push(Segment::Free { duration_us: d });
            }
            1 => segments.push(Segment::MwPulse {
                pair: (Manifold::Zero, Manifold::Minus),
                axis_phase_rad: rng.gen_range(0.0..TAU),
                angle_rad: rng.gen_range(-TAU..TAU),
                duration_us: None,
            }),
            2 => {
                let d_us = rng.gen_range(0.0..=1.0);
                expected_time_us += d_us;
                segments.push(Segment::MwPulse {
                    pair: (Manifold::Zero, Manifold::Plus),
                    axis_phase_rad: rng.gen_range(0.0..TAU),
                    angle_rad: rng.gen_range(-TAU..TAU),
                    duration_us: Some(d_us),
                });
            }
            _ => {
                let d_ms = rng.gen_range(0.0..=0.01);
                expected_time_us += d_ms * 1e3;
                segments.push(Segment::RfPulse {
                    frequency_khz: rng.gen_range(100.0..=500.0),
                    rabi_khz: rng.gen_range(0.0..=5.0),
                    duration_ms: d_ms,
                    phase_rad: rng.gen_range(0.0..TAU),
                });
            }
        }
    }

    let seq = PulseSequence::new(segments);
    let init = SpinState::basis_state(Manifold::Zero, NuclearSpin::Up);
    let out = run_sequence(&params, &seq, &init).unwrap();
    assert!((out.final_state.norm() - 1.0).abs() < 1e-9);
    assert!((out.total_time_us - expected_time_us).abs() < 1e-6 * expected_time_us);
    assert!(out.measurements.is_empty());
}

/// Without a transverse hyperfine component the nucleus never entangles
/// with the electron, so the echo signal is exactly flat in τ and depth.
#[test]
fn xy8_without_transverse_coupling_is_flat_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(605);
    let blocks: Vec<u32> = (1..=16).collect();
    for _ in 0..20 {
        let a_zz: f64 = rng.gen_range(-1e3..=1e3);
        let b_gauss = rng.gen_range(0.0..=1e3);
        let tau_us = rng.gen_range(0.05..=5.0);
        let params = SpinHamiltonianParams::secular(SecularParams::new(a_zz, 0.0), b_gauss);
        let trace = xy8_trace(&params, tau_us, &blocks, &Xy8Settings::default()).unwrap();
        for pt in &trace {
            assert!(
                (pt.coherence - 1.0).abs() < 1e-9,
                "coherence {} at N = {}, tau = {tau_us}",
                pt.coherence,
                pt.n_blocks
            );
        }
    }
}

/// The analytically located first echo resonance must sit at the deepest
/// point of a fine numerical τ scan.
#[test]
fn analytic_resonance_matches_numerical_minimum() {
    let sp = SecularParams::with_phase(-49.1, 1.4, 1.1);
    let params = SpinHamiltonianParams::secular(sp, 355.0);
    let tau_res = nvspin_core::dynamics::xy8_resonance_tau_us(&params).unwrap();

    let mut best = (f64::INFINITY, 0.0);
    let lo = tau_res * 0.98;
    let hi = tau_res * 1.02;
    let steps = 400;
    for k in 0..=steps {
        let tau = lo + (hi - lo) * k as f64 / steps as f64;
        let pt = &xy8_trace(&params, tau, &[8], &Xy8Settings::default()).unwrap()[0];
        if pt.coherence < best.0 {
            best = (pt.coherence, tau);
        }
    }
    let span = hi - lo;
    assert!(
        (best.1 - tau_res).abs() < span / 50.0,
        "scan minimum at {} vs analytic {tau_res}",
        best.1
    );
}
