//! Acceptance gate: one test per numbered criterion, each printing a single
//! `ACCEPTANCE n: PASS/FAIL — detail` line (visible under
//! `cargo test -- --nocapture`) before asserting.
//!
//! Criterion 1 is expected to fail honestly: 53 of the 510 published Δ₀
//! values cannot be reconciled with the published (A_ZZ, A_nd) pairs under
//! any rounding of those two columns — see the assertion message for the
//! breakdown. The other half of that criterion (τ₀, geometry, runtime)
//! holds for all rows.

use nvspin_core::dipolar::{
    mirror_about_xz, t_tensor, tensor_in_azimuth_frame, DensityPoint, DipoleConstants,
    SpinDensityModel,
};
use nvspin_core::dynamics::{
    build_hamiltonian, endor_sweep, flip_probability_trace, manifold_splitting, ssr_trace,
    xy8_resonance_tau_us, xy8_trace, Manifold, NuclearSpin, RfRange, SpinHamiltonianParams,
    SsrParams, TimeGrid, Xy8Settings,
};
use nvspin_core::hfi::SecularParams;
use nvspin_core::observables::{at_field, infer_a_zz, Branch, FieldPoint, GAMMA_N_C13_KHZ_PER_G};
use nvspin_core::registry::{
    classify_axial, classify_families, parse_table, rank_by_lifetime, validate,
    ClusterTolerances, FamilyLabel,
};
use nvspin_core::nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::process::Command;
use std::time::{Duration, Instant};

const TABLE: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/sites.tsv"));

fn report(n: u32, pass: bool, detail: &str) {
    println!("ACCEPTANCE {n}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_01_dataset_reconciliation() {
    let started = Instant::now();
    let records = parse_table(TABLE).expect("shipped table parses");
    let rep = validate(&records);
    let elapsed = started.elapsed();

    let runtime_ok = elapsed < Duration::from_secs(1);
    let pass = rep.delta0_pass == 510
        && rep.tau0_pass == 510
        && rep.geometry_pass == 510
        && runtime_ok;
    report(
        1,
        pass,
        &format!(
            "delta0 {}/510, tau0 {}/510, geometry {}/510, runtime {:.0?}",
            rep.delta0_pass, rep.tau0_pass, rep.geometry_pass, elapsed
        ),
    );

    assert!(runtime_ok, "validation took {elapsed:?}");
    assert_eq!(rep.tau0_pass, 510);
    assert_eq!(rep.geometry_pass, 510);

    let failing: Vec<u32> = rep.verdicts.iter().filter(|v| !v.delta0_ok).map(|v| v.id).collect();
    let worst = rep
        .verdicts
        .iter()
        .max_by(|a, b| a.delta0_gap_khz.total_cmp(&b.delta0_gap_khz))
        .unwrap();
    assert_eq!(
        rep.delta0_pass, 510,
        "published delta0 reconciles for only {}/510 rows. The {} failing ids are {:?}. \
         Rows 4-6 are impossible under any reading: their printed delta0 sits ~4.0e3-4.1e3 kHz \
         *below* |A_ZZ| (worst gap {:.1} kHz at id {}), which sqrt(A_ZZ^2 + A_nd^2) >= |A_ZZ| \
         can never produce. The remaining 50 rows miss by 0.015-33 kHz, consistent with a \
         delta0 column computed from unrounded full-tensor diagonalization rather than from \
         the printed two-parameter values. tau0, which depends on the same two columns, \
         reconciles for all 510 rows.",
        510 - failing.len(),
        failing.len(),
        failing,
        worst.delta0_gap_khz,
        worst.id,
    );
}

#[test]
fn criterion_02_axial_identification() {
    let records = parse_table(TABLE).unwrap();
    let axial = classify_axial(&records, 0.01);
    let pass = axial == vec![7, 8, 469, 505];
    report(2, pass, &format!("axial sites at 0.01 A: {axial:?}"));
    assert!(pass, "expected [7, 8, 469, 505], got {axial:?}");
}

#[test]
fn criterion_03_family_recovery() {
    let records = parse_table(TABLE).unwrap();
    let classification = classify_families(&records, &ClusterTolerances::default(), None);

    let expected: [(FamilyLabel, &[u32]); 4] = [
        (FamilyLabel::St1, &[222, 255, 260]),
        (FamilyLabel::St2, &[223, 225, 256, 263, 269, 275]),
        (FamilyLabel::St3, &[214, 267, 277]),
        (FamilyLabel::St4, &[212, 216, 254, 264, 279, 286]),
    ];
    // Published per-family averages:
    // (a_zz, a_nd, gamma0 x 1e-3, delta0, r_cn, r_cz, r_cxy).
    let printed = [
        (-1001.6, 14.5, 0.2096, 1001.8, 4.78, 1.73, 4.45),
        (-204.9, 2.7, 0.1747, 204.9, 5.82, 2.25, 5.36),
        (-53.0, 1.3, 0.5734, 53.0, 7.78, 2.21, 7.46),
        (-51.9, 0.9, 0.3269, 51.9, 8.15, 2.24, 7.83),
    ];

    let mut detail = Vec::new();
    let mut pass = true;
    for ((label, members), row) in expected.iter().zip(printed) {
        let Some(fam) = classification.families.iter().find(|f| f.label == *label) else {
            pass = false;
            detail.push(format!("{label} missing"));
            continue;
        };
        let members_ok = fam.member_ids == *members;
        let a = &fam.averaged;
        let (azz, and, g_milli, d0, rcn, rcz, rcxy) = row;
        let averages_ok = (a.a_zz_khz - azz).abs() <= 0.3
            && (a.a_nd_khz - and).abs() <= 0.3
            && (a.delta0_khz - d0).abs() <= 0.3
            && (a.gamma0 - g_milli * 1e-3).abs() <= 0.02e-3
            && (a.r_cn_ang - rcn).abs() <= 0.02
            && (a.r_cz_ang - rcz).abs() <= 0.02
            && (a.r_cxy_ang - rcxy).abs() <= 0.02;
        pass &= members_ok && averages_ok;
        detail.push(format!(
            "{label} size {} members {} averages {}",
            fam.member_ids.len(),
            if members_ok { "ok" } else { "WRONG" },
            if averages_ok { "ok" } else { "WRONG" },
        ));
    }
    report(3, pass, &detail.join("; "));
    assert!(pass, "{}", detail.join("; "));
}

#[test]
fn criterion_04_stability_gap() {
    let records = parse_table(TABLE).unwrap();
    let ranked = rank_by_lifetime(&records, 30);

    let st_members: std::collections::BTreeSet<u32> = [
        222, 255, 260, 223, 225, 256, 263, 269, 275, 214, 267, 277, 212, 216, 254, 264, 279,
        286,
    ]
    .into_iter()
    .collect();
    let ranks_5_to_22: std::collections::BTreeSet<u32> =
        ranked[4..22].iter().map(|r| r.id).collect();
    let membership_ok = ranks_5_to_22 == st_members;
    let band_ok = ranked[4..22].iter().all(|r| (1e3..=1e4).contains(&r.tau0));
    let gap_ok = ranked[22].tau0 < 200.0;
    let pass = membership_ok && band_ok && gap_ok;
    report(
        4,
        pass,
        &format!(
            "ranks 5-22 are the 18 St members ({membership_ok}), tau0 in [1e3, 1e4] \
             ({band_ok}), rank 23 tau0 = {:.1} < 200 ({gap_ok})",
            ranked[22].tau0
        ),
    );
    assert!(membership_ok, "ranks 5-22: {ranks_5_to_22:?}");
    assert!(band_ok);
    assert!(gap_ok, "rank 23 tau0 = {}", ranked[22].tau0);
}

#[test]
fn criterion_05_endor_spectroscopy() {
    // gamma_n * B = 362.2 kHz exactly.
    let b_gauss = 362.2 / GAMMA_N_C13_KHZ_PER_G;
    let field = FieldPoint::new(b_gauss);
    let sp = SecularParams::new(-49.1, 1.4);
    let params = SpinHamiltonianParams::secular(sp, b_gauss);
    let range = RfRange::new(250.0, 450.0, 0.01).unwrap();

    let peak = |manifold| {
        let sweep =
            endor_sweep(&params, &range, 2.0, manifold, NuclearSpin::Up, None).unwrap();
        sweep
            .iter()
            .max_by(|a, b| a.flip_probability.total_cmp(&b.flip_probability))
            .unwrap()
            .frequency_khz
    };
    let peak_zero = peak(Manifold::Zero);
    let peak_minus = peak(Manifold::Minus);
    let inferred = infer_a_zz(313.1, &field, Branch::Minus);

    let zero_ok = (peak_zero - 362.2).abs() <= 0.2;
    let minus_ok = (peak_minus - 313.1).abs() <= 0.2;
    let infer_ok = (inferred.a_zz_khz - -49.1).abs() <= 0.05;
    let pass = zero_ok && minus_ok && infer_ok;
    report(
        5,
        pass,
        &format!(
            "m_S=0 peak {peak_zero:.2} kHz, m_S=-1 peak {peak_minus:.2} kHz, \
             inferred a_zz {:.3} kHz",
            inferred.a_zz_khz
        ),
    );
    assert!(zero_ok, "m_S=0 peak at {peak_zero}");
    assert!(minus_ok, "m_S=-1 peak at {peak_minus}");
    assert!(infer_ok, "inferred a_zz {}", inferred.a_zz_khz);
}

#[test]
fn criterion_06_dynamics_closed_form_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let mut worst_flip = 0.0_f64;
    let mut worst_split = 0.0_f64;
    for _ in 0..1000 {
        let sp = SecularParams::with_phase(
            rng.gen_range(-1e4..=1e4),
            rng.gen_range(0.0..=1e3),
            rng.gen_range(-TAU..TAU),
        );
        let b_gauss = rng.gen_range(0.0..=1e3);
        let obs = at_field(&sp, &FieldPoint::new(b_gauss));
        let params = SpinHamiltonianParams::secular(sp, b_gauss);
        let h = build_hamiltonian(&params);
        for (manifold, delta, gamma) in [
            (Manifold::Plus, obs.delta_plus_khz, obs.gamma_plus),
            (Manifold::Minus, obs.delta_minus_khz, obs.gamma_minus),
        ] {
            worst_split =
                worst_split.max((manifold_splitting(&h, manifold) - delta).abs());
            let trace =
                flip_probability_trace(&params, manifold, TimeGrid::default()).unwrap();
            worst_flip = worst_flip.max((gamma - trace.sup).abs());
        }
    }
    let pass = worst_flip < 1e-6 && worst_split < 1e-9;
    report(
        6,
        pass,
        &format!(
            "1000 draws: max |sup p - Gamma| = {worst_flip:.2e} (< 1e-6), \
             max splitting error = {worst_split:.2e} kHz (< 1e-9)"
        ),
    );
    assert!(worst_flip < 1e-6, "flip-probability mismatch {worst_flip}");
    assert!(worst_split < 1e-9, "splitting mismatch {worst_split}");
}

#[test]
fn criterion_07_dipolar_symmetry() {
    fn random_unit(rng: &mut ChaCha8Rng) -> Unit<Vector3<f64>> {
        loop {
            let v = Vector3::new(
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
            );
            if v.norm() > 1e-3 {
                return Unit::new_normalize(v);
            }
        }
    }
    fn random_density(rng: &mut ChaCha8Rng) -> SpinDensityModel {
        let points = (0..rng.gen_range(5..=30))
            .map(|_| DensityPoint {
                position: random_unit(rng).into_inner() * rng.gen_range(0.5..=8.0),
                weight: rng.gen_range(0.01..=1.0),
            })
            .collect();
        SpinDensityModel::new(points, 1.0).unwrap()
    }
    let tensor = |d: &SpinDensityModel, n: &Vector3<f64>| -> Matrix3<f64> {
        t_tensor(d, n, &DipoleConstants::default()).unwrap()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut worst_mirror = 0.0_f64;
    let mut worst_cov = 0.0_f64;
    let mut worst_scale = 0.0_f64;
    for _ in 0..100 {
        // Mirror symmetrization about a random vertical plane.
        let azimuth_deg = rng.gen_range(0.0..360.0);
        let symmetric = mirror_about_xz(&random_density(&mut rng), azimuth_deg);
        // Keep the nucleus in the mirror plane so the combined geometry is
        // actually symmetric.
        let az = azimuth_deg.to_radians();
        let rho = rng.gen_range(10.0..=20.0);
        let nucleus =
            Vector3::new(rho * az.cos(), rho * az.sin(), rng.gen_range(-5.0..=5.0));
        let t = tensor(&symmetric, &nucleus);
        let tp = tensor_in_azimuth_frame(&t, azimuth_deg);
        worst_mirror = worst_mirror.max(tp[(2, 1)].abs() / t.norm());

        // Rotational covariance.
        let density = random_density(&mut rng);
        let free_nucleus = random_unit(&mut rng).into_inner() * rng.gen_range(10.0..=20.0);
        let t = tensor(&density, &free_nucleus);
        let rot =
            Rotation3::from_axis_angle(&random_unit(&mut rng), rng.gen_range(0.0..TAU));
        let rotated = SpinDensityModel::new(
            density
                .points()
                .iter()
                .map(|p| DensityPoint { position: rot * p.position, weight: p.weight })
                .collect(),
            density.total_spin(),
        )
        .unwrap();
        let t_rot = tensor(&rotated, &(rot * free_nucleus));
        worst_cov = worst_cov
            .max((t_rot - rot.matrix() * t * rot.matrix().transpose()).norm() / t.norm());

        // Inverse-cube dilation.
        let s: f64 = rng.gen_range(0.5..=3.0);
        let scaled = SpinDensityModel::new(
            density
                .points()
                .iter()
                .map(|p| DensityPoint { position: p.position * s, weight: p.weight })
                .collect(),
            density.total_spin(),
        )
        .unwrap();
        let t_scaled = tensor(&scaled, &(free_nucleus * s));
        worst_scale = worst_scale.max((t_scaled * s.powi(3) - t).norm() / t.norm());
    }
    let pass = worst_mirror < 1e-12 && worst_cov < 1e-10 && worst_scale < 1e-10;
    report(
        7,
        pass,
        &format!(
            "100 densities: mirror residual {worst_mirror:.2e} (< 1e-12), covariance \
             {worst_cov:.2e} (< 1e-10), s^-3 scaling {worst_scale:.2e} (< 1e-10)"
        ),
    );
    assert!(worst_mirror < 1e-12);
    assert!(worst_cov < 1e-10);
    assert!(worst_scale < 1e-10);
}

#[test]
fn criterion_08_xy8_properties() {
    let b_gauss = 355.0;
    let blocks: Vec<u32> = (1..=16).collect();
    let settings = Xy8Settings::default();

    // Flat without transverse coupling.
    let flat_params = SpinHamiltonianParams::secular(SecularParams::new(-49.1, 0.0), b_gauss);
    let tau_probe = xy8_resonance_tau_us(&SpinHamiltonianParams::secular(
        SecularParams::new(-49.1, 1.4),
        b_gauss,
    ))
    .unwrap();
    let flat_dev = xy8_trace(&flat_params, tau_probe, &blocks, &settings)
        .unwrap()
        .iter()
        .map(|p| (p.coherence - 1.0).abs())
        .fold(0.0_f64, f64::max);
    let flat_ok = flat_dev < 1e-9;

    // Strictly deepening dip at the first resonance.
    let params = SpinHamiltonianParams::secular(SecularParams::new(-49.1, 1.4), b_gauss);
    let tau_res = xy8_resonance_tau_us(&params).unwrap();
    let on_res = xy8_trace(&params, tau_res, &blocks, &settings).unwrap();
    let monotone_ok =
        on_res.windows(2).all(|w| w[1].coherence < w[0].coherence && w[1].coherence >= -1.0);

    // Off resonance, 10 linewidths away, at fixed depth N = 8.
    let depth_at = |tau: f64| 1.0 - xy8_trace(&params, tau, &[8], &settings).unwrap()[0].coherence;
    let d_res = depth_at(tau_res);
    let half = d_res / 2.0;
    let step = tau_res * 1e-4;
    let half_width_at = |sign: f64| {
        let mut k = 1;
        loop {
            let tau = tau_res + sign * step * k as f64;
            if depth_at(tau) < half {
                return step * k as f64;
            }
            k += 1;
            assert!(k < 100_000, "no half-depth crossing found");
        }
    };
    let fwhm = half_width_at(1.0) + half_width_at(-1.0);
    let d_detuned = depth_at(tau_res + 10.0 * fwhm);
    let detuned_ok = d_detuned < 0.01 * d_res;

    let pass = flat_ok && monotone_ok && detuned_ok;
    report(
        8,
        pass,
        &format!(
            "t_nd=0 deviation {flat_dev:.1e} (< 1e-9); depth strictly increasing N=1..16 \
             ({monotone_ok}); 10-linewidth-detuned depth {:.3}% of on-resonance (< 1%)",
            100.0 * d_detuned / d_res
        ),
    );
    assert!(flat_ok, "flat-trace deviation {flat_dev}");
    assert!(monotone_ok, "coherences {:?}", on_res.iter().map(|p| p.coherence).collect::<Vec<_>>());
    assert!(detuned_ok, "detuned depth {d_detuned} vs on-resonance {d_res}");
}

#[test]
fn criterion_09_ssr_dwell_recovery() {
    // Mean dwell = cycle_time / flip_prob = 5 ms / 1.25e-3 = 4 s over a
    // 20000-cycle (100 s) trace.
    let params = SsrParams::new(1.25e-3, 20_000, 42);
    let trace = ssr_trace(&params).unwrap();
    let dwell = trace.estimated_dwell_s;
    let pass = (2.8..=5.2).contains(&dwell);
    report(
        9,
        pass,
        &format!(
            "estimated dwell {dwell:.2} s from 100 s of trace (target 4 s +/- 30%), \
             {} estimated vs {} true transitions",
            trace.n_transitions, trace.true_transitions
        ),
    );
    assert!(pass, "estimated dwell {dwell} outside 4 s +/- 30%");
}

#[test]
fn criterion_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_nvspin");
    let table = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/sites.tsv");
    let started = Instant::now();

    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().expect("binary runs");
        assert!(
            out.status.success(),
            "{args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };

    let commands: [&[&str]; 4] = [
        &["ssr", "--flip-prob", "2e-3", "--cycles", "2000", "--seed", "7"],
        &["observables", "--azz", "-49.1", "--tnd", "1.4", "--field-sweep", "0:600",
          "--steps", "601", "--format", "json"],
        &["rank", "--table", table, "--top", "25"],
        &["families", "--table", table, "--format", "json"],
    ];
    let mut all_identical = true;
    for args in commands {
        let first = run(args);
        let second = run(args);
        if first != second {
            all_identical = false;
        }
        assert_eq!(
            first, second,
            "stdout bytes differ between identical invocations of {args:?}"
        );
    }
    let elapsed = started.elapsed();
    let pass = all_identical && elapsed < Duration::from_secs(60);
    report(
        10,
        pass,
        &format!(
            "4 commands x 2 runs byte-identical ({all_identical}), {:.1?} elapsed",
            elapsed
        ),
    );
    assert!(pass);
}
