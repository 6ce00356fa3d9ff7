//! Generic pulse-sequence executor: free evolution, microwave rotations on
//! an electron manifold pair, nuclear rf pulses in the per-manifold
//! rotating frame, and deterministic measurement records.

use super::{
    build_hamiltonian, DynamicsError, Manifold, Propagator, ReadoutModel,
    SpinHamiltonianParams, SpinState,
};
use nalgebra::{Matrix2, Matrix6};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// One segment of a pulse sequence. Durations are µs for free evolution
/// and microwave pulses, ms for rf pulses; measurements take no time.
#[derive(Debug, Clone)]
pub enum Segment {
    Free {
        duration_us: f64,
    },
    /// Rotation on the electron pair `pair` (identity on the nucleus) about
    /// the equatorial axis at `axis_phase_rad`, by `angle_rad`.
    /// `duration_us: None` is an instantaneous pulse; a finite duration is
    /// modeled as free evolution for half the duration on each side of the
    /// ideal rotation.
    MwPulse {
        pair: (Manifold, Manifold),
        axis_phase_rad: f64,
        angle_rad: f64,
        duration_us: Option<f64>,
    },
    /// Nuclear drive at `frequency_khz`, modeled per manifold as the
    /// rotating-frame Rabi rotation of the manifold's two eigenstates with
    /// detuning from that manifold's transition frequency.
    RfPulse {
        frequency_khz: f64,
        rabi_khz: f64,
        duration_ms: f64,
        phase_rad: f64,
    },
    Measure(ReadoutModel),
}

#[derive(Debug, Clone, Default)]
pub struct PulseSequence {
    pub segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    fn validate(&self) -> Result<(), DynamicsError> {
        for (k, seg) in self.segments.iter().enumerate() {
            let fail = |msg: String| {
                Err(DynamicsError::InvalidSequence(format!("segment {k}: {msg}")))
            };
            match seg {
                Segment::Free { duration_us } => {
                    if !(duration_us.is_finite() && *duration_us >= 0.0) {
                        return fail(format!("negative or non-finite duration {duration_us}"));
                    }
                }
                Segment::MwPulse { pair, axis_phase_rad, angle_rad, duration_us } => {
                    if pair.0 == pair.1 {
                        return fail(format!("pulse pair ({}, {}) is degenerate", pair.0, pair.1));
                    }
                    if !(axis_phase_rad.is_finite() && angle_rad.is_finite()) {
                        return fail("non-finite pulse angle".into());
                    }
                    if let Some(d) = duration_us {
                        if !(d.is_finite() && *d >= 0.0) {
                            return fail(format!("negative or non-finite pulse duration {d}"));
                        }
                    }
                }
                Segment::RfPulse { frequency_khz, rabi_khz, duration_ms, phase_rad } => {
                    if !(frequency_khz.is_finite() && *frequency_khz >= 0.0) {
                        return fail(format!("invalid rf frequency {frequency_khz}"));
                    }
                    if !(rabi_khz.is_finite() && *rabi_khz >= 0.0) {
                        return fail(format!("invalid rf amplitude {rabi_khz}"));
                    }
                    if !(duration_ms.is_finite() && *duration_ms >= 0.0) {
                        return fail(format!("negative or non-finite rf duration {duration_ms}"));
                    }
                    if !phase_rad.is_finite() {
                        return fail("non-finite rf phase".into());
                    }
                }
                Segment::Measure(model) => model.validate()?,
            }
        }
        Ok(())
    }
}

/// Deterministic record of one `Measure` segment: populations at that
/// instant and the expected photon count under the segment's readout model
/// (the m_S = 0 manifold is the bright state).
#[derive(Debug, Clone, serde::Serialize)]
pub struct MeasureRecord {
    pub segment_index: usize,
    pub time_us: f64,
    pub populations: [f64; 6],
    pub p_ms0: f64,
    pub expected_counts: f64,
}

#[derive(Debug, Clone)]
pub struct SequenceOutcome {
    pub final_state: SpinState,
    pub measurements: Vec<MeasureRecord>,
    pub total_time_us: f64,
}

/// Runs a pulse sequence from `init` under the Hamiltonian of `p`.
/// Everything here is deterministic — measurement records carry expected
/// values, and stochastic photon counting lives in the single-shot-readout
/// simulation instead.
pub fn run_sequence(
    p: &SpinHamiltonianParams,
    seq: &PulseSequence,
    init: &SpinState,
) -> Result<SequenceOutcome, DynamicsError> {
    p.validate()?;
    seq.validate()?;
    let h = build_hamiltonian(p);
    let prop = Propagator::new(&h)?;

    let mut state = init.clone();
    let mut time_us = 0.0;
    let mut measurements = Vec::new();
    for (k, seg) in seq.segments.iter().enumerate() {
        match seg {
            Segment::Free { duration_us } => {
                state = prop.evolve(&state, *duration_us);
                time_us += duration_us;
            }
            Segment::MwPulse { pair, axis_phase_rad, angle_rad, duration_us } => {
                let u = mw_unitary(*pair, *axis_phase_rad, *angle_rad);
                match duration_us {
                    None => state = apply(&u, &state),
                    Some(d) => {
                        state = prop.evolve(&state, 0.5 * d);
                        state = apply(&u, &state);
                        state = prop.evolve(&state, 0.5 * d);
                        time_us += d;
                    }
                }
            }
            Segment::RfPulse { frequency_khz, rabi_khz, duration_ms, phase_rad } => {
                let u = rf_unitary(&h, *frequency_khz, *rabi_khz, *duration_ms, *phase_rad);
                state = apply(&u, &state);
                time_us += duration_ms * 1e3;
            }
            Segment::Measure(model) => {
                let populations = state.populations();
                let p_ms0 = state.manifold_population(Manifold::Zero);
                measurements.push(MeasureRecord {
                    segment_index: k,
                    time_us,
                    populations,
                    p_ms0,
                    expected_counts: model.expected_counts(p_ms0),
                });
            }
        }
    }
    Ok(SequenceOutcome { final_state: state, measurements, total_time_us: time_us })
}

fn apply(u: &Matrix6<Complex64>, state: &SpinState) -> SpinState {
    SpinState::from_unitary_image(u * state.amplitudes())
}

/// Rotation by `angle` about the equatorial axis at `phase` on the
/// electron pair, tensored with the nuclear identity.
fn mw_unitary(pair: (Manifold, Manifold), phase: f64, angle: f64) -> Matrix6<Complex64> {
    let a = pair.0.base_index();
    let b = pair.1.base_index();
    let cos = Complex64::new((angle / 2.0).cos(), 0.0);
    let pre = Complex64::new(0.0, -(angle / 2.0).sin());
    let lower = pre * Complex64::from_polar(1.0, -phase);
    let raise = pre * Complex64::from_polar(1.0, phase);
    let mut u = Matrix6::identity();
    for off in 0..2 {
        u[(a + off, a + off)] = cos;
        u[(b + off, b + off)] = cos;
        u[(a + off, b + off)] = lower;
        u[(b + off, a + off)] = raise;
    }
    u
}

/// Per-manifold rotating-frame Rabi unitary of an rf drive: in each
/// manifold's 2×2 eigenbasis the drive acts with detuning
/// `δ = f − f_manifold` and amplitude Ω, i.e. the generator
/// `(δ/2)σ_z + (Ω/2)·(cos φ σ_x + sin φ σ_y)` for `duration_ms`
/// (kHz·ms is already dimensionless).
fn rf_unitary(
    h: &Matrix6<Complex64>,
    frequency_khz: f64,
    rabi_khz: f64,
    duration_ms: f64,
    phase_rad: f64,
) -> Matrix6<Complex64> {
    let mut u = Matrix6::identity();
    for m in Manifold::ALL {
        let i = m.base_index();
        let (evals, evecs) =
            eig2(h[(i, i)].re, h[(i + 1, i + 1)].re, h[(i, i + 1)]);
        let f_m = evals[1] - evals[0];
        let delta = frequency_khz - f_m;
        let drive = Complex64::from_polar(0.5 * rabi_khz, -phase_rad);
        let u_eig = rabi_rotation(0.5 * delta, drive, duration_ms);
        let block = evecs * u_eig * evecs.adjoint();
        for r in 0..2 {
            for c in 0..2 {
                u[(i + r, i + c)] = block[(r, c)];
            }
        }
    }
    u
}

/// `exp(−i·2π·cycles·[[x, c], [c̄, −x]])` — closed-form 2×2 unitary, with
/// `cycles` the dimensionless product of frequency and time.
fn rabi_rotation(x: f64, c: Complex64, cycles: f64) -> Matrix2<Complex64> {
    let g = x.hypot(c.norm());
    if g == 0.0 {
        return Matrix2::identity();
    }
    let theta = TAU * g * cycles;
    let cos = Complex64::new(theta.cos(), 0.0);
    let f = Complex64::new(0.0, -theta.sin() / g);
    Matrix2::new(cos + f * x, f * c, f * c.conj(), cos - f * x)
}

/// Eigendecomposition of the Hermitian 2×2 `[[a, c], [c̄, b]]`, eigenvalues
/// ascending, eigenvectors as columns.
fn eig2(a: f64, b: f64, c: Complex64) -> ([f64; 2], Matrix2<Complex64>) {
    if c.norm() == 0.0 {
        return if a <= b {
            ([a, b], Matrix2::identity())
        } else {
            (
                [b, a],
                Matrix2::new(
                    Complex64::new(0.0, 0.0),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ),
            )
        };
    }
    let mean = 0.5 * (a + b);
    let r = (0.5 * (a - b)).hypot(c.norm());
    let (lo, hi) = (mean - r, mean + r);
    // (c, hi − a) is the eigenvector of `hi`; its orthogonal complement
    // (a − hi, c̄) belongs to `lo`.
    let v_hi = nalgebra::Vector2::new(c, Complex64::new(hi - a, 0.0));
    let v_lo = nalgebra::Vector2::new(Complex64::new(a - hi, 0.0), c.conj());
    let v_hi = v_hi / Complex64::new(v_hi.norm(), 0.0);
    let v_lo = v_lo / Complex64::new(v_lo.norm(), 0.0);
    ([lo, hi], Matrix2::from_columns(&[v_lo, v_hi]))
}
