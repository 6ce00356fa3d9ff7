//! The three manifold-confined experiments: ENDOR frequency sweeps, XY8
//! dynamical-decoupling traces, and nuclear flip-probability traces.

use super::hamiltonian::secular_block;
use super::{
    build_hamiltonian, manifold_splitting, DynamicsError, Manifold, NuclearSpin,
    SpinHamiltonianParams,
};
use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Default time-grid resolution of [`flip_probability_trace`]: dense enough
/// that the sampled supremum sits within 1.5e-7 of the true maximum.
pub const FLIP_TRACE_DEFAULT_STEPS: usize = 8192;

/// An inclusive frequency grid `lo, lo+step, …` up to `hi` (kHz).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RfRange {
    pub lo_khz: f64,
    pub hi_khz: f64,
    pub step_khz: f64,
}

impl RfRange {
    pub fn new(lo_khz: f64, hi_khz: f64, step_khz: f64) -> Result<Self, DynamicsError> {
        if !(lo_khz.is_finite() && hi_khz.is_finite() && step_khz.is_finite()) {
            return Err(DynamicsError::InvalidRange("rf range must be finite".into()));
        }
        if step_khz <= 0.0 {
            return Err(DynamicsError::InvalidRange(format!(
                "rf step must be positive, got {step_khz}"
            )));
        }
        if hi_khz < lo_khz {
            return Err(DynamicsError::InvalidRange(format!(
                "rf range is inverted: {lo_khz}..{hi_khz}"
            )));
        }
        Ok(Self { lo_khz, hi_khz, step_khz })
    }

    /// Grid points, endpoint included when it lands on the grid (with a
    /// 1e-6-step slack against accumulated rounding).
    pub fn frequencies(&self) -> Vec<f64> {
        let count =
            ((self.hi_khz - self.lo_khz) / self.step_khz + 1e-6).floor() as usize + 1;
        (0..count).map(|k| self.lo_khz + k as f64 * self.step_khz).collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EndorPoint {
    pub frequency_khz: f64,
    pub flip_probability: f64,
}

/// Sweeps an rf pulse across `rf_range` with the electron held in
/// `init_m_s` and the nucleus starting in `init_m_i`, returning the Rabi
/// lineshape `(Ω²/Ω_eff²)·sin²(π·Ω_eff·t)` with `Ω_eff = √(Ω² + (f − f_m)²)`
/// peaked at the manifold's nuclear transition frequency f_m.
///
/// `rabi_khz = None` selects the π-pulse amplitude Ω = 1/(2·t), which gives
/// unit flip probability exactly on resonance. The drive is modeled in the
/// rotating frame of the nuclear transition (valid for Ω far below the
/// inter-manifold splittings); the flip probability out of |↑⟩ and |↓⟩ is
/// identical, so `init_m_i` does not alter the lineshape.
pub fn endor_sweep(
    p: &SpinHamiltonianParams,
    rf_range: &RfRange,
    rf_duration_ms: f64,
    init_m_s: Manifold,
    init_m_i: NuclearSpin,
    rabi_khz: Option<f64>,
) -> Result<Vec<EndorPoint>, DynamicsError> {
    p.validate()?;
    let _ = init_m_i;
    if !(rf_duration_ms.is_finite() && rf_duration_ms > 0.0) {
        return Err(DynamicsError::InvalidRange(format!(
            "rf duration must be positive, got {rf_duration_ms} ms"
        )));
    }
    let omega = rabi_khz.unwrap_or(0.5 / rf_duration_ms);
    if !(omega.is_finite() && omega > 0.0) {
        return Err(DynamicsError::InvalidRange(format!(
            "rf Rabi frequency must be positive, got {omega} kHz"
        )));
    }
    let h = build_hamiltonian(p);
    let f_m = manifold_splitting(&h, init_m_s);
    Ok(rf_range
        .frequencies()
        .into_iter()
        .map(|f| {
            let omega_eff = omega.hypot(f - f_m);
            let amplitude = (omega / omega_eff).powi(2);
            let flip = amplitude
                * (std::f64::consts::PI * omega_eff * rf_duration_ms).sin().powi(2);
            EndorPoint { frequency_khz: f, flip_probability: flip }
        })
        .collect())
}

/// Options of [`xy8_trace`].
#[derive(Debug, Clone, Copy)]
pub struct Xy8Settings {
    /// Contrast of the fluorescence mapping 0.5·(1 + contrast·coherence).
    pub contrast: f64,
    /// π-pulse duration in µs; None means instantaneous (the default).
    pub pulse_duration_us: Option<f64>,
    /// Initial nuclear eigenstate.
    pub init_nuclear: NuclearSpin,
}

impl Default for Xy8Settings {
    fn default() -> Self {
        Self { contrast: 1.0, pulse_duration_us: None, init_nuclear: NuclearSpin::Up }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Xy8Point {
    pub n_blocks: u32,
    /// Total number of π pulses, 8·n_blocks.
    pub pulse_count: u32,
    /// Free-evolution time 16·τ·n_blocks (plus pulse durations in the
    /// finite-duration mode).
    pub total_time_us: f64,
    /// Signal s ∈ [−1, 1]: +1 for an undisturbed electron coherence.
    pub coherence: f64,
    pub fluorescence: f64,
}

/// Electron-spin echo unitaries act on the {m_S = 0, m_S = −1} ⊗ {↑, ↓}
/// subspace with basis order (0↑, 0↓, −1↑, −1↓).
struct Xy8Engine {
    block: Matrix4<Complex64>,
    r_init: Matrix4<Complex64>,
    r_plus: Matrix4<Complex64>,
    r_minus: Matrix4<Complex64>,
    time_per_block_us: f64,
}

impl Xy8Engine {
    fn new(
        p: &SpinHamiltonianParams,
        tau_us: f64,
        settings: &Xy8Settings,
    ) -> Result<Self, DynamicsError> {
        let sp = p.require_secular("xy8_trace")?;
        let (x0, c0) = secular_block(sp, p.gamma_n_khz_per_g, p.b_gauss, Manifold::Zero);
        let (xm, cm) = secular_block(sp, p.gamma_n_khz_per_g, p.b_gauss, Manifold::Minus);
        let h_rot = block_diag(&block_matrix(x0, c0), &block_matrix(xm, cm));

        let free = |t: f64| {
            block_diag(&block_unitary(x0, c0, t), &block_unitary(xm, cm, t))
        };
        let pulse: Box<dyn Fn(f64, f64) -> Matrix4<Complex64>> =
            match settings.pulse_duration_us {
                None => Box::new(|angle, phase| instantaneous_pulse(angle, phase)),
                Some(d) => {
                    if !(d.is_finite() && d > 0.0) {
                        return Err(DynamicsError::InvalidSequence(format!(
                            "pulse duration must be positive, got {d} µs"
                        )));
                    }
                    Box::new(move |angle, phase| finite_pulse(&h_rot, angle, phase, d))
                }
            };

        let u_tau = free(tau_us);
        let u_2tau = free(2.0 * tau_us);
        let px = pulse(std::f64::consts::PI, 0.0);
        let py = pulse(std::f64::consts::PI, std::f64::consts::FRAC_PI_2);

        // One XY8 block in time order: τ X 2τ Y 2τ X 2τ Y 2τ Y 2τ X 2τ Y 2τ X τ.
        let pattern = [&px, &py, &px, &py, &py, &px, &py, &px];
        let mut block = u_tau;
        for (k, pulse_k) in pattern.iter().enumerate() {
            block = *pulse_k * block;
            let spacing = if k == pattern.len() - 1 { u_tau } else { u_2tau };
            block = spacing * block;
        }

        let pulse_time = settings.pulse_duration_us.unwrap_or(0.0) * 8.0;
        Ok(Self {
            block,
            r_init: pulse(std::f64::consts::FRAC_PI_2, 0.0),
            r_plus: pulse(std::f64::consts::FRAC_PI_2, 0.0),
            r_minus: pulse(-std::f64::consts::FRAC_PI_2, 0.0),
            time_per_block_us: 16.0 * tau_us + pulse_time,
        })
    }

    fn initial_state(&self, nuclear: NuclearSpin) -> Vector4<Complex64> {
        let mut psi = Vector4::zeros();
        let idx = match nuclear {
            NuclearSpin::Up => 0,
            NuclearSpin::Down => 1,
        };
        psi[idx] = Complex64::new(1.0, 0.0);
        self.r_init * psi
    }

    fn signal(&self, evolved: &Vector4<Complex64>) -> f64 {
        let a = self.r_minus * evolved;
        let b = self.r_plus * evolved;
        let p0 = |v: &Vector4<Complex64>| v[0].norm_sqr() + v[1].norm_sqr();
        p0(&a) - p0(&b)
    }
}

/// Runs the XY8 sequence R_{π/2} · (XY8 block)^N · R_{±π/2} for every N in
/// `n_blocks` (in the given order) at fixed inter-pulse spacing 2τ and
/// returns the coherence signal and its fluorescence mapping.
pub fn xy8_trace(
    p: &SpinHamiltonianParams,
    tau_us: f64,
    n_blocks: &[u32],
    settings: &Xy8Settings,
) -> Result<Vec<Xy8Point>, DynamicsError> {
    p.validate()?;
    if !(tau_us.is_finite() && tau_us > 0.0) {
        return Err(DynamicsError::InvalidSequence(format!(
            "tau must be positive, got {tau_us} µs"
        )));
    }
    if n_blocks.is_empty() {
        return Err(DynamicsError::InvalidSequence("no block counts requested".into()));
    }
    if let Some(&bad) = n_blocks.iter().find(|&&n| n < 1) {
        return Err(DynamicsError::InvalidSequence(format!(
            "block count must be at least 1, got {bad}"
        )));
    }
    if !(settings.contrast.is_finite() && (0.0..=1.0).contains(&settings.contrast)) {
        return Err(DynamicsError::InvalidSequence(format!(
            "contrast must lie in [0, 1], got {}",
            settings.contrast
        )));
    }

    let engine = Xy8Engine::new(p, tau_us, settings)?;
    let psi0 = engine.initial_state(settings.init_nuclear);
    let max_n = *n_blocks.iter().max().expect("non-empty");

    // March block-by-block once, recording the signal at every requested N.
    let mut by_n = std::collections::HashMap::new();
    let mut evolved = psi0;
    for n in 1..=max_n {
        evolved = engine.block * evolved;
        if n_blocks.contains(&n) {
            by_n.insert(n, engine.signal(&evolved));
        }
    }

    Ok(n_blocks
        .iter()
        .map(|&n| {
            let s = by_n[&n];
            Xy8Point {
                n_blocks: n,
                pulse_count: 8 * n,
                total_time_us: engine.time_per_block_us * n as f64,
                coherence: s,
                fluorescence: 0.5 * (1.0 + settings.contrast * s),
            }
        })
        .collect())
}

/// First-order resonance spacing: τ = 1/(4·f̃) with f̃ the mean of the
/// m_S = 0 and m_S = −1 nuclear transition frequencies (kHz → µs).
pub fn xy8_resonance_tau_us(p: &SpinHamiltonianParams) -> Result<f64, DynamicsError> {
    p.validate()?;
    let h = build_hamiltonian(p);
    let f_mean = 0.5
        * (manifold_splitting(&h, Manifold::Zero) + manifold_splitting(&h, Manifold::Minus));
    if f_mean <= 0.0 {
        return Err(DynamicsError::InvalidRange(
            "both nuclear transition frequencies vanish; no resonance condition".into(),
        ));
    }
    Ok(250.0 / f_mean)
}

/// Time grid of [`flip_probability_trace`].
#[derive(Debug, Clone, Copy)]
pub enum TimeGrid {
    /// One full Rabi period of the manifold's nuclear precession (or 1 ms
    /// when the nucleus does not precess at all), `steps` points inclusive.
    OneRabiPeriod { steps: usize },
    /// Explicit span [0, t_max_us], `steps` points inclusive.
    Explicit { t_max_us: f64, steps: usize },
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid::OneRabiPeriod { steps: FLIP_TRACE_DEFAULT_STEPS }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlipTrace {
    /// (t in µs, flip probability) samples.
    pub points: Vec<(f64, f64)>,
    /// Largest sampled flip probability — the dense-grid estimate of Γ.
    pub sup: f64,
    pub sup_time_us: f64,
}

/// Nuclear flip probability versus time with the electron held in
/// `manifold` and the nucleus initialized ↑, from the exact dynamics of the
/// manifold's secular block: `p(t) = (|c|²/g²)·sin²(2π·g·t)` with
/// `g = √(x² + |c|²)`. The supremum over the returned grid is the numerical
/// counterpart of the closed-form maximum flip probability Γ.
pub fn flip_probability_trace(
    p: &SpinHamiltonianParams,
    manifold: Manifold,
    grid: TimeGrid,
) -> Result<FlipTrace, DynamicsError> {
    p.validate()?;
    let sp = p.require_secular("flip_probability_trace")?;
    let (x, c) = secular_block(sp, p.gamma_n_khz_per_g, p.b_gauss, manifold);
    let g = x.hypot(c.norm());

    let (t_max_us, steps) = match grid {
        TimeGrid::OneRabiPeriod { steps } => {
            let span = if g > 0.0 { 1e3 / g } else { 1e3 };
            (span, steps)
        }
        TimeGrid::Explicit { t_max_us, steps } => {
            if !(t_max_us.is_finite() && t_max_us > 0.0) {
                return Err(DynamicsError::InvalidRange(format!(
                    "t_max must be positive, got {t_max_us} µs"
                )));
            }
            (t_max_us, steps)
        }
    };
    if steps < 2 {
        return Err(DynamicsError::InvalidRange(format!(
            "time grid needs at least 2 points, got {steps}"
        )));
    }

    let amplitude = if g > 0.0 { (c.norm() / g).powi(2) } else { 0.0 };
    let mut points = Vec::with_capacity(steps);
    let mut sup = 0.0_f64;
    let mut sup_time_us = 0.0_f64;
    for k in 0..steps {
        let t = t_max_us * k as f64 / (steps - 1) as f64;
        let flip = amplitude * (TAU * g * t * 1e-3).sin().powi(2);
        if flip > sup {
            sup = flip;
            sup_time_us = t;
        }
        points.push((t, flip));
    }
    Ok(FlipTrace { points, sup, sup_time_us })
}

fn block_matrix(x: f64, c: Complex64) -> Matrix2<Complex64> {
    Matrix2::new(Complex64::new(x, 0.0), c, c.conj(), Complex64::new(-x, 0.0))
}

/// Closed-form `exp(−i·2π·t·1e-3·[[x, c], [c̄, −x]])`.
fn block_unitary(x: f64, c: Complex64, t_us: f64) -> Matrix2<Complex64> {
    let g = x.hypot(c.norm());
    if g == 0.0 {
        return Matrix2::identity();
    }
    let theta = TAU * g * t_us * 1e-3;
    let cos = Complex64::new(theta.cos(), 0.0);
    let f = Complex64::new(0.0, -theta.sin() / g);
    Matrix2::new(cos + f * x, f * c, f * c.conj(), cos - f * x)
}

fn block_diag(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = a[(i, j)];
            m[(i + 2, j + 2)] = b[(i, j)];
        }
    }
    m
}

/// Instantaneous electron rotation by `angle` about the equatorial axis at
/// `phase` on the {0, −1} pair, identity on the nucleus.
fn instantaneous_pulse(angle: f64, phase: f64) -> Matrix4<Complex64> {
    let cos = Complex64::new((angle / 2.0).cos(), 0.0);
    let pre = Complex64::new(0.0, -(angle / 2.0).sin());
    let lower = pre * Complex64::from_polar(1.0, -phase);
    let raise = pre * Complex64::from_polar(1.0, phase);
    let mut u = Matrix4::identity() * cos;
    u[(0, 2)] = lower;
    u[(1, 3)] = lower;
    u[(2, 0)] = raise;
    u[(3, 1)] = raise;
    u
}

/// Finite-duration pulse: evolution under the rotating-frame Hamiltonian
/// plus a resonant drive whose amplitude completes `angle` in `duration`.
fn finite_pulse(
    h_rot: &Matrix4<Complex64>,
    angle: f64,
    phase: f64,
    duration_us: f64,
) -> Matrix4<Complex64> {
    let omega_khz = angle.abs() / (TAU * duration_us * 1e-3);
    let sign = if angle < 0.0 { -1.0 } else { 1.0 };
    let half = Complex64::new(0.5 * omega_khz * sign, 0.0);
    let lower = half * Complex64::from_polar(1.0, -phase);
    let mut h = *h_rot;
    h[(0, 2)] += lower;
    h[(1, 3)] += lower;
    h[(2, 0)] += lower.conj();
    h[(3, 1)] += lower.conj();
    let se = nalgebra::linalg::SymmetricEigen::new(h);
    let mut d = Matrix4::zeros();
    for k in 0..4 {
        d[(k, k)] = Complex64::from_polar(1.0, -TAU * se.eigenvalues[k] * duration_us * 1e-3);
    }
    se.eigenvectors * d * se.eigenvectors.adjoint()
}
