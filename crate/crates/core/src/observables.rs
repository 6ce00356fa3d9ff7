//! Closed-form experimental observables from secular hyperfine parameters
//! and an axial magnetic field.
//!
//! At zero field the m_S = ±1 electron sublevels are split by
//! Δ₀ = sqrt(t_nd² + a_zz²), and the maximum nuclear flip probability is
//! Γ₀ = t_nd²/Δ₀² (a dimensionless probability; τ₀ = 1/Γ₀ is the stability
//! figure of merit). At finite axial field B the splittings become
//! Δ± = sqrt(t_nd² + (a_zz ∓ γ_n B)²) and the m_S = 0 manifold splits by the
//! bare nuclear Zeeman value δ_n = γ_n B.

use crate::hfi::SecularParams;
use serde::Serialize;
use thiserror::Error;

/// ¹³C gyromagnetic ratio, kHz/Gauss.
pub const GAMMA_N_C13_KHZ_PER_G: f64 = 1.071;

/// Axial magnetic field where the NV ground-state avoided crossing
/// invalidates the secular approximation, Gauss.
pub const AVOIDED_CROSSING_B_GAUSS: f64 = 1027.0;

/// Half-width of the window around [`AVOIDED_CROSSING_B_GAUSS`] flagged as
/// unreliable, Gauss.
pub const AVOIDED_CROSSING_WINDOW_GAUSS: f64 = 50.0;

/// Sentinel value that stands in for an infinite τ₀ in serialized output.
pub const TAU0_SENTINEL: f64 = 1e10;

#[derive(Debug, Error)]
pub enum ObservablesError {
    #[error("degenerate site: a_zz = t_nd = 0, splitting observables undefined")]
    DegenerateSite,
    #[error("invalid field range: {0}")]
    InvalidRange(String),
    #[error("gamma_n must be positive and finite, got {0}")]
    InvalidGamma(f64),
}

/// An axial magnetic field point with the gyromagnetic ratio in force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldPoint {
    /// Axial field B ∥ Z, Gauss (signed).
    pub b_gauss: f64,
    /// Nuclear gyromagnetic ratio, kHz/Gauss.
    pub gamma_n_khz_per_g: f64,
}

impl FieldPoint {
    /// Field with the default ¹³C gyromagnetic ratio.
    pub fn new(b_gauss: f64) -> Self {
        Self { b_gauss, gamma_n_khz_per_g: GAMMA_N_C13_KHZ_PER_G }
    }

    /// Field with an explicit gyromagnetic ratio (must be > 0).
    pub fn with_gamma(b_gauss: f64, gamma_n_khz_per_g: f64) -> Result<Self, ObservablesError> {
        if !(gamma_n_khz_per_g.is_finite() && gamma_n_khz_per_g > 0.0) {
            return Err(ObservablesError::InvalidGamma(gamma_n_khz_per_g));
        }
        Ok(Self { b_gauss, gamma_n_khz_per_g })
    }

    /// Nuclear Zeeman splitting δ_n = γ_n·B, kHz.
    pub fn delta_n_khz(&self) -> f64 {
        self.gamma_n_khz_per_g * self.b_gauss
    }
}

/// Zero-field splitting observables.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZeroFieldObservables {
    /// Δ₀ = sqrt(t_nd² + a_zz²), kHz.
    pub delta0_khz: f64,
    /// Γ₀ = t_nd²/Δ₀², dimensionless in [0, 1].
    pub gamma0: f64,
    /// τ₀ = 1/Γ₀ (f64::INFINITY when Γ₀ = 0; see [`tau0_serialized`]).
    pub tau0: f64,
}

/// The full observable set at one field point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ObservableSet {
    /// Zero-field splitting Δ₀, kHz.
    pub delta0_khz: f64,
    /// m_S = +1 splitting Δ₊ = sqrt(t_nd² + (a_zz − γ_n B)²), kHz.
    pub delta_plus_khz: f64,
    /// m_S = −1 splitting Δ₋ = sqrt(t_nd² + (a_zz + γ_n B)²), kHz.
    pub delta_minus_khz: f64,
    /// m_S = 0 splitting δ_n = γ_n B, kHz.
    pub delta_n_khz: f64,
    /// Maximum flip probabilities, dimensionless in [0, 1].
    pub gamma0: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// 1/Γ₀ (f64::INFINITY when Γ₀ = 0).
    pub tau0: f64,
}

/// One row of a field sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub b_gauss: f64,
    #[serde(flatten)]
    pub observables: ObservableSet,
    /// True when B lies within ±50 G of the ~1027 G avoided crossing, where
    /// the secular formulas are computed anyway but unreliable.
    pub near_crossing: bool,
}

/// Which electron manifold a branch observable refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// m_S = +1: detuning (a_zz − γ_n B).
    Plus,
    /// m_S = −1: detuning (a_zz + γ_n B).
    Minus,
}

/// Result of inferring a_zz from a measured branch splitting.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InferredAzz {
    /// Inferred a_zz, kHz, valid to first order in t_nd²/Δ².
    pub a_zz_khz: f64,
    /// Set when B = 0: the measurement then fixes only |a_zz|.
    pub sign_ambiguous: bool,
}

fn flip_probability(t_nd: f64, detuning: f64) -> f64 {
    // Convention: zero coupling never flips, even at zero detuning.
    if t_nd == 0.0 {
        return 0.0;
    }
    let t2 = t_nd * t_nd;
    t2 / (t2 + detuning * detuning)
}

/// Zero-field observables (Δ₀, Γ₀, τ₀).
///
/// A fully degenerate site (a_zz = t_nd = 0) has no defined splitting and is
/// an error.
pub fn zero_field(sp: &SecularParams) -> Result<ZeroFieldObservables, ObservablesError> {
    if sp.a_zz_khz == 0.0 && sp.t_nd_khz == 0.0 {
        return Err(ObservablesError::DegenerateSite);
    }
    let delta0 = sp.delta0_khz();
    let gamma0 = flip_probability(sp.t_nd_khz, sp.a_zz_khz);
    Ok(ZeroFieldObservables { delta0_khz: delta0, gamma0, tau0: 1.0 / gamma0 })
}

/// The full observable set at an axial field point.
///
/// Branch convention: `delta_plus`/`gamma_plus` use the m_S = +1 detuning
/// (a_zz − γ_n B); `delta_minus`/`gamma_minus` use the m_S = −1 detuning
/// (a_zz + γ_n B).
pub fn at_field(sp: &SecularParams, f: &FieldPoint) -> ObservableSet {
    let t = sp.t_nd_khz;
    let gb = f.delta_n_khz();
    let det_plus = sp.a_zz_khz - gb;
    let det_minus = sp.a_zz_khz + gb;
    let gamma0 = flip_probability(t, sp.a_zz_khz);
    ObservableSet {
        delta0_khz: sp.delta0_khz(),
        delta_plus_khz: t.hypot(det_plus),
        delta_minus_khz: t.hypot(det_minus),
        delta_n_khz: gb,
        gamma0,
        gamma_plus: flip_probability(t, det_plus),
        gamma_minus: flip_probability(t, det_minus),
        tau0: 1.0 / gamma0,
    }
}

/// Infers a_zz from a measured branch splitting, valid when
/// t_nd² ≪ (a_zz ± γ_n B)² so that Δ ≈ |detuning|.
///
/// For the minus branch a_zz = Δ₋ − γ_n B; for the plus branch
/// a_zz = γ_n B − Δ₊. The returned sign convention is such that re-running
/// [`at_field`] reproduces the measured splitting to first order. At B = 0
/// the sign of a_zz is not determined and the ambiguity is flagged.
pub fn infer_a_zz(delta_branch_khz: f64, f: &FieldPoint, branch: Branch) -> InferredAzz {
    let gb = f.delta_n_khz();
    let a_zz_khz = match branch {
        Branch::Minus => delta_branch_khz - gb,
        Branch::Plus => gb - delta_branch_khz,
    };
    InferredAzz { a_zz_khz, sign_ambiguous: gb == 0.0 }
}

/// Evenly spaced field sweep over [b_lo, b_hi] inclusive, `steps` ≥ 2 rows
/// ordered by B. Rows within ±50 G of the ~1027 G avoided crossing carry
/// `near_crossing = true` (computed anyway, flagged as unreliable).
pub fn field_sweep(
    sp: &SecularParams,
    gamma_n_khz_per_g: f64,
    b_lo: f64,
    b_hi: f64,
    steps: usize,
) -> Result<Vec<SweepRow>, ObservablesError> {
    if !(gamma_n_khz_per_g.is_finite() && gamma_n_khz_per_g > 0.0) {
        return Err(ObservablesError::InvalidGamma(gamma_n_khz_per_g));
    }
    if steps < 2 {
        return Err(ObservablesError::InvalidRange(format!("steps = {steps}, need >= 2")));
    }
    if !(b_lo.is_finite() && b_hi.is_finite()) || b_lo >= b_hi {
        return Err(ObservablesError::InvalidRange(format!(
            "[{b_lo}, {b_hi}] is empty or inverted"
        )));
    }
    let span = b_hi - b_lo;
    let rows: Vec<SweepRow> = (0..steps)
        .map(|i| {
            // Endpoints exact by construction.
            let b = if i == steps - 1 {
                b_hi
            } else {
                b_lo + span * (i as f64) / ((steps - 1) as f64)
            };
            let f = FieldPoint { b_gauss: b, gamma_n_khz_per_g };
            SweepRow {
                b_gauss: b,
                observables: at_field(sp, &f),
                near_crossing: (b - AVOIDED_CROSSING_B_GAUSS).abs()
                    <= AVOIDED_CROSSING_WINDOW_GAUSS,
            }
        })
        .collect();
    Ok(rows)
}

/// Maps an internal τ₀ to its serialized form: finite values pass through,
/// +infinity becomes the 1e10 sentinel used by the published table.
pub fn tau0_serialized(tau0: f64) -> f64 {
    if tau0.is_finite() {
        tau0
    } else {
        TAU0_SENTINEL
    }
}
