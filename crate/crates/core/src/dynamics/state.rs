//! Pure states of the six-level system and unitary evolution under a
//! static Hamiltonian.

use super::{basis_index, DynamicsError, Manifold, NuclearSpin};
use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;

/// A normalized pure state over the fixed basis
/// (+1↑, +1↓, 0↑, 0↓, −1↑, −1↓). The constructor enforces unit norm to
/// 1e-9; renormalization is always explicit.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    amplitudes: Vector6<Complex64>,
}

impl SpinState {
    pub fn new(amplitudes: Vector6<Complex64>) -> Result<Self, DynamicsError> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(DynamicsError::NonUnitNorm(norm));
        }
        Ok(Self { amplitudes })
    }

    /// The basis state |manifold, nuclear⟩.
    pub fn basis_state(manifold: Manifold, nuclear: NuclearSpin) -> Self {
        let mut amplitudes = Vector6::zeros();
        amplitudes[basis_index(manifold, nuclear)] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &Vector6<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Explicitly rescales to unit norm; errors on a (near-)zero vector.
    pub fn renormalized(&self) -> Result<Self, DynamicsError> {
        let norm = self.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(DynamicsError::NonUnitNorm(norm));
        }
        Ok(Self { amplitudes: self.amplitudes / Complex64::new(norm, 0.0) })
    }

    pub fn population(&self, manifold: Manifold, nuclear: NuclearSpin) -> f64 {
        self.amplitudes[basis_index(manifold, nuclear)].norm_sqr()
    }

    pub fn manifold_population(&self, manifold: Manifold) -> f64 {
        let i = manifold.base_index();
        self.amplitudes[i].norm_sqr() + self.amplitudes[i + 1].norm_sqr()
    }

    pub fn populations(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.amplitudes[k].norm_sqr();
        }
        out
    }

    /// Internal constructor for states produced by unitary maps, which are
    /// normalized by construction.
    pub(super) fn from_unitary_image(amplitudes: Vector6<Complex64>) -> Self {
        Self { amplitudes }
    }
}

/// Eigendecomposition of a static Hermitian Hamiltonian (kHz), reusable
/// across evolution times.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues_khz: Vector6<f64>,
    eigenvectors: Matrix6<Complex64>,
}

impl Propagator {
    /// Decomposes `h`; errors when `h` deviates from Hermiticity by more
    /// than 1e-12 relative to its largest element.
    pub fn new(h: &Matrix6<Complex64>) -> Result<Self, DynamicsError> {
        let scale = h.iter().fold(0.0_f64, |m, v| m.max(v.norm())).max(1.0);
        let mut worst = 0.0_f64;
        for i in 0..6 {
            for j in i..6 {
                worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
            }
        }
        if worst / scale > 1e-12 {
            return Err(DynamicsError::NotHermitian(worst / scale));
        }
        let se = nalgebra::linalg::SymmetricEigen::new(*h);
        Ok(Self { eigenvalues_khz: se.eigenvalues, eigenvectors: se.eigenvectors })
    }

    /// Evolves by `exp(−i·2π·H·t)`; kHz × µs means the phase is
    /// `2π·λ·t·1e-3`.
    pub fn evolve(&self, state: &SpinState, t_us: f64) -> SpinState {
        let mut coeffs = self.eigenvectors.adjoint() * state.amplitudes;
        for k in 0..6 {
            let phase = -std::f64::consts::TAU * self.eigenvalues_khz[k] * t_us * 1e-3;
            coeffs[k] *= Complex64::from_polar(1.0, phase);
        }
        SpinState::from_unitary_image(&self.eigenvectors * coeffs)
    }

    pub fn eigenvalues_khz(&self) -> &Vector6<f64> {
        &self.eigenvalues_khz
    }
}

/// One-shot evolution: `exp(−i·2π·H·t)·state`.
pub fn propagate(
    state: &SpinState,
    h: &Matrix6<Complex64>,
    t_us: f64,
) -> Result<SpinState, DynamicsError> {
    Ok(Propagator::new(h)?.evolve(state, t_us))
}
