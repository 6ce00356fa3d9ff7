//! Time-domain simulation of the coupled electron (S = 1) ⊗ nuclear
//! (I = 1/2) spin system.
//!
//! The six-dimensional product basis is fixed throughout as
//! (+1↑, +1↓, 0↑, 0↓, −1↑, −1↓): electron manifold major, nuclear spin
//! minor. All Hamiltonians are expressed in kHz; evolution times are µs for
//! microwave-scale segments and ms for radiofrequency pulses.

mod experiments;
mod hamiltonian;
mod sequence;
mod ssr;
mod state;

pub use experiments::{
    endor_sweep, flip_probability_trace, xy8_resonance_tau_us, xy8_trace, EndorPoint, FlipTrace,
    RfRange, TimeGrid, Xy8Point, Xy8Settings, FLIP_TRACE_DEFAULT_STEPS,
};
pub use hamiltonian::{
    build_hamiltonian, manifold_splitting, HfiCoupling, SpinHamiltonianParams,
    D_ZFS_DEFAULT_MHZ, GAMMA_E_DEFAULT_MHZ_PER_G,
};
pub use sequence::{run_sequence, MeasureRecord, PulseSequence, Segment, SequenceOutcome};
pub use ssr::{ssr_trace, ReadoutModel, SsrParams, SsrSample, SsrTrace};
pub use state::{propagate, Propagator, SpinState};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid Hamiltonian parameters: {0}")]
    InvalidParams(String),
    #[error("state norm is {0}, expected 1 within 1e-9 (renormalize explicitly)")]
    NonUnitNorm(f64),
    #[error("matrix is not Hermitian (asymmetry {0:.3e} relative)")]
    NotHermitian(f64),
    #[error("{0} requires secular hyperfine parameters, not a full matrix")]
    SecularRequired(&'static str),
    #[error("invalid pulse sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
}

/// Electron spin manifold m_S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Manifold {
    Plus,
    Zero,
    Minus,
}

impl Manifold {
    pub const ALL: [Manifold; 3] = [Manifold::Plus, Manifold::Zero, Manifold::Minus];

    /// The quantum number m_S as a float, for Hamiltonian assembly.
    pub fn m_s(self) -> f64 {
        match self {
            Manifold::Plus => 1.0,
            Manifold::Zero => 0.0,
            Manifold::Minus => -1.0,
        }
    }

    /// Index of the (manifold, ↑) basis state; (manifold, ↓) follows it.
    pub fn base_index(self) -> usize {
        match self {
            Manifold::Plus => 0,
            Manifold::Zero => 2,
            Manifold::Minus => 4,
        }
    }
}

impl std::fmt::Display for Manifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Manifold::Plus => write!(f, "+1"),
            Manifold::Zero => write!(f, "0"),
            Manifold::Minus => write!(f, "-1"),
        }
    }
}

impl std::str::FromStr for Manifold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+1" | "plus" | "p" => Ok(Manifold::Plus),
            "0" | "zero" => Ok(Manifold::Zero),
            "-1" | "minus" | "m" => Ok(Manifold::Minus),
            other => Err(format!("unknown manifold `{other}` (use +1, 0, or -1)")),
        }
    }
}

/// Nuclear spin projection m_I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum NuclearSpin {
    Up,
    Down,
}

impl NuclearSpin {
    pub fn flipped(self) -> Self {
        match self {
            NuclearSpin::Up => NuclearSpin::Down,
            NuclearSpin::Down => NuclearSpin::Up,
        }
    }

    fn offset(self) -> usize {
        match self {
            NuclearSpin::Up => 0,
            NuclearSpin::Down => 1,
        }
    }
}

impl std::fmt::Display for NuclearSpin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NuclearSpin::Up => write!(f, "up"),
            NuclearSpin::Down => write!(f, "down"),
        }
    }
}

/// Index of |manifold, nuclear⟩ in the fixed 6-state basis ordering.
pub fn basis_index(manifold: Manifold, nuclear: NuclearSpin) -> usize {
    manifold.base_index() + nuclear.offset()
}
