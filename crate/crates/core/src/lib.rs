//! Analysis toolkit for NV–¹³C hyperfine spin systems in diamond.
//!
//! The crate is organized around the lifecycle of a hyperfine data set:
//!
//! - [`hfi`] — frame-aware algebra on symmetric 3×3 hyperfine matrices:
//!   isotropic/dipolar decomposition, Z rotations, site-frame construction,
//!   diagonalization to principal axes.
//! - [`observables`] — closed-form experimental observables (Δ₀, Δ±, δ_n,
//!   Γ₀, Γ±, τ₀) from secular parameters and an axial magnetic field.
//! - [`registry`] — ingestion, validation, ranking, and family
//!   classification of per-site hyperfine tables.
//! - [`dipolar`] — point-dipole quadrature of the dipolar tensor over
//!   discretized electron spin densities, and symmetry diagnostics.
//! - [`dynamics`] — time-domain simulation of the coupled S = 1 electron ⊗
//!   I = 1/2 nuclear system: ENDOR sweeps, XY8 decoupling, nuclear
//!   flip-probability traces, and single-shot-readout telegraph traces.
//!
//! Units follow one convention throughout: energies/frequencies in kHz,
//! magnetic fields in Gauss, distances in Ångström, angles in degrees at API
//! boundaries (radians internally), times in the unit named by each field.

pub mod dipolar;
pub mod dynamics;
pub mod hfi;
pub mod observables;
pub mod registry;

/// Linear-algebra types ([`nalgebra::Matrix3`], [`nalgebra::Vector3`], …)
/// appear in this crate's public API; the re-export pins the matching
/// version for downstream users.
pub use nalgebra;

pub use hfi::{Frame, HfiDecomposition, HfiError, HfiMatrix, PrincipalForm, SecularParams};
pub use observables::{FieldPoint, ObservableSet, GAMMA_N_C13_KHZ_PER_G};
