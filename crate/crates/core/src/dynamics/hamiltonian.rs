//! Static Hamiltonian of the electron–nuclear system, in kHz.

use super::{DynamicsError, Manifold};
use crate::hfi::{Frame, HfiMatrix, SecularParams};
use nalgebra::{Matrix2, Matrix3, Matrix6};
use num_complex::Complex64;

/// Zero-field splitting of the electron ground state triplet.
pub const D_ZFS_DEFAULT_MHZ: f64 = 2870.0;
/// Electron gyromagnetic ratio.
pub const GAMMA_E_DEFAULT_MHZ_PER_G: f64 = 2.8025;

/// Hyperfine coupling, either the secular triple (a_zz, t_nd, φ) or a full
/// symmetric matrix for validation work near level crossings.
#[derive(Debug, Clone)]
pub enum HfiCoupling {
    Secular(SecularParams),
    /// Full S·A·I coupling. The matrix components are read in the NV frame;
    /// a matrix tagged with any other frame is rejected by
    /// [`SpinHamiltonianParams::validate`].
    Full(HfiMatrix),
}

/// Parameters of the static spin Hamiltonian
/// `H = D·S_Z² + E·(S_X² − S_Y²) + γ_e B S_Z − γ_n B I_Z + hfi`.
///
/// The nuclear Zeeman sign convention −γ_n B I_Z makes the m_S = 0 nuclear
/// transition frequency +γ_n B.
#[derive(Debug, Clone)]
pub struct SpinHamiltonianParams {
    pub d_zfs_mhz: f64,
    pub e_zfs_mhz: f64,
    pub b_gauss: f64,
    pub gamma_e_mhz_per_g: f64,
    pub gamma_n_khz_per_g: f64,
    pub hfi: HfiCoupling,
}

impl SpinHamiltonianParams {
    /// Default NV constants with a secular hyperfine coupling.
    pub fn secular(sp: SecularParams, b_gauss: f64) -> Self {
        Self {
            d_zfs_mhz: D_ZFS_DEFAULT_MHZ,
            e_zfs_mhz: 0.0,
            b_gauss,
            gamma_e_mhz_per_g: GAMMA_E_DEFAULT_MHZ_PER_G,
            gamma_n_khz_per_g: crate::observables::GAMMA_N_C13_KHZ_PER_G,
            hfi: HfiCoupling::Secular(sp),
        }
    }

    /// Default NV constants with a full hyperfine matrix (NV frame).
    pub fn full(matrix: HfiMatrix, b_gauss: f64) -> Self {
        Self {
            d_zfs_mhz: D_ZFS_DEFAULT_MHZ,
            e_zfs_mhz: 0.0,
            b_gauss,
            gamma_e_mhz_per_g: GAMMA_E_DEFAULT_MHZ_PER_G,
            gamma_n_khz_per_g: crate::observables::GAMMA_N_C13_KHZ_PER_G,
            hfi: HfiCoupling::Full(matrix),
        }
    }

    /// Checks the physical invariants: D > 0, positive gyromagnetic ratios,
    /// finite field, and an NV-frame matrix in full-coupling mode.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.d_zfs_mhz.is_finite() && self.d_zfs_mhz > 0.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "d_zfs must be positive, got {} MHz",
                self.d_zfs_mhz
            )));
        }
        if !self.e_zfs_mhz.is_finite() {
            return Err(DynamicsError::InvalidParams("e_zfs must be finite".into()));
        }
        if !self.b_gauss.is_finite() {
            return Err(DynamicsError::InvalidParams("field must be finite".into()));
        }
        if !(self.gamma_e_mhz_per_g.is_finite() && self.gamma_e_mhz_per_g > 0.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "gamma_e must be positive, got {}",
                self.gamma_e_mhz_per_g
            )));
        }
        if !(self.gamma_n_khz_per_g.is_finite() && self.gamma_n_khz_per_g > 0.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "gamma_n must be positive, got {}",
                self.gamma_n_khz_per_g
            )));
        }
        if let HfiCoupling::Full(m) = &self.hfi {
            if m.frame() != Frame::NvPacs {
                return Err(DynamicsError::InvalidParams(format!(
                    "full hyperfine matrix must be in the NV frame, found {}",
                    m.frame()
                )));
            }
        }
        Ok(())
    }

    /// The secular parameters, or an error naming `op` when the coupling is
    /// a full matrix.
    pub(super) fn require_secular(&self, op: &'static str) -> Result<&SecularParams, DynamicsError> {
        match &self.hfi {
            HfiCoupling::Secular(sp) => Ok(sp),
            HfiCoupling::Full(_) => Err(DynamicsError::SecularRequired(op)),
        }
    }
}

/// Assembles the 6×6 Hamiltonian in kHz over the fixed basis
/// (+1↑, +1↓, 0↑, 0↓, −1↑, −1↓).
///
/// With secular coupling the matrix is block-diagonal over manifolds; the
/// manifold energy `e_m = D·m² + γ_e·B·m` is computed once per manifold and
/// shared by both of its diagonal entries, so within-manifold splittings
/// survive the large-energy offset to better than 1e-9 kHz.
/// The trace-shifted secular 2×2 block of manifold `m` over (↑, ↓):
/// `[[x, c], [c̄, −x]]` with `x = (m·a_zz − γ_n B)/2` and
/// `c = m·(t_nd/2)·e^(−iφ)`. Shared by the Hamiltonian assembly and the
/// manifold-confined experiment fast paths so both see bit-identical
/// arithmetic.
pub(super) fn secular_block(
    sp: &SecularParams,
    gamma_n_khz_per_g: f64,
    b_gauss: f64,
    m: Manifold,
) -> (f64, Complex64) {
    let ms = m.m_s();
    let x = 0.5 * (ms * sp.a_zz_khz - gamma_n_khz_per_g * b_gauss);
    let c = Complex64::from_polar(0.5 * sp.t_nd_khz, -sp.phi_rad) * ms;
    (x, c)
}

pub fn build_hamiltonian(p: &SpinHamiltonianParams) -> Matrix6<Complex64> {
    let d_khz = p.d_zfs_mhz * 1e3;
    let e_khz = p.e_zfs_mhz * 1e3;
    let gamma_e_khz = p.gamma_e_mhz_per_g * 1e3;

    let mut h = match &p.hfi {
        HfiCoupling::Secular(sp) => {
            let mut h = Matrix6::zeros();
            for m in Manifold::ALL {
                let ms = m.m_s();
                let e_m = d_khz * ms * ms + gamma_e_khz * p.b_gauss * ms;
                let (x, c) = secular_block(sp, p.gamma_n_khz_per_g, p.b_gauss, m);
                let i = m.base_index();
                h[(i, i)] = Complex64::new(e_m + x, 0.0);
                h[(i + 1, i + 1)] = Complex64::new(e_m - x, 0.0);
                h[(i, i + 1)] = c;
                h[(i + 1, i)] = c.conj();
            }
            h
        }
        HfiCoupling::Full(matrix) => {
            let (sx, sy, sz) = spin1_operators();
            let (ix, iy, iz) = spin_half_operators();
            let id2 = Matrix2::identity();
            let id3 = Matrix3::identity();
            let s_ops = [&sx, &sy, &sz];
            let i_ops = [&ix, &iy, &iz];
            let mut h: Matrix6<Complex64> = (sz * sz).kronecker(&id2) * cr(d_khz)
                + (sx * sx - sy * sy).kronecker(&id2) * cr(e_khz)
                + sz.kronecker(&id2) * cr(gamma_e_khz * p.b_gauss)
                - id3.kronecker(&iz) * cr(p.gamma_n_khz_per_g * p.b_gauss);
            let a = matrix.matrix();
            for (k, sk) in s_ops.iter().enumerate() {
                for (l, il) in i_ops.iter().enumerate() {
                    h += sk.kronecker(il) * cr(a[(k, l)]);
                }
            }
            h
        }
    };

    // Rhombic zero-field term for the secular path: E couples m_S = ±1 at
    // equal m_I. (The full path already contains it through S_X² − S_Y².)
    if e_khz != 0.0 {
        if let HfiCoupling::Secular(_) = &p.hfi {
            h[(0, 4)] += cr(e_khz);
            h[(4, 0)] += cr(e_khz);
            h[(1, 5)] += cr(e_khz);
            h[(5, 1)] += cr(e_khz);
        }
    }
    h
}

/// The within-manifold nuclear splitting of a Hamiltonian:
/// `sqrt((H_ii − H_jj)² + (2|H_ij|)²)` over the manifold's two basis
/// states. For secular (block-diagonal) Hamiltonians this is the exact
/// nuclear transition frequency of the manifold.
pub fn manifold_splitting(h: &Matrix6<Complex64>, manifold: Manifold) -> f64 {
    let i = manifold.base_index();
    let diff = h[(i, i)].re - h[(i + 1, i + 1)].re;
    diff.hypot(2.0 * h[(i, i + 1)].norm())
}

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn spin1_operators() -> (Matrix3<Complex64>, Matrix3<Complex64>, Matrix3<Complex64>) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sx = Matrix3::new(
        cr(0.0), cr(s), cr(0.0),
        cr(s), cr(0.0), cr(s),
        cr(0.0), cr(s), cr(0.0),
    );
    let sy = Matrix3::new(
        cr(0.0), Complex64::new(0.0, -s), cr(0.0),
        Complex64::new(0.0, s), cr(0.0), Complex64::new(0.0, -s),
        cr(0.0), Complex64::new(0.0, s), cr(0.0),
    );
    let sz = Matrix3::new(
        cr(1.0), cr(0.0), cr(0.0),
        cr(0.0), cr(0.0), cr(0.0),
        cr(0.0), cr(0.0), cr(-1.0),
    );
    (sx, sy, sz)
}

fn spin_half_operators() -> (Matrix2<Complex64>, Matrix2<Complex64>, Matrix2<Complex64>) {
    let ix = Matrix2::new(cr(0.0), cr(0.5), cr(0.5), cr(0.0));
    let iy = Matrix2::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, -0.5),
        Complex64::new(0.0, 0.5),
        Complex64::new(0.0, 0.0),
    );
    let iz = Matrix2::new(cr(0.5), cr(0.0), cr(0.0), cr(-0.5));
    (ix, iy, iz)
}
