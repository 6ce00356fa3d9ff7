//! Frame-aware hyperfine-tensor algebra.
//!
//! A hyperfine interaction H = S·A·I is represented by a real symmetric 3×3
//! matrix `A` (kHz) together with the coordinate frame it is expressed in.
//! The frame tag is data, not behavior: operations that require a specific
//! frame fail loudly instead of silently re-rotating.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Coordinate frame of a hyperfine matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// NV principal axes: Z along the N→V symmetry axis, X/Y fixed but
    /// otherwise arbitrary.
    NvPacs,
    /// NV frame rotated about Z so that the XZ plane contains a given site;
    /// `azimuth_deg` is the polar angle of the site's (X, Y) position in the
    /// NV frame.
    SitePacs { azimuth_deg: f64 },
    /// Eigenbasis of the matrix itself.
    Principal,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::NvPacs => write!(f, "NV_PACS"),
            Frame::SitePacs { azimuth_deg } => write!(f, "SITE_PACS(azimuth {azimuth_deg}°)"),
            Frame::Principal => write!(f, "PRINCIPAL"),
        }
    }
}

#[derive(Debug, Error)]
pub enum HfiError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("frame mismatch: operation requires {required}, matrix is in {found}")]
    FrameMismatch { required: &'static str, found: String },
}

/// Real symmetric 3×3 hyperfine matrix (kHz) in a declared frame.
///
/// Symmetry and finiteness are enforced at construction, so every stored
/// matrix satisfies `A[(k, l)] == A[(l, k)]` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfiMatrix {
    m: Matrix3<f64>,
    frame: Frame,
}

/// Split of a hyperfine matrix into isotropic and traceless dipolar parts.
#[derive(Debug, Clone, Copy)]
pub struct HfiDecomposition {
    /// Fermi-contact (isotropic) part, trace(A)/3, kHz.
    pub a_iso: f64,
    /// Traceless symmetric dipolar part, kHz.
    pub dipolar: Matrix3<f64>,
}

/// Diagonalized form of a hyperfine matrix.
///
/// Principal values follow the convention `a_xx_d <= a_yy_d` so the
/// rhombicity is sign-definite, and the z axis is assigned to the eigenvalue
/// farthest from the isotropic part.
#[derive(Debug, Clone, Copy)]
pub struct PrincipalForm {
    /// Principal values, kHz.
    pub a_xx_d: f64,
    pub a_yy_d: f64,
    pub a_zz_d: f64,
    /// Axial part T^d = (a_zz_d − a_iso)/2, kHz.
    pub t_axial: f64,
    /// Rhombicity r = (a_yy_d − a_xx_d)/2 ≥ 0, kHz.
    pub rhombicity: f64,
    /// Orthogonal matrix whose columns are the principal axes (x, y, z)
    /// expressed in the input frame.
    pub direction_cosines: Matrix3<f64>,
    /// Direction cosine between the principal z axis and the frame Z axis;
    /// equals `direction_cosines[(2, 2)]`.
    pub cos_zz: f64,
}

/// Secular-approximation parameters of a hyperfine matrix in the NV frame.
///
/// Keeping only terms proportional to S_Z, the interaction reduces to
/// S_Z·(A_ZZ I_Z + T_nd (cos φ I_X + sin φ I_Y)) with
/// `t_nd = sqrt(A_ZX² + A_ZY²)` and `tan φ = A_ZY / A_ZX`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularParams {
    /// Diagonal component A_ZZ, kHz.
    pub a_zz_khz: f64,
    /// Non-diagonal magnitude T_nd ≥ 0, kHz.
    pub t_nd_khz: f64,
    /// In-plane phase φ = atan2(A_ZY, A_ZX), radians; 0 when t_nd = 0.
    pub phi_rad: f64,
}

impl SecularParams {
    /// Parameters with phase 0 (site on the +X half-plane).
    ///
    /// # Panics
    /// Panics if `t_nd_khz` is negative or either argument is non-finite —
    /// these are programmer errors, not data errors.
    pub fn new(a_zz_khz: f64, t_nd_khz: f64) -> Self {
        Self::with_phase(a_zz_khz, t_nd_khz, 0.0)
    }

    /// Parameters with an explicit in-plane phase (radians).
    pub fn with_phase(a_zz_khz: f64, t_nd_khz: f64, phi_rad: f64) -> Self {
        assert!(
            a_zz_khz.is_finite() && t_nd_khz.is_finite() && phi_rad.is_finite(),
            "secular parameters must be finite"
        );
        assert!(t_nd_khz >= 0.0, "t_nd must be non-negative, got {t_nd_khz}");
        let phi_rad = if t_nd_khz == 0.0 { 0.0 } else { phi_rad };
        Self { a_zz_khz, t_nd_khz, phi_rad }
    }

    /// Zero-field splitting Δ₀ = sqrt(t_nd² + a_zz²), kHz.
    pub fn delta0_khz(&self) -> f64 {
        self.t_nd_khz.hypot(self.a_zz_khz)
    }
}

/// A hyperfine matrix expressed in a site frame, with Cₛ-symmetry
/// diagnostics.
///
/// For a physically valid NV–¹³C tensor the local spin density is nearly
/// mirror-symmetric about the plane containing the NV axis and the site, so
/// `a_zy_khz` and `a_xy_khz` should be small; `symmetry_residual` quantifies
/// the deviation. The residual is diagnostic, never asserted — cluster-edge
/// effects break exact Cₛ symmetry.
#[derive(Debug, Clone, Copy)]
pub struct SiteFrame {
    /// The tensor in the site frame, tagged `Frame::SitePacs`.
    pub matrix: HfiMatrix,
    /// A'_ZY in the site frame, kHz (0 for exact mirror symmetry).
    pub a_zy_khz: f64,
    /// A'_XY in the site frame, kHz (0 for exact mirror symmetry).
    pub a_xy_khz: f64,
    /// max(|A'_ZY|, |A'_XY|) / t_nd; defined as 0 when t_nd = 0.
    pub symmetry_residual: f64,
}

/// Right-handed rotation about +Z by `theta` radians.
fn rot_z(theta_rad: f64) -> Matrix3<f64> {
    let (s, c) = theta_rad.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn check_finite(m: &Matrix3<f64>) -> Result<(), HfiError> {
    for k in 0..3 {
        for l in 0..3 {
            if !m[(k, l)].is_finite() {
                return Err(HfiError::InvalidMatrix(format!(
                    "element ({k},{l}) is not finite: {}",
                    m[(k, l)]
                )));
            }
        }
    }
    Ok(())
}

impl HfiMatrix {
    /// Builds from the six upper-triangle elements
    /// `[XX, XY, XZ, YY, YZ, ZZ]` in kHz; symmetric by construction.
    pub fn from_upper_triangle(frame: Frame, ut: [f64; 6]) -> Result<Self, HfiError> {
        let [xx, xy, xz, yy, yz, zz] = ut;
        let m = Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz);
        check_finite(&m)?;
        Ok(Self { m, frame })
    }

    /// Builds from a full 3×3 matrix, which must be symmetric: an asymmetry
    /// beyond 1e-9 (relative to the largest element) is an error, and any
    /// smaller numerical asymmetry is removed by symmetrization.
    pub fn from_matrix(frame: Frame, m: Matrix3<f64>) -> Result<Self, HfiError> {
        check_finite(&m)?;
        let scale = m.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
        for k in 0..3 {
            for l in (k + 1)..3 {
                let asym = (m[(k, l)] - m[(l, k)]).abs();
                if asym > 1e-9 * scale {
                    return Err(HfiError::InvalidMatrix(format!(
                        "asymmetric input: |A[({k},{l})] - A[({l},{k})]| = {asym} kHz"
                    )));
                }
            }
        }
        let sym = (m + m.transpose()) * 0.5;
        Ok(Self { m: sym, frame })
    }

    /// NV-frame matrix carrying only the secular content: row/column Z set
    /// to (t cos φ, t sin φ, a_zz), all other elements zero.
    pub fn from_secular(sp: &SecularParams) -> Self {
        let zx = sp.t_nd_khz * sp.phi_rad.cos();
        let zy = sp.t_nd_khz * sp.phi_rad.sin();
        Self {
            m: Matrix3::new(0.0, 0.0, zx, 0.0, 0.0, zy, zx, zy, sp.a_zz_khz),
            frame: Frame::NvPacs,
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Upper-triangle elements `[XX, XY, XZ, YY, YZ, ZZ]`, kHz.
    pub fn upper_triangle(&self) -> [f64; 6] {
        [
            self.m[(0, 0)],
            self.m[(0, 1)],
            self.m[(0, 2)],
            self.m[(1, 1)],
            self.m[(1, 2)],
            self.m[(2, 2)],
        ]
    }

    /// Splits into isotropic part a_iso = trace(A)/3 and traceless dipolar
    /// remainder T = A − a_iso·I₃.
    pub fn decompose(&self) -> Result<HfiDecomposition, HfiError> {
        check_finite(&self.m)?;
        let a_iso = self.m.trace() / 3.0;
        let dipolar = self.m - Matrix3::identity() * a_iso;
        Ok(HfiDecomposition { a_iso, dipolar })
    }

    /// Secular parameters (a_zz, t_nd, φ). Requires the NV frame: the
    /// secular approximation is defined with respect to the NV Z axis.
    pub fn secular_params(&self) -> Result<SecularParams, HfiError> {
        if self.frame != Frame::NvPacs {
            return Err(HfiError::FrameMismatch {
                required: "NV_PACS",
                found: self.frame.to_string(),
            });
        }
        let (zx, zy, zz) = (self.m[(2, 0)], self.m[(2, 1)], self.m[(2, 2)]);
        let t_nd = zx.hypot(zy);
        let phi = if t_nd == 0.0 { 0.0 } else { zy.atan2(zx) };
        Ok(SecularParams { a_zz_khz: zz, t_nd_khz: t_nd, phi_rad: phi })
    }

    /// Expresses the tensor in axes rotated right-handedly by `theta_deg`
    /// about Z: A' = Rᵀ(θ)·A·R(θ). A_ZZ and t_nd are invariant; the secular
    /// phase transforms as φ' = φ − θ.
    pub fn rotate_z(&self, theta_deg: f64) -> Result<HfiMatrix, HfiError> {
        if self.frame != Frame::NvPacs {
            return Err(HfiError::FrameMismatch {
                required: "NV_PACS",
                found: self.frame.to_string(),
            });
        }
        let r = rot_z(theta_deg.to_radians());
        let rotated = r.transpose() * self.m * r;
        // Exactly re-symmetrize the ~1 ulp numerical asymmetry of the triple
        // product so the type invariant stays exact.
        HfiMatrix::from_matrix(Frame::NvPacs, rotated)
    }

    /// Rotates into the frame whose XZ plane contains a site at the given
    /// azimuth (the polar angle of the site's (X, Y) position, degrees) and
    /// reports the Cₛ-symmetry diagnostics.
    ///
    /// For a site at azimuth θ₀ the secular phase is φ = θ₀ (mod π), so
    /// rotating by +θ₀ zeroes A'_ZY for an exactly mirror-symmetric tensor.
    pub fn to_site_frame(&self, site_azimuth_deg: f64) -> Result<SiteFrame, HfiError> {
        let rotated = self.rotate_z(site_azimuth_deg)?;
        let matrix = HfiMatrix {
            m: rotated.m,
            frame: Frame::SitePacs { azimuth_deg: site_azimuth_deg },
        };
        let a_zy = matrix.m[(2, 1)];
        let a_xy = matrix.m[(0, 1)];
        let t_nd = matrix.m[(2, 0)].hypot(a_zy);
        let symmetry_residual = if t_nd == 0.0 { 0.0 } else { a_zy.abs().max(a_xy.abs()) / t_nd };
        Ok(SiteFrame { matrix, a_zy_khz: a_zy, a_xy_khz: a_xy, symmetry_residual })
    }

    /// Diagonalizes to principal axes.
    ///
    /// Axis assignment: z goes to the eigenvalue with the largest
    /// |λ − a_iso| (ties broken toward larger λ, then larger eigensolver
    /// index, which makes the isotropic case report cos_Zz = 1); of the
    /// remaining two, x gets the smaller value so the rhombicity is ≥ 0.
    /// Column signs are fixed so each eigenvector's largest-magnitude entry
    /// is positive — degenerate spectra thus yield bit-reproducible output,
    /// never an error.
    pub fn diagonalize(&self) -> PrincipalForm {
        let (evals, evecs) = eigen_symmetric(&self.m);
        let a_iso = self.m.trace() / 3.0;

        // z = argmax |λ − a_iso|, tie → larger λ, then larger index.
        let z = (0..3)
            .max_by(|&a, &b| {
                let da = (evals[a] - a_iso).abs();
                let db = (evals[b] - a_iso).abs();
                da.partial_cmp(&db)
                    .unwrap()
                    .then(evals[a].partial_cmp(&evals[b]).unwrap())
                    .then(a.cmp(&b))
            })
            .unwrap();
        let rest: Vec<usize> = (0..3).filter(|&i| i != z).collect();
        let (x, y) = if evals[rest[0]] <= evals[rest[1]] {
            (rest[0], rest[1])
        } else {
            (rest[1], rest[0])
        };
        let idx = [x, y, z];

        let mut u = Matrix3::zeros();
        for (col, &src) in idx.iter().enumerate() {
            let v = evecs.column(src);
            // Largest-magnitude entry made positive (tie → smallest row).
            let lead = (0..3)
                .max_by(|&a, &b| {
                    v[a].abs()
                        .partial_cmp(&v[b].abs())
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap();
            let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
            for row in 0..3 {
                u[(row, col)] = sign * v[row];
            }
        }

        let (a_xx_d, a_yy_d, a_zz_d) = (evals[x], evals[y], evals[z]);
        PrincipalForm {
            a_xx_d,
            a_yy_d,
            a_zz_d,
            t_axial: (a_zz_d - a_iso) / 2.0,
            rhombicity: (a_yy_d - a_xx_d) / 2.0,
            direction_cosines: u,
            cos_zz: u[(2, 2)],
        }
    }
}

/// Eigendecomposition of a symmetric 3×3 matrix with an exact fast path for
/// diagonal input (principal values are then the diagonal entries verbatim
/// and the axes are the coordinate axes).
fn eigen_symmetric(m: &Matrix3<f64>) -> ([f64; 3], Matrix3<f64>) {
    let off = m[(0, 1)].abs().max(m[(0, 2)].abs()).max(m[(1, 2)].abs());
    if off == 0.0 {
        return ([m[(0, 0)], m[(1, 1)], m[(2, 2)]], Matrix3::identity());
    }
    let eig = SymmetricEigen::new(*m);
    (
        [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]],
        eig.eigenvectors,
    )
}

/// Parses upper-triangle rows (`XX XY XZ YY YZ ZZ` in kHz, whitespace-,
/// comma-, or tab-separated; `#` comment lines and blank lines skipped) into
/// NV-frame matrices. Errors carry the 1-based line number.
pub fn parse_upper_triangle_rows(input: &str) -> Result<Vec<HfiMatrix>, HfiError> {
    let mut out = Vec::new();
    for (lineno, raw) in input.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 6 {
            return Err(HfiError::InvalidMatrix(format!(
                "line {}: expected 6 upper-triangle values, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let mut ut = [0.0; 6];
        for (i, f) in fields.iter().enumerate() {
            ut[i] = f.parse::<f64>().map_err(|_| {
                HfiError::InvalidMatrix(format!("line {}: non-numeric value {f:?}", lineno + 1))
            })?;
        }
        out.push(HfiMatrix::from_upper_triangle(Frame::NvPacs, ut)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn nv(ut: [f64; 6]) -> HfiMatrix {
        HfiMatrix::from_upper_triangle(Frame::NvPacs, ut).unwrap()
    }

    #[test]
    fn decompose_pure_isotropic() {
        let a = nv([5.0, 0.0, 0.0, 5.0, 0.0, 5.0]);
        let d = a.decompose().unwrap();
        assert_eq!(d.a_iso, 5.0);
        assert_eq!(d.dipolar, Matrix3::zeros());
    }

    #[test]
    fn decompose_traceless_input() {
        let a = nv([-1.0, 0.0, 0.0, -1.0, 0.0, 2.0]);
        let d = a.decompose().unwrap();
        assert_eq!(d.a_iso, 0.0);
        assert_eq!(&d.dipolar, a.matrix());
    }

    #[test]
    fn decompose_diag_100_200_300() {
        let a = nv([100.0, 0.0, 0.0, 200.0, 0.0, 300.0]);
        let d = a.decompose().unwrap();
        assert_eq!(d.a_iso, 200.0);
        assert_eq!(d.dipolar, Matrix3::from_diagonal(&nalgebra::Vector3::new(-100.0, 0.0, 100.0)));
    }

    #[test]
    fn decompose_reconstructs() {
        let a = nv([12.5, -3.0, 7.25, -80.0, 0.5, 1991.75]);
        let d = a.decompose().unwrap();
        let rec = Matrix3::identity() * d.a_iso + d.dipolar;
        for k in 0..3 {
            for l in 0..3 {
                assert_relative_eq!(rec[(k, l)], a.matrix()[(k, l)], max_relative = 1e-12);
            }
        }
        assert!(d.dipolar.trace().abs() <= 1e-9 * 1991.75);
    }

    #[test]
    fn secular_axial_site_row() {
        // A_ZZ = 194.0, A_ZX = 0.1, A_ZY = 0.
        let a = nv([0.0, 0.0, 0.1, 0.0, 0.0, 194.0]);
        let sp = a.secular_params().unwrap();
        assert_eq!(sp.a_zz_khz, 194.0);
        assert_eq!(sp.t_nd_khz, 0.1);
        assert_eq!(sp.phi_rad, 0.0);
    }

    #[test]
    fn secular_diagonal_matrix() {
        let sp = nv([1.0, 0.0, 0.0, 2.0, 0.0, 3.0]).secular_params().unwrap();
        assert_eq!(sp.t_nd_khz, 0.0);
        assert_eq!(sp.phi_rad, 0.0);
    }

    #[test]
    fn secular_3_4_5_triangle() {
        let a = nv([0.0, 0.0, 3.0, 0.0, 4.0, 0.0]);
        let sp = a.secular_params().unwrap();
        assert_eq!(sp.a_zz_khz, 0.0);
        assert_relative_eq!(sp.t_nd_khz, 5.0, max_relative = 1e-15);
        assert_relative_eq!(sp.phi_rad, 4.0_f64.atan2(3.0), max_relative = 1e-15);
    }

    #[test]
    fn secular_requires_nv_frame() {
        let a = HfiMatrix::from_upper_triangle(
            Frame::SitePacs { azimuth_deg: 10.0 },
            [0.0, 0.0, 1.0, 0.0, 0.0, 2.0],
        )
        .unwrap();
        assert!(matches!(a.secular_params(), Err(HfiError::FrameMismatch { .. })));
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = Matrix3::new(0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            HfiMatrix::from_matrix(Frame::NvPacs, m),
            Err(HfiError::InvalidMatrix(_))
        ));
    }

    #[test]
    fn nonfinite_input_rejected() {
        assert!(HfiMatrix::from_upper_triangle(Frame::NvPacs, [0.0, f64::NAN, 0.0, 0.0, 0.0, 0.0])
            .is_err());
    }

    #[test]
    fn rotate_identity_and_full_turn() {
        let a = nv([10.0, -2.0, 3.0, 4.0, 5.0, -6.0]);
        let r0 = a.rotate_z(0.0).unwrap();
        for k in 0..3 {
            for l in 0..3 {
                assert_relative_eq!(r0.matrix()[(k, l)], a.matrix()[(k, l)], epsilon = 1e-14);
                assert_relative_eq!(
                    a.rotate_z(360.0).unwrap().matrix()[(k, l)],
                    a.matrix()[(k, l)],
                    epsilon = 1e-12 * 10.0
                );
            }
        }
    }

    #[test]
    fn rotate_preserves_spectrum_at_120_degrees() {
        let a = nv([10.0, -2.0, 3.0, 4.0, 5.0, -6.0]);
        let b = a.rotate_z(120.0).unwrap();
        let mut ea: Vec<f64> = SymmetricEigen::new(*a.matrix()).eigenvalues.iter().copied().collect();
        let mut eb: Vec<f64> = SymmetricEigen::new(*b.matrix()).eigenvalues.iter().copied().collect();
        ea.sort_by(|p, q| p.partial_cmp(q).unwrap());
        eb.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for (p, q) in ea.iter().zip(&eb) {
            assert_relative_eq!(p, q, epsilon = 1e-10);
        }
    }

    #[test]
    fn site_frame_azimuth_zero_is_retag_only() {
        let a = nv([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let sf = a.to_site_frame(0.0).unwrap();
        assert_eq!(sf.matrix.frame(), Frame::SitePacs { azimuth_deg: 0.0 });
        for k in 0..3 {
            for l in 0..3 {
                assert_relative_eq!(sf.matrix.matrix()[(k, l)], a.matrix()[(k, l)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn site_frame_zeroes_mirror_symmetric_tensor() {
        // Construct a tensor mirror-symmetric about the XZ plane (A_XY =
        // A_ZY = 0), rotate it out by a known azimuth, then ask
        // to_site_frame to bring it back.
        let theta0 = 37.3_f64;
        let sym = nv([11.0, 0.0, 4.0, -7.0, 0.0, 20.0]);
        let moved = sym.rotate_z(-theta0).unwrap();
        let back = moved.to_site_frame(theta0).unwrap();
        assert!(back.symmetry_residual < 1e-12, "residual {}", back.symmetry_residual);
        assert!(back.a_zy_khz.abs() < 1e-10);
        assert!(back.a_xy_khz.abs() < 1e-10);
    }

    #[test]
    fn diagonalize_diagonal_input() {
        let p = nv([3.0, 0.0, 0.0, 1.0, 0.0, 2.0]).diagonalize();
        // a_iso = 2; deviations: |3-2|=1, |1-2|=1, |2-2|=0 → z = larger λ of
        // the tie = 3; remaining {1, 2} → x = 1, y = 2.
        assert_eq!((p.a_xx_d, p.a_yy_d, p.a_zz_d), (1.0, 2.0, 3.0));
        assert_eq!(p.rhombicity, 0.5);
        // Columns are coordinate axes (permutation matrix).
        let u = p.direction_cosines;
        assert_eq!((u * u.transpose()), Matrix3::identity());
    }

    #[test]
    fn diagonalize_isotropic_convention() {
        let p = nv([7.0, 0.0, 0.0, 7.0, 0.0, 7.0]).diagonalize();
        assert_eq!(p.t_axial, 0.0);
        assert_eq!(p.rhombicity, 0.0);
        assert_eq!(p.cos_zz, 1.0);
    }

    #[test]
    fn diagonalize_axial_tensor() {
        // diag(-1, -1, 2): a_iso = 0, t_axial = 1, r = 0, z along Z.
        let p = nv([-1.0, 0.0, 0.0, -1.0, 0.0, 2.0]).diagonalize();
        assert_eq!(p.a_zz_d, 2.0);
        assert_eq!(p.t_axial, 1.0);
        assert_eq!(p.rhombicity, 0.0);
        assert_eq!(p.cos_zz, 1.0);
    }

    #[test]
    fn diagonalize_round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let ut: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1e5..1e5));
            let a = nv(ut);
            let p = a.diagonalize();
            let u = p.direction_cosines;
            let d = Matrix3::from_diagonal(&nalgebra::Vector3::new(p.a_xx_d, p.a_yy_d, p.a_zz_d));
            let rec = u * d * u.transpose();
            // Eigensolver error scales with the matrix norm (~1e5 kHz here).
            let tol = 1e-12 * a.matrix().norm();
            for k in 0..3 {
                for l in 0..3 {
                    assert!(
                        (rec[(k, l)] - a.matrix()[(k, l)]).abs() < tol,
                        "round-trip element ({k},{l}) off by {}",
                        (rec[(k, l)] - a.matrix()[(k, l)]).abs()
                    );
                }
            }
            assert!(p.rhombicity >= 0.0);
            let ortho = u.transpose() * u - Matrix3::identity();
            assert!(ortho.iter().all(|x| x.abs() < 1e-10));
            let a_iso = a.matrix().trace() / 3.0;
            assert!((p.a_xx_d - (a_iso - p.t_axial - p.rhombicity)).abs() < tol);
            assert!((p.a_yy_d - (a_iso - p.t_axial + p.rhombicity)).abs() < tol);
            assert!((p.a_zz_d - (a_iso + 2.0 * p.t_axial)).abs() < tol);
            assert_eq!(p.cos_zz, u[(2, 2)]);
        }
    }

    #[test]
    fn parse_upper_triangle_rows_mixed_separators() {
        let rows = parse_upper_triangle_rows(
            "# comment\n1 0 0 1 0 1\n\n2.5,0,0.1,2.5,0,194.0\n",
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].matrix()[(2, 2)], 194.0);
    }

    #[test]
    fn parse_upper_triangle_rows_reports_line() {
        let err = parse_upper_triangle_rows("1 0 0 1 0 1\n1 2 3\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
