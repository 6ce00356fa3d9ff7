//! Point-dipole evaluation of the anisotropic hyperfine tensor from a
//! discretized electron spin density, plus the mirror-symmetrization
//! machinery that demonstrates why the nuclear-flip-driving elements vanish
//! for Cₛ-symmetric densities.
//!
//! The kernel is the full traceless point-dipole form
//! `(3 d_K d_L − δ_KL |d|²)/|d|⁵`, so diagonal elements come out consistent
//! with the off-diagonal ones; all lengths are in Å and the returned tensor
//! is in kHz (for the physically calibrated prefactor) or in units of the
//! supplied prefactor otherwise.

use nalgebra::{Matrix3, Rotation3, Vector3};
use thiserror::Error;

/// Point-dipole coupling scale μ₀/(4π)·g_e·μ_B·g_n(¹³C)·μ_N/h in kHz·Å³.
///
/// Assembled from CODATA-2018 constants: g_e = 2.00231930436256,
/// μ_B = 9.2740100783e-24 J/T, g_n(¹³C) = 1.4048236,
/// μ_N = 5.0507837461e-27 J/T, h = 6.62607015e-34 J·s. Two spins 1 Å apart
/// along their separation axis couple at T_ZZ = 2 × this value (for 2S = 1).
pub const POINT_DIPOLE_COUPLING_KHZ_ANG3: f64 = 19884.992757714965;

/// Minimum allowed distance between a density point and the nucleus.
pub const SINGULARITY_GUARD_ANG: f64 = 0.05;

#[derive(Debug, Error)]
pub enum DipolarError {
    #[error("spin density model must contain at least one point")]
    EmptyDensity,
    #[error("density point {index} has a non-finite position or weight")]
    NonFinitePoint { index: usize },
    #[error("total spin must be positive and finite, got {0}")]
    InvalidSpin(f64),
    #[error(
        "density point {index} at ({x:.4}, {y:.4}, {z:.4}) Å lies within \
         {SINGULARITY_GUARD_ANG} Å of the nucleus"
    )]
    SingularDensity { index: usize, x: f64, y: f64, z: f64 },
    #[error("dipole prefactor must be positive and finite, got {0}")]
    InvalidPrefactor(f64),
    #[error("axis candidate must be a unit vector (norm {0})")]
    InvalidAxis(f64),
    #[error("density file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One quadrature point of the spin density: position in Å and a signed,
/// dimensionless spin population weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub position: Vector3<f64>,
    pub weight: f64,
}

/// A discretized electron spin density: weighted points plus the total
/// electron spin S the density represents. A fully physical density has
/// weights summing to 2S; partial densities (used in symmetry experiments)
/// are allowed and flagged only through [`SpinDensityModel::normalization_warning`].
#[derive(Debug, Clone)]
pub struct SpinDensityModel {
    points: Vec<DensityPoint>,
    total_spin: f64,
}

impl SpinDensityModel {
    pub fn new(points: Vec<DensityPoint>, total_spin: f64) -> Result<Self, DipolarError> {
        if points.is_empty() {
            return Err(DipolarError::EmptyDensity);
        }
        for (index, p) in points.iter().enumerate() {
            if !(p.position.iter().all(|c| c.is_finite()) && p.weight.is_finite()) {
                return Err(DipolarError::NonFinitePoint { index });
            }
        }
        if !(total_spin.is_finite() && total_spin > 0.0) {
            return Err(DipolarError::InvalidSpin(total_spin));
        }
        Ok(Self { points, total_spin })
    }

    pub fn points(&self) -> &[DensityPoint] {
        &self.points
    }

    pub fn total_spin(&self) -> f64 {
        self.total_spin
    }

    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    /// Some(message) when the weights do not sum to ≈ 2S (relative
    /// tolerance 1e-3), i.e. the model is a partial density rather than a
    /// normalized physical one. Informational only — never an error.
    pub fn normalization_warning(&self) -> Option<String> {
        let expected = 2.0 * self.total_spin;
        let sum = self.weight_sum();
        if (sum - expected).abs() > 1e-3 * expected.abs().max(1.0) {
            Some(format!(
                "density weights sum to {sum:.6}, expected 2S = {expected:.6} \
                 for a physical model (partial densities are allowed)"
            ))
        } else {
            None
        }
    }

    /// Parses a density from TSV text: one `x y z weight` row per line
    /// (Å, dimensionless), whitespace- or comma-separated, '#' comments
    /// and blank lines ignored.
    pub fn from_tsv(input: &str, total_spin: f64) -> Result<Self, DipolarError> {
        let mut points = Vec::new();
        for (lineno, raw) in input.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 4 {
                return Err(DipolarError::Parse {
                    line: lineno + 1,
                    msg: format!("expected 4 fields `x y z weight`, found {}", fields.len()),
                });
            }
            let mut vals = [0.0_f64; 4];
            for (k, f) in fields.iter().enumerate() {
                vals[k] = f.parse().map_err(|_| DipolarError::Parse {
                    line: lineno + 1,
                    msg: format!("cannot parse `{f}` as a number"),
                })?;
            }
            points.push(DensityPoint {
                position: Vector3::new(vals[0], vals[1], vals[2]),
                weight: vals[3],
            });
        }
        Self::new(points, total_spin)
    }
}

/// The single combined prefactor multiplying the point-dipole sum, in
/// kHz·Å³. Symmetry results are prefactor-independent, so the default is
/// the unit prefactor; [`DipoleConstants::physical`] supplies the
/// calibrated value for quantitative work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleConstants {
    pub prefactor_khz_ang3: f64,
}

impl Default for DipoleConstants {
    fn default() -> Self {
        Self { prefactor_khz_ang3: 1.0 }
    }
}

impl DipoleConstants {
    pub fn new(prefactor_khz_ang3: f64) -> Result<Self, DipolarError> {
        if !(prefactor_khz_ang3.is_finite() && prefactor_khz_ang3 > 0.0) {
            return Err(DipolarError::InvalidPrefactor(prefactor_khz_ang3));
        }
        Ok(Self { prefactor_khz_ang3 })
    }

    /// Physically calibrated prefactor for an electron spin S: the density
    /// weights sum to 2S, so each unit of weight couples at
    /// [`POINT_DIPOLE_COUPLING_KHZ_ANG3`]/(2S).
    pub fn physical(total_spin: f64) -> Result<Self, DipolarError> {
        if !(total_spin.is_finite() && total_spin > 0.0) {
            return Err(DipolarError::InvalidSpin(total_spin));
        }
        Self::new(POINT_DIPOLE_COUPLING_KHZ_ANG3 / (2.0 * total_spin))
    }
}

/// Evaluates the traceless point-dipole tensor at `nucleus`:
/// `T_KL = prefactor · Σᵢ wᵢ (3 dᵢ_K dᵢ_L − δ_KL |dᵢ|²)/|dᵢ|⁵` with
/// `dᵢ = rᵢ − R_n`. The sum uses a fixed binary-tree reduction (leaf size
/// 64) so the floating-point result is bit-identical regardless of how the
/// work is scheduled across threads.
pub fn t_tensor(
    density: &SpinDensityModel,
    nucleus: &Vector3<f64>,
    constants: &DipoleConstants,
) -> Result<Matrix3<f64>, DipolarError> {
    for (index, p) in density.points.iter().enumerate() {
        if (p.position - nucleus).norm() < SINGULARITY_GUARD_ANG {
            return Err(DipolarError::SingularDensity {
                index,
                x: p.position.x,
                y: p.position.y,
                z: p.position.z,
            });
        }
    }
    Ok(tree_sum(&density.points, nucleus) * constants.prefactor_khz_ang3)
}

fn point_kernel(p: &DensityPoint, nucleus: &Vector3<f64>) -> Matrix3<f64> {
    let d = p.position - nucleus;
    let r2 = d.norm_squared();
    let r5 = r2 * r2 * r2.sqrt();
    let mut m = d * d.transpose() * 3.0;
    m[(0, 0)] -= r2;
    m[(1, 1)] -= r2;
    m[(2, 2)] -= r2;
    m * (p.weight / r5)
}

fn tree_sum(points: &[DensityPoint], nucleus: &Vector3<f64>) -> Matrix3<f64> {
    const LEAF: usize = 64;
    if points.len() <= LEAF {
        let mut acc = Matrix3::zeros();
        for p in points {
            acc += point_kernel(p, nucleus);
        }
        acc
    } else {
        let mid = points.len() / 2;
        let (a, b) = rayon::join(
            || tree_sum(&points[..mid], nucleus),
            || tree_sum(&points[mid..], nucleus),
        );
        a + b
    }
}

/// Reflection matrix across the plane containing the Z axis and the
/// in-plane direction at `plane_azimuth_deg` from X.
fn mirror_matrix(plane_azimuth_deg: f64) -> Matrix3<f64> {
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), plane_azimuth_deg.to_radians());
    r.matrix() * Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)) * r.matrix().transpose()
}

/// Symmetrizes a density across the vertical plane at `plane_azimuth_deg`:
/// every point is kept at half weight and joined by its mirror image at
/// half weight, so the total weight is preserved and the result is exactly
/// invariant under the reflection.
pub fn mirror_about_xz(density: &SpinDensityModel, plane_azimuth_deg: f64) -> SpinDensityModel {
    let m = mirror_matrix(plane_azimuth_deg);
    let mut points = Vec::with_capacity(2 * density.points.len());
    for p in &density.points {
        points.push(DensityPoint { position: p.position, weight: 0.5 * p.weight });
    }
    for p in &density.points {
        points.push(DensityPoint { position: m * p.position, weight: 0.5 * p.weight });
    }
    SpinDensityModel { points, total_spin: density.total_spin }
}

/// Expresses a tensor in the frame whose X axis points along the in-plane
/// direction at `azimuth_deg` (the same frame convention as the site-frame
/// rotation of the tensor algebra module): `T' = Rᵀ(az)·T·R(az)`.
pub fn tensor_in_azimuth_frame(t: &Matrix3<f64>, azimuth_deg: f64) -> Matrix3<f64> {
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), azimuth_deg.to_radians());
    r.matrix().transpose() * t * r.matrix()
}

/// Right-handed orthonormal frame (columns X, Y, Z) with X along `axis`
/// and Z chosen as close to the lab Z axis as possible.
fn frame_with_x(axis: &Vector3<f64>) -> Matrix3<f64> {
    let x = axis.normalize();
    let helper = if x.z.abs() < 0.99 { Vector3::z() } else { Vector3::x() };
    let z = (helper - x * helper.dot(&x)).normalize();
    let y = z.cross(&x);
    Matrix3::from_columns(&[x, y, z])
}

/// Quantifies how far the density is from axial symmetry about
/// `axis_candidate` as seen from `nucleus`: the tensor is expressed in a
/// frame with X along the candidate axis and the flip-driving Z-row
/// magnitude `√(T'_ZX² + T'_ZY²)` is returned relative to ‖T‖_F.
/// 0 means a perfectly non-flipping geometry; a zero tensor returns 0.
pub fn symmetry_residual(
    density: &SpinDensityModel,
    nucleus: &Vector3<f64>,
    axis_candidate: &Vector3<f64>,
) -> Result<f64, DipolarError> {
    let norm = axis_candidate.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
        return Err(DipolarError::InvalidAxis(norm));
    }
    let t = t_tensor(density, nucleus, &DipoleConstants::default())?;
    let frob = t.norm();
    if frob == 0.0 {
        return Ok(0.0);
    }
    let r = frame_with_x(axis_candidate);
    let tp = r.transpose() * t * r;
    Ok(tp[(2, 0)].hypot(tp[(2, 1)]) / frob)
}
