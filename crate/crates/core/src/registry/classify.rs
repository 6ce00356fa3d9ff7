//! Stability ranking, axial-site identification, and family classification.

use super::{RegistryError, SiteGeometry, SiteRecord};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Default tolerance for calling a site axial: printed r_cxy resolution.
pub const DEFAULT_AXIAL_TOL_ANG: f64 = 0.01;

/// Recomputed τ₀ at or above this value marks a site as belonging to the
/// stability set (the "quite stable" lifetimes band is 10³–10⁴).
pub const STABILITY_TAU0_MIN: f64 = 1e3;

/// One entry of the lifetime ranking.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RankedSite {
    /// 1-based rank.
    pub rank: usize,
    pub id: u32,
    /// Recomputed τ₀ (f64::INFINITY for a_nd = 0).
    pub tau0: f64,
    /// Recomputed Γ₀.
    pub gamma0: f64,
}

/// Ranks all records by recomputed τ₀ (from the printed a_zz, a_nd — never
/// the printed τ₀ column), descending; ties broken by ascending id. Returns
/// at most `top_k` entries.
pub fn rank_by_lifetime(records: &[SiteRecord], top_k: usize) -> Vec<RankedSite> {
    let mut order: Vec<(u32, f64, f64)> = records
        .iter()
        .map(|r| (r.id, r.recomputed_tau0(), r.recomputed_gamma0()))
        .collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    order
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(i, (id, tau0, gamma0))| RankedSite { rank: i + 1, id, tau0, gamma0 })
        .collect()
}

/// Sites with r_cxy ≤ `xy_tol_ang`, sorted by id.
pub fn classify_axial(records: &[SiteRecord], xy_tol_ang: f64) -> Vec<u32> {
    let mut ids: Vec<u32> = records
        .iter()
        .filter(|r| r.r_cxy.value <= xy_tol_ang)
        .map(|r| r.id)
        .collect();
    ids.sort_unstable();
    ids
}

/// Per-feature clustering tolerances on (a_zz, a_nd, r_cz, r_cxy).
///
/// Defaults are wide enough to absorb cluster-edge asymmetry (~2 kHz a_zz
/// spread within one family) and narrow enough to separate families whose
/// a_zz values differ by only ~1 kHz through the geometric features.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClusterTolerances {
    pub a_zz_khz: f64,
    pub a_nd_khz: f64,
    pub r_cz_ang: f64,
    pub r_cxy_ang: f64,
}

impl Default for ClusterTolerances {
    fn default() -> Self {
        Self { a_zz_khz: 5.0, a_nd_khz: 1.0, r_cz_ang: 0.1, r_cxy_ang: 0.15 }
    }
}

/// Family labels: the four stability families, axial sites, and an indexed
/// bucket for everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyLabel {
    St1,
    St2,
    St3,
    St4,
    Axial,
    Other(u32),
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyLabel::St1 => write!(f, "St1"),
            FamilyLabel::St2 => write!(f, "St2"),
            FamilyLabel::St3 => write!(f, "St3"),
            FamilyLabel::St4 => write!(f, "St4"),
            FamilyLabel::Axial => write!(f, "Axial"),
            FamilyLabel::Other(tag) => write!(f, "Other-{tag:03}"),
        }
    }
}

impl Serialize for FamilyLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Arithmetic means of the printed columns; Γ₀ is the mean of per-member
/// *recomputed* Γ₀ values (never Γ of the means).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FamilyAverages {
    pub a_zz_khz: f64,
    pub a_nd_khz: f64,
    pub gamma0: f64,
    pub delta0_khz: f64,
    pub cos_zz: f64,
    pub r_cn_ang: f64,
    pub r_cz_ang: f64,
    pub r_cxy_ang: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Family {
    pub label: FamilyLabel,
    /// Member site ids, ascending.
    pub member_ids: Vec<u32>,
    pub averaged: FamilyAverages,
    /// Some(result) when 3D geometry was supplied and the family was
    /// checked for closure under ±120° rotation about the NV axis; None
    /// when no geometry was available for the check.
    pub geometry_consistent: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyClassification {
    pub families: Vec<Family>,
    pub warnings: Vec<String>,
}

/// Mean of the printed columns over a non-empty member slice.
pub fn family_average(members: &[&SiteRecord]) -> Result<FamilyAverages, RegistryError> {
    if members.is_empty() {
        return Err(RegistryError::EmptyFamily);
    }
    let n = members.len() as f64;
    let mean = |f: fn(&SiteRecord) -> f64| members.iter().map(|r| f(r)).sum::<f64>() / n;
    Ok(FamilyAverages {
        a_zz_khz: mean(|r| r.a_zz.value),
        a_nd_khz: mean(|r| r.a_nd.value),
        gamma0: mean(|r| r.recomputed_gamma0()),
        delta0_khz: mean(|r| r.delta0.value),
        cos_zz: mean(|r| r.cos_zz.value),
        r_cn_ang: mean(|r| r.r_cn.value),
        r_cz_ang: mean(|r| r.r_cz.value),
        r_cxy_ang: mean(|r| r.r_cxy.value),
    })
}

struct Cluster {
    member_idx: Vec<usize>,
    sums: [f64; 4],
}

impl Cluster {
    fn mean(&self) -> [f64; 4] {
        let n = self.member_idx.len() as f64;
        [self.sums[0] / n, self.sums[1] / n, self.sums[2] / n, self.sums[3] / n]
    }
}

fn features(r: &SiteRecord) -> [f64; 4] {
    [r.a_zz.value, r.a_nd.value, r.r_cz.value, r.r_cxy.value]
}

/// Greedy clustering on (a_zz, a_nd, r_cz, r_cxy) followed by labeling.
///
/// Records are visited in ascending id order. A record joins the cluster
/// whose running mean lies within the per-feature tolerance on *every*
/// feature, choosing the candidate with the smallest tolerance-normalized
/// distance (first-come on exact ties); otherwise it seeds a new cluster.
///
/// Labels: clusters whose members all sit on the NV axis are `Axial`;
/// clusters intersecting the stability set (recomputed τ₀ ≥ 10³) and not
/// axial are `St1..St4` in descending |mean a_zz| with ties broken by
/// ascending mean r_cxy; everything else is `Other(tag)`. A stability
/// cluster of size ∉ {3, 6} triggers an `AmbiguousFamily` warning, and when
/// geometry is supplied every St family is cross-checked for closure under
/// ±120° rotation about the NV axis to 0.1 Å.
pub fn classify_families(
    records: &[SiteRecord],
    tol: &ClusterTolerances,
    geometry: Option<&SiteGeometry>,
) -> FamilyClassification {
    let tolv = [tol.a_zz_khz, tol.a_nd_khz, tol.r_cz_ang, tol.r_cxy_ang];
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| records[i].id);

    let mut clusters: Vec<Cluster> = Vec::new();
    for &ri in &order {
        let feat = features(&records[ri]);
        let mut best: Option<(usize, f64)> = None;
        for (ci, c) in clusters.iter().enumerate() {
            let mean = c.mean();
            let fits = (0..4).all(|k| (feat[k] - mean[k]).abs() <= tolv[k]);
            if !fits {
                continue;
            }
            let d: f64 = (0..4).map(|k| ((feat[k] - mean[k]) / tolv[k]).powi(2)).sum();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((ci, d));
            }
        }
        match best {
            Some((ci, _)) => {
                let c = &mut clusters[ci];
                c.member_idx.push(ri);
                for k in 0..4 {
                    c.sums[k] += feat[k];
                }
            }
            None => clusters.push(Cluster { member_idx: vec![ri], sums: feat }),
        }
    }

    let mut warnings = Vec::new();

    let is_axial = |c: &Cluster| {
        c.member_idx
            .iter()
            .all(|&i| records[i].r_cxy.value <= DEFAULT_AXIAL_TOL_ANG)
    };
    let is_stability = |c: &Cluster| {
        c.member_idx
            .iter()
            .any(|&i| records[i].recomputed_tau0() >= STABILITY_TAU0_MIN)
    };

    // Order St candidates by descending |mean a_zz|, ties by ascending mean
    // r_cxy, then by first member id for full determinism.
    let mut st_candidates: Vec<usize> = (0..clusters.len())
        .filter(|&ci| is_stability(&clusters[ci]) && !is_axial(&clusters[ci]))
        .collect();
    st_candidates.sort_by(|&a, &b| {
        let ma = clusters[a].mean();
        let mb = clusters[b].mean();
        mb[0].abs()
            .partial_cmp(&ma[0].abs())
            .unwrap()
            .then(ma[3].partial_cmp(&mb[3]).unwrap())
            .then(records[clusters[a].member_idx[0]].id.cmp(&records[clusters[b].member_idx[0]].id))
    });
    if st_candidates.len() > 4 {
        warnings.push(format!(
            "more than four stability clusters found ({}); only the four with \
             largest |mean a_zz| receive St labels",
            st_candidates.len()
        ));
    }

    let mut labels: BTreeMap<usize, FamilyLabel> = BTreeMap::new();
    const ST_LABELS: [FamilyLabel; 4] =
        [FamilyLabel::St1, FamilyLabel::St2, FamilyLabel::St3, FamilyLabel::St4];
    for (slot, &ci) in st_candidates.iter().enumerate() {
        let size = clusters[ci].member_idx.len();
        if size != 3 && size != 6 {
            let ids: Vec<u32> = clusters[ci].member_idx.iter().map(|&i| records[i].id).collect();
            warnings.push(format!(
                "AmbiguousFamily: stability cluster {ids:?} has size {size}, expected 3 or 6"
            ));
        }
        if slot < 4 {
            labels.insert(ci, ST_LABELS[slot]);
        }
    }
    for ci in 0..clusters.len() {
        if labels.contains_key(&ci) {
            continue;
        }
        if is_axial(&clusters[ci]) {
            labels.insert(ci, FamilyLabel::Axial);
        }
    }

    // Output order: St1..St4, then Axial by first member id, then Other by
    // first member id (tag assigned in that order).
    let first_id = |ci: usize| records[clusters[ci].member_idx[0]].id;
    let mut st_out: Vec<usize> = Vec::new();
    for lbl in ST_LABELS {
        if let Some((&ci, _)) = labels.iter().find(|(_, &l)| l == lbl) {
            st_out.push(ci);
        }
    }
    let mut axial_out: Vec<usize> = labels
        .iter()
        .filter(|(_, &l)| l == FamilyLabel::Axial)
        .map(|(&ci, _)| ci)
        .collect();
    axial_out.sort_by_key(|&ci| first_id(ci));
    let mut other_out: Vec<usize> =
        (0..clusters.len()).filter(|ci| !labels.contains_key(ci)).collect();
    other_out.sort_by_key(|&ci| first_id(ci));
    for (tag, &ci) in other_out.iter().enumerate() {
        labels.insert(ci, FamilyLabel::Other(tag as u32 + 1));
    }

    let mut families = Vec::new();
    for ci in st_out.into_iter().chain(axial_out).chain(other_out) {
        let label = labels[&ci];
        let mut member_ids: Vec<u32> =
            clusters[ci].member_idx.iter().map(|&i| records[i].id).collect();
        member_ids.sort_unstable();
        let members: Vec<&SiteRecord> =
            clusters[ci].member_idx.iter().map(|&i| &records[i]).collect();
        let averaged = family_average(&members).expect("clusters are never empty");
        let geometry_consistent = match (geometry, label) {
            (Some(geom), FamilyLabel::St1 | FamilyLabel::St2 | FamilyLabel::St3 | FamilyLabel::St4) => {
                match rotation_closure(geom, &member_ids) {
                    Some(ok) => {
                        if !ok {
                            warnings.push(format!(
                                "family {label}: members are not closed under ±120° rotation \
                                 about the NV axis to 0.1 A"
                            ));
                        }
                        Some(ok)
                    }
                    None => {
                        warnings.push(format!(
                            "family {label}: geometry file lacks coordinates for some members"
                        ));
                        None
                    }
                }
            }
            _ => None,
        };
        families.push(Family { label, member_ids, averaged, geometry_consistent });
    }

    FamilyClassification { families, warnings }
}

/// Checks that rotating every member by +120° about Z lands on some member
/// within 0.1 Å. Returns None when a member has no coordinates.
fn rotation_closure(geom: &SiteGeometry, member_ids: &[u32]) -> Option<bool> {
    const TOL: f64 = 0.1;
    let (s, c) = (120.0_f64.to_radians().sin(), 120.0_f64.to_radians().cos());
    let mut pts = Vec::with_capacity(member_ids.len());
    for &id in member_ids {
        pts.push(*geom.position(id)?);
    }
    let closed = pts.iter().all(|p| {
        let rotated = nalgebra::Vector3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z);
        pts.iter().any(|q| (rotated - q).norm() <= TOL)
    });
    Some(closed)
}
