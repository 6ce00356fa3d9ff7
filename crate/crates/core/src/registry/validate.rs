//! Reconciliation of printed derived columns against recomputation, using
//! half-ulp interval arithmetic.

use super::{PrintedValue, SiteRecord};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

/// A closed interval; `hi` may be +infinity (e.g. the recomputed τ₀ range of
/// a row whose printed a_nd rounds to zero).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn from_printed(p: &PrintedValue) -> Self {
        Self { lo: p.value - p.half_ulp, hi: p.value + p.half_ulp }
    }

    /// Range of |x| over this interval.
    pub fn magnitude(&self) -> Self {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            Self { lo: 0.0, hi: self.lo.abs().max(self.hi.abs()) }
        } else {
            let (a, b) = (self.lo.abs(), self.hi.abs());
            Self { lo: a.min(b), hi: a.max(b) }
        }
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Distance between disjoint intervals (0 when they overlap).
    pub fn gap_to(&self, other: &Interval) -> f64 {
        (self.lo - other.hi).max(other.lo - self.hi).max(0.0)
    }
}

/// Per-record reconciliation verdicts. All checks are independent of other
/// records, so validation is order-independent by construction.
#[derive(Debug, Clone, Serialize)]
pub struct RecordVerdict {
    pub id: u32,
    /// Printed Δ₀ interval intersects the interval of sqrt(a_zz² + a_nd²)
    /// propagated from the printed-input intervals.
    pub delta0_ok: bool,
    /// Same for τ₀ = (a_zz² + a_nd²)/a_nd² (upper endpoint +∞ when the
    /// printed a_nd interval reaches 0, which also reconciles the `1e+10`
    /// sentinel).
    pub tau0_ok: bool,
    /// |sqrt(r_cz² + r_cxy²) − r_cn| ≤ 0.02 Å.
    pub geometry_ok: bool,
    /// a_nd ≥ 0.
    pub a_nd_nonnegative: bool,
    /// Distance between printed and recomputed Δ₀ intervals, kHz (0 = pass).
    pub delta0_gap_khz: f64,
    /// Distance between printed and recomputed τ₀ intervals (0 = pass).
    pub tau0_gap: f64,
    /// |hypot(r_cz, r_cxy) − r_cn|, Å.
    pub geometry_residual_ang: f64,
    pub delta0_recomputed: Interval,
    pub delta0_printed: Interval,
}

/// Aggregate validation result.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub total: usize,
    pub delta0_pass: usize,
    pub tau0_pass: usize,
    pub geometry_pass: usize,
    pub a_nd_pass: usize,
    /// Per-record verdicts, sorted by id.
    pub verdicts: Vec<RecordVerdict>,
}

/// Geometric-consistency tolerance: coordinates are printed to 0.01 Å.
pub const GEOMETRY_TOL_ANG: f64 = 0.02;

fn verdict_for(rec: &SiteRecord) -> RecordVerdict {
    let azz = Interval::from_printed(&rec.a_zz).magnitude();
    let and = Interval::from_printed(&rec.a_nd).magnitude();

    // Δ₀ = hypot(a_zz, a_nd) is monotone in both magnitudes.
    let delta0_recomputed = Interval { lo: azz.lo.hypot(and.lo), hi: azz.hi.hypot(and.hi) };
    let delta0_printed = Interval::from_printed(&rec.delta0);
    let delta0_ok = delta0_recomputed.overlaps(&delta0_printed);

    // τ₀ = 1 + a_zz²/a_nd²: decreasing in a_nd, increasing in |a_zz|. The
    // printed-a_nd interval always has hi > 0 (a half-ulp is never zero).
    let tau_lo = 1.0 + (azz.lo / and.hi).powi(2);
    let tau_hi = if and.lo > 0.0 { 1.0 + (azz.hi / and.lo).powi(2) } else { f64::INFINITY };
    let tau_recomputed = Interval { lo: tau_lo, hi: tau_hi };
    let tau_printed = Interval::from_printed(&rec.tau0);
    let tau0_ok = tau_recomputed.overlaps(&tau_printed);

    let geometry_residual_ang =
        (rec.r_cz.value.hypot(rec.r_cxy.value) - rec.r_cn.value).abs();

    RecordVerdict {
        id: rec.id,
        delta0_ok,
        tau0_ok,
        geometry_ok: geometry_residual_ang <= GEOMETRY_TOL_ANG,
        a_nd_nonnegative: rec.a_nd.value >= 0.0,
        delta0_gap_khz: delta0_recomputed.gap_to(&delta0_printed),
        tau0_gap: tau_recomputed.gap_to(&tau_printed),
        geometry_residual_ang,
        delta0_recomputed,
        delta0_printed,
    }
}

/// Validates every record independently (data-parallel) and reports counts
/// and per-record verdicts sorted by id. Failures are reported, never
/// thrown: inconsistent data is a finding, not a tool error.
pub fn validate(records: &[SiteRecord]) -> ValidationReport {
    let mut verdicts: Vec<RecordVerdict> = records.par_iter().map(verdict_for).collect();
    verdicts.sort_by_key(|v| v.id);
    ValidationReport {
        total: verdicts.len(),
        delta0_pass: verdicts.iter().filter(|v| v.delta0_ok).count(),
        tau0_pass: verdicts.iter().filter(|v| v.tau0_ok).count(),
        geometry_pass: verdicts.iter().filter(|v| v.geometry_ok).count(),
        a_nd_pass: verdicts.iter().filter(|v| v.a_nd_nonnegative).count(),
        verdicts,
    }
}

impl ValidationReport {
    /// True when every record passes every check.
    pub fn all_pass(&self) -> bool {
        self.delta0_pass == self.total
            && self.tau0_pass == self.total
            && self.geometry_pass == self.total
            && self.a_nd_pass == self.total
    }

    /// Failing Δ₀ verdicts, worst (largest interval gap) first.
    pub fn worst_delta0_offenders(&self, k: usize) -> Vec<&RecordVerdict> {
        let mut failing: Vec<&RecordVerdict> =
            self.verdicts.iter().filter(|v| !v.delta0_ok).collect();
        failing.sort_by(|a, b| {
            b.delta0_gap_khz
                .partial_cmp(&a.delta0_gap_khz)
                .unwrap()
                .then(a.id.cmp(&b.id))
        });
        failing.truncate(k);
        failing
    }

    /// Human-readable summary (the `validation.txt` format).
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rows: {}", self.total);
        let _ = writeln!(
            s,
            "delta0 within half-ulp interval of recomputation: {}/{}",
            self.delta0_pass, self.total
        );
        let _ = writeln!(
            s,
            "tau0 within half-ulp interval of recomputation: {}/{}",
            self.tau0_pass, self.total
        );
        let _ = writeln!(
            s,
            "geometry |hypot(r_cz, r_cxy) - r_cn| <= {GEOMETRY_TOL_ANG} A: {}/{}",
            self.geometry_pass, self.total
        );
        let _ = writeln!(s, "a_nd non-negative: {}/{}", self.a_nd_pass, self.total);
        if self.all_pass() {
            let _ = writeln!(s, "all checks passed");
        } else {
            let offenders = self.worst_delta0_offenders(10);
            if !offenders.is_empty() {
                let _ = writeln!(s, "worst delta0 offenders:");
                for v in offenders {
                    let _ = writeln!(
                        s,
                        "  id {}: printed [{}, {}] kHz, recomputed [{}, {}] kHz, gap {} kHz",
                        v.id,
                        v.delta0_printed.lo,
                        v.delta0_printed.hi,
                        v.delta0_recomputed.lo,
                        v.delta0_recomputed.hi,
                        v.delta0_gap_khz
                    );
                }
            }
            for v in &self.verdicts {
                if !v.tau0_ok {
                    let _ = writeln!(s, "  id {}: tau0 interval gap {}", v.id, v.tau0_gap);
                }
                if !v.geometry_ok {
                    let _ = writeln!(
                        s,
                        "  id {}: geometry residual {} A",
                        v.id, v.geometry_residual_ang
                    );
                }
                if !v.a_nd_nonnegative {
                    let _ = writeln!(s, "  id {}: a_nd is negative", v.id);
                }
            }
        }
        s
    }
}
