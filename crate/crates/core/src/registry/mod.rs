//! Ingestion, validation, ranking, and classification of per-site hyperfine
//! tables (one row per ¹³C lattice position near the NV center).
//!
//! The printed table is treated as a measurement of its own inputs: every
//! numeric cell retains the precision it was printed with, and derived
//! columns (Δ₀, τ₀) are reconciled against recomputation using half-ulp
//! interval arithmetic rather than a fixed epsilon — a value printed as
//! `3182.2` is the interval [3182.15, 3182.25], and the recomputed quantity
//! is itself an interval because its inputs were rounded too.

mod classify;
mod parse;
mod validate;

pub use classify::{
    classify_axial, classify_families, family_average, rank_by_lifetime, ClusterTolerances,
    Family, FamilyAverages, FamilyClassification, FamilyLabel, RankedSite, DEFAULT_AXIAL_TOL_ANG,
    STABILITY_TAU0_MIN,
};
pub use parse::{check_unique_ids, parse_table, parse_xyz, SiteGeometry};
pub use validate::{validate, Interval, RecordVerdict, ValidationReport};

use crate::hfi::SecularParams;
use crate::observables::TAU0_SENTINEL;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty family")]
    EmptyFamily,
    #[error("xyz geometry: {0}")]
    Xyz(String),
}

/// A numeric value as printed: the parsed number plus half the unit in the
/// last printed digit. `792` carries half_ulp 0.5, `194.0` carries 0.05,
/// `3.76e+06` carries 5000.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintedValue {
    pub value: f64,
    pub half_ulp: f64,
}

impl PrintedValue {
    /// Parses a printed token, retaining its precision. Accepts plain and
    /// scientific notation; rejects non-finite values.
    pub fn parse(token: &str) -> Result<Self, String> {
        let t = token.trim();
        let value: f64 = t.parse().map_err(|_| format!("non-numeric cell {t:?}"))?;
        if !value.is_finite() {
            return Err(format!("non-finite cell {t:?}"));
        }
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => {
                let exp: i32 = t[i + 1..]
                    .parse()
                    .map_err(|_| format!("malformed exponent in {t:?}"))?;
                (&t[..i], exp)
            }
            None => (t, 0),
        };
        let digits = mantissa.trim_start_matches(['+', '-']);
        let decimals = match digits.find('.') {
            Some(i) => (digits.len() - i - 1) as i32,
            None => 0,
        };
        Ok(Self { value, half_ulp: 0.5 * 10f64.powi(exp - decimals) })
    }
}

/// One row of the site table: printed hyperfine invariants plus spatial
/// coordinates in the NV frame (Z along the NV axis, N at the origin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    /// Site index (unique, ≥ 1).
    pub id: u32,
    /// Secular diagonal component A_ZZ, kHz.
    pub a_zz: PrintedValue,
    /// Secular non-diagonal magnitude T_nd, kHz (≥ 0 for valid data).
    pub a_nd: PrintedValue,
    /// Isotropic (Fermi contact) part, kHz.
    pub a_iso: PrintedValue,
    /// Printed zero-field splitting Δ₀, kHz.
    pub delta0: PrintedValue,
    /// Printed τ₀ = 1/Γ₀ (dimensionless; `1e+10` is the "never flips"
    /// sentinel).
    pub tau0: PrintedValue,
    /// Direction cosine between the site principal z axis and the NV axis.
    pub cos_zz: PrintedValue,
    /// Signed displacement along the NV axis, Å.
    pub r_cz: PrintedValue,
    /// Distance from the NV axis, Å.
    pub r_cxy: PrintedValue,
    /// Distance from the vacancy, Å.
    pub r_cn: PrintedValue,
}

impl SiteRecord {
    /// Secular parameters from the printed invariants (phase unknown from
    /// scalars alone, so φ = 0; a corrupted negative a_nd is folded by
    /// magnitude).
    pub fn secular(&self) -> SecularParams {
        SecularParams::new(self.a_zz.value, self.a_nd.value.abs())
    }

    /// Δ₀ recomputed from the printed (a_zz, a_nd).
    pub fn recomputed_delta0(&self) -> f64 {
        self.a_zz.value.hypot(self.a_nd.value)
    }

    /// Γ₀ recomputed from the printed (a_zz, a_nd); 0 when a_nd = 0.
    pub fn recomputed_gamma0(&self) -> f64 {
        let t2 = self.a_nd.value * self.a_nd.value;
        if t2 == 0.0 {
            return 0.0;
        }
        t2 / (t2 + self.a_zz.value * self.a_zz.value)
    }

    /// τ₀ recomputed from the printed (a_zz, a_nd); +infinity when a_nd = 0.
    pub fn recomputed_tau0(&self) -> f64 {
        let t2 = self.a_nd.value * self.a_nd.value;
        if t2 == 0.0 {
            return f64::INFINITY;
        }
        (t2 + self.a_zz.value * self.a_zz.value) / t2
    }

    /// Whether the printed τ₀ is the "never flips" sentinel.
    pub fn tau0_is_sentinel(&self) -> bool {
        self.tau0.value >= TAU0_SENTINEL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_value_precision() {
        assert_eq!(PrintedValue::parse("194.0").unwrap(), PrintedValue { value: 194.0, half_ulp: 0.05 });
        assert_eq!(PrintedValue::parse("792").unwrap(), PrintedValue { value: 792.0, half_ulp: 0.5 });
        assert_eq!(PrintedValue::parse("-1").unwrap(), PrintedValue { value: -1.0, half_ulp: 0.5 });
        let sci = PrintedValue::parse("3.76e+06").unwrap();
        assert_eq!(sci.value, 3.76e6);
        assert_eq!(sci.half_ulp, 5000.0);
        let sentinel = PrintedValue::parse("1e+10").unwrap();
        assert_eq!(sentinel.value, 1e10);
        assert_eq!(sentinel.half_ulp, 0.5e10);
    }

    #[test]
    fn printed_value_rejects_junk() {
        assert!(PrintedValue::parse("abc").is_err());
        assert!(PrintedValue::parse("inf").is_err());
        assert!(PrintedValue::parse("NaN").is_err());
        assert!(PrintedValue::parse("1e+").is_err());
    }

    #[test]
    fn recomputed_quantities() {
        let rec = SiteRecord {
            id: 1,
            a_zz: PrintedValue::parse("559.9").unwrap(),
            a_nd: PrintedValue::parse("560.3").unwrap(),
            a_iso: PrintedValue::parse("-5").unwrap(),
            delta0: PrintedValue::parse("792").unwrap(),
            tau0: PrintedValue::parse("2").unwrap(),
            cos_zz: PrintedValue::parse("0.86").unwrap(),
            r_cz: PrintedValue::parse("-0.4").unwrap(),
            r_cxy: PrintedValue::parse("1.46").unwrap(),
            r_cn: PrintedValue::parse("1.51").unwrap(),
        };
        assert!((rec.recomputed_delta0() - 792.101).abs() < 1e-3);
        assert!((rec.recomputed_tau0() - 1.99857).abs() < 1e-4);
        assert!(!rec.tau0_is_sentinel());
    }
}
