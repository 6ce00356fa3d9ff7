//! Table and geometry file parsing.

use super::{PrintedValue, RegistryError, SiteRecord};
use nalgebra::Vector3;
use std::collections::{BTreeMap, HashSet};

/// Parses a 10-column site table.
///
/// Format: tab- or comma-separated; `#` comment lines and blank lines are
/// skipped; one optional header row (detected by a non-numeric first field)
/// is skipped. Columns, in order:
/// `id, a_zz, a_nd, a_iso, delta0, tau0, cos_zz, r_cz, r_cxy, r_cn`.
/// Scientific notation (`1.369e+05`) and the `1e+10` τ₀ sentinel are
/// accepted. Rows need not be contiguous or sorted, but ids must be unique.
pub fn parse_table(input: &str) -> Result<Vec<SiteRecord>, RegistryError> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut header_allowed = true;
    for (i, raw) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split(',').map(str::trim).collect()
        };
        let first_numeric = fields[0].parse::<f64>().is_ok();
        if header_allowed && !first_numeric {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        if fields.len() != 10 {
            return Err(RegistryError::Parse {
                line: lineno,
                msg: format!("expected 10 columns, found {}", fields.len()),
            });
        }
        let id: u32 = fields[0].parse().map_err(|_| RegistryError::Parse {
            line: lineno,
            msg: format!("id must be a positive integer, got {:?}", fields[0]),
        })?;
        if id == 0 {
            return Err(RegistryError::Parse { line: lineno, msg: "id must be >= 1".into() });
        }
        if !seen.insert(id) {
            return Err(RegistryError::Parse { line: lineno, msg: format!("duplicate id {id}") });
        }
        let mut cells = [PrintedValue { value: 0.0, half_ulp: 0.0 }; 9];
        for (k, field) in fields[1..].iter().enumerate() {
            cells[k] = PrintedValue::parse(field)
                .map_err(|msg| RegistryError::Parse { line: lineno, msg })?;
        }
        records.push(SiteRecord {
            id,
            a_zz: cells[0],
            a_nd: cells[1],
            a_iso: cells[2],
            delta0: cells[3],
            tau0: cells[4],
            cos_zz: cells[5],
            r_cz: cells[6],
            r_cxy: cells[7],
            r_cn: cells[8],
        });
    }
    Ok(records)
}

/// Verifies id uniqueness on records obtained from somewhere other than
/// [`parse_table`] (e.g. a deserialized JSON store).
pub fn check_unique_ids(records: &[SiteRecord]) -> Result<(), RegistryError> {
    let mut seen = HashSet::new();
    for (i, r) in records.iter().enumerate() {
        if !seen.insert(r.id) {
            return Err(RegistryError::Parse {
                line: i + 1,
                msg: format!("duplicate id {}", r.id),
            });
        }
    }
    Ok(())
}

/// Site coordinates in the NV frame, keyed by site id.
///
/// Built from a standard XYZ file: carbon atoms are numbered 1..n in file
/// order (matching the site-table convention); other elements are ignored
/// for numbering purposes.
#[derive(Debug, Clone, Default)]
pub struct SiteGeometry {
    positions: BTreeMap<u32, Vector3<f64>>,
}

impl SiteGeometry {
    pub fn from_positions(positions: BTreeMap<u32, Vector3<f64>>) -> Self {
        Self { positions }
    }

    pub fn position(&self, id: u32) -> Option<&Vector3<f64>> {
        self.positions.get(&id)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Parses a standard XYZ file (`count`, `comment`, then `ELEM x y z` per
/// line, Å, NV frame with the N atom at the origin).
pub fn parse_xyz(input: &str) -> Result<SiteGeometry, RegistryError> {
    let mut lines = input.lines();
    let count: usize = lines
        .next()
        .ok_or_else(|| RegistryError::Xyz("empty file".into()))?
        .trim()
        .parse()
        .map_err(|_| RegistryError::Xyz("first line must be the atom count".into()))?;
    let _comment = lines
        .next()
        .ok_or_else(|| RegistryError::Xyz("missing comment line".into()))?;
    let mut positions = BTreeMap::new();
    let mut carbon_index = 0u32;
    let mut parsed = 0usize;
    for (i, raw) in lines.enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(RegistryError::Xyz(format!(
                "line {}: expected `ELEM x y z`, got {line:?}",
                i + 3
            )));
        }
        let mut xyz = [0.0f64; 3];
        for (k, f) in fields[1..].iter().enumerate() {
            xyz[k] = f.parse().map_err(|_| {
                RegistryError::Xyz(format!("line {}: non-numeric coordinate {f:?}", i + 3))
            })?;
        }
        parsed += 1;
        if fields[0].eq_ignore_ascii_case("c") {
            carbon_index += 1;
            positions.insert(carbon_index, Vector3::new(xyz[0], xyz[1], xyz[2]));
        }
    }
    if parsed != count {
        return Err(RegistryError::Xyz(format!(
            "header declares {count} atoms but {parsed} were found"
        )));
    }
    Ok(SiteGeometry { positions })
}
