//! Subcommand implementations. Each returns the number of domain warnings
//! it produced; `--strict` escalates a nonzero count to exit code 1.
//! Usage, parse, and I/O problems surface as errors (exit code 2).

use crate::output::{self, Emitter};
use crate::{
    Cli, Command, EndorArgs, FamiliesArgs, Format, IngestArgs, ObservablesArgs, RankArgs,
    SsrArgs, TensorArgs, Xy8Args,
};
use anyhow::{bail, ensure, Context};
use nvspin_core::dynamics::{
    endor_sweep, ssr_trace, xy8_resonance_tau_us, xy8_trace, Manifold, NuclearSpin,
    ReadoutModel, RfRange, SpinHamiltonianParams, SsrParams, Xy8Settings,
};
use nvspin_core::hfi::{Frame, HfiMatrix, SecularParams};
use nvspin_core::observables::{
    at_field, field_sweep, FieldPoint, AVOIDED_CROSSING_B_GAUSS, AVOIDED_CROSSING_WINDOW_GAUSS,
};
use nvspin_core::registry::{
    self, classify_axial, classify_families, rank_by_lifetime, ClusterTolerances, SiteGeometry,
    SiteRecord,
};
use serde_json::json;
use std::fs;
use std::path::Path;

pub fn run(cli: &Cli) -> anyhow::Result<u32> {
    match &cli.command {
        Command::Ingest(a) => ingest(cli, a),
        Command::Rank(a) => rank(cli, a),
        Command::Families(a) => families(cli, a),
        Command::Observables(a) => observables(cli, a),
        Command::Tensor(a) => tensor(cli, a),
        Command::Endor(a) => endor(cli, a),
        Command::Xy8(a) => xy8(cli, a),
        Command::Ssr(a) => ssr(cli, a),
    }
}

// ---------------------------------------------------------------- loading

/// Reads a site table from TSV columns or, when the file starts with a
/// JSON bracket, from a normalized JSON site store.
fn load_records(path: &Path) -> anyhow::Result<Vec<SiteRecord>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let records: Vec<SiteRecord> = if text.trim_start().starts_with(['{', '[']) {
        serde_json::from_str(&text)
            .with_context(|| format!("parsing JSON site store {}", path.display()))?
    } else {
        registry::parse_table(&text)
            .with_context(|| format!("parsing site table {}", path.display()))?
    };
    registry::check_unique_ids(&records)?;
    Ok(records)
}

fn load_geometry(path: &Path) -> anyhow::Result<SiteGeometry> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    registry::parse_xyz(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_colon_floats<const N: usize>(s: &str, what: &str) -> anyhow::Result<[f64; N]> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != N {
        bail!("{what} must be {N} colon-separated numbers, got {s:?}");
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part
            .trim()
            .parse()
            .with_context(|| format!("{what}: {part:?} is not a number"))?;
    }
    Ok(out)
}

/// Builds secular parameters from user numbers without tripping the
/// library's programmer-error panics.
fn secular_checked(a_zz: f64, t_nd: f64, phi_deg: f64) -> anyhow::Result<SecularParams> {
    ensure!(a_zz.is_finite(), "--azz must be finite, got {a_zz}");
    ensure!(
        t_nd.is_finite() && t_nd >= 0.0,
        "--tnd must be finite and >= 0, got {t_nd}"
    );
    ensure!(phi_deg.is_finite(), "--phi must be finite, got {phi_deg}");
    Ok(SecularParams::with_phase(a_zz, t_nd, phi_deg.to_radians()))
}

fn mat3_json(m: &nvspin_core::nalgebra::Matrix3<f64>) -> serde_json::Value {
    json!([
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    ])
}

// ----------------------------------------------------------------- ingest

fn ingest(cli: &Cli, a: &IngestArgs) -> anyhow::Result<u32> {
    let records = load_records(&a.table)?;
    let geometry = a.geometry.as_deref().map(load_geometry).transpose()?;
    let report = registry::validate(&records);

    let mut warnings: Vec<String> = Vec::new();
    for v in &report.verdicts {
        if !v.delta0_ok {
            warnings.push(format!(
                "site {}: printed delta0 inconsistent with (a_zz, a_nd), interval gap {} kHz",
                v.id,
                output::num(v.delta0_gap_khz)
            ));
        }
        if !v.tau0_ok {
            warnings.push(format!("site {}: printed tau0 inconsistent with (a_zz, a_nd)", v.id));
        }
        if !v.geometry_ok {
            warnings.push(format!(
                "site {}: |hypot(r_cz, r_cxy) - r_cn| = {} A exceeds tolerance",
                v.id,
                output::num(v.geometry_residual_ang)
            ));
        }
        if !v.a_nd_nonnegative {
            warnings.push(format!("site {}: a_nd is negative", v.id));
        }
    }
    let mut missing_coords = 0usize;
    if let Some(g) = &geometry {
        for r in &records {
            if g.position(r.id).is_none() {
                missing_coords += 1;
                warnings.push(format!("site {}: no coordinates in geometry file", r.id));
            }
        }
    }

    if let Some(store) = &a.store {
        let body = serde_json::to_string_pretty(&records).context("serializing site store")?;
        fs::write(store, body + "\n")
            .with_context(|| format!("writing {}", store.display()))?;
    }

    let config = json!({
        "table": a.table.display().to_string(),
        "geometry": a.geometry.as_ref().map(|p| p.display().to_string()),
        "store": a.store.as_ref().map(|p| p.display().to_string()),
        "gamma_n_khz_per_g": cli.gamma_n,
    });
    let summary = format!(
        "{} rows, {} delta0-consistent, {} tau0-consistent, {} geometry-consistent, {} a_nd-nonnegative",
        report.total, report.delta0_pass, report.tau0_pass, report.geometry_pass,
        report.a_nd_pass
    );

    let mut em = Emitter::create(&cli.output)?;
    match cli.format {
        Format::Json => {
            em.json(&json!({
                "command": "ingest",
                "config": config,
                "summary": summary,
                "geometry_sites": geometry.as_ref().map(SiteGeometry::len),
                "missing_coordinates": missing_coords,
                "warnings": warnings,
                "report": report,
            }))?;
        }
        Format::Csv => {
            em.provenance("ingest", &config)?;
            for w in &warnings {
                em.comment(&format!("warning: {w}"))?;
            }
            em.line(&format!("summary\t{summary}"))?;
            em.line(&format!("rows\t{}", report.total))?;
            em.line(&format!("delta0_consistent\t{}", report.delta0_pass))?;
            em.line(&format!("tau0_consistent\t{}", report.tau0_pass))?;
            em.line(&format!("geometry_consistent\t{}", report.geometry_pass))?;
            em.line(&format!("a_nd_nonnegative\t{}", report.a_nd_pass))?;
            if let Some(g) = &geometry {
                em.line(&format!("geometry_sites\t{}", g.len()))?;
                em.line(&format!("missing_coordinates\t{missing_coords}"))?;
            }
        }
    }
    em.finish()?;
    Ok(warnings.len() as u32)
}

// ------------------------------------------------------------------- rank

fn rank(cli: &Cli, a: &RankArgs) -> anyhow::Result<u32> {
    let records = load_records(&a.table)?;
    let ranked = rank_by_lifetime(&records, a.top);
    let config = json!({
        "table": a.table.display().to_string(),
        "top": a.top,
    });

    let mut em = Emitter::create(&cli.output)?;
    match cli.format {
        Format::Json => {
            let rows: Vec<serde_json::Value> = ranked
                .iter()
                .map(|r| {
                    json!({
                        "rank": r.rank,
                        "id": r.id,
                        "tau0": nvspin_core::observables::tau0_serialized(r.tau0),
                        "gamma0": r.gamma0,
                    })
                })
                .collect();
            em.json(&json!({"command": "rank", "config": config, "rows": rows}))?;
        }
        Format::Csv => {
            em.provenance("rank", &config)?;
            em.line("rank,id,tau0,gamma0")?;
            for r in &ranked {
                em.line(&output::csv_row(&[
                    r.rank.to_string(),
                    r.id.to_string(),
                    output::tau0(r.tau0),
                    output::num(r.gamma0),
                ]))?;
            }
        }
    }
    em.finish()?;
    Ok(0)
}

// --------------------------------------------------------------- families

fn families(cli: &Cli, a: &FamiliesArgs) -> anyhow::Result<u32> {
    let records = load_records(&a.table)?;
    let geometry = a.geometry.as_deref().map(load_geometry).transpose()?;
    for (name, v) in [
        ("--tol-azz", a.tol_azz),
        ("--tol-and", a.tol_and),
        ("--tol-rcz", a.tol_rcz),
        ("--tol-rcxy", a.tol_rcxy),
        ("--axial-tol", a.axial_tol),
    ] {
        ensure!(v.is_finite() && v >= 0.0, "{name} must be finite and >= 0, got {v}");
    }
    let tol = ClusterTolerances {
        a_zz_khz: a.tol_azz,
        a_nd_khz: a.tol_and,
        r_cz_ang: a.tol_rcz,
        r_cxy_ang: a.tol_rcxy,
    };
    let classification = classify_families(&records, &tol, geometry.as_ref());
    let axial = classify_axial(&records, a.axial_tol);

    let config = json!({
        "table": a.table.display().to_string(),
        "geometry": a.geometry.as_ref().map(|p| p.display().to_string()),
        "tol_azz_khz": a.tol_azz,
        "tol_and_khz": a.tol_and,
        "tol_rcz_ang": a.tol_rcz,
        "tol_rcxy_ang": a.tol_rcxy,
        "axial_tol_ang": a.axial_tol,
    });

    let mut em = Emitter::create(&cli.output)?;
    match cli.format {
        Format::Json => {
            em.json(&json!({
                "command": "families",
                "config": config,
                "axial": axial,
                "families": classification.families,
                "warnings": classification.warnings,
            }))?;
        }
        Format::Csv => {
            em.provenance("families", &config)?;
            for w in &classification.warnings {
                em.comment(&format!("warning: {w}"))?;
            }
            let ids: Vec<String> = axial.iter().map(u32::to_string).collect();
            em.comment(&format!("axial_sites {}", ids.join(";")))?;
            em.line(
                "label,size,member_ids,a_zz_khz,a_nd_khz,gamma0,delta0_khz,cos_zz,\
                 r_cn_ang,r_cz_ang,r_cxy_ang,geometry_consistent",
            )?;
            for f in &classification.families {
                let members: Vec<String> = f.member_ids.iter().map(u32::to_string).collect();
                let geo = match f.geometry_consistent {
                    Some(true) => "true",
                    Some(false) => "false",
                    None => "",
                };
                em.line(&output::csv_row(&[
                    f.label.to_string(),
                    f.member_ids.len().to_string(),
                    members.join(";"),
                    output::num(f.averaged.a_zz_khz),
                    output::num(f.averaged.a_nd_khz),
                    output::num(f.averaged.gamma0),
                    output::num(f.averaged.delta0_khz),
                    output::num(f.averaged.cos_zz),
                    output::num(f.averaged.r_cn_ang),
                    output::num(f.averaged.r_cz_ang),
                    output::num(f.averaged.r_cxy_ang),
                    geo.to_string(),
                ]))?;
            }
        }
    }
    em.finish()?;
    Ok(classification.warnings.len() as u32)
}

// ------------------------------------------------------------ observables

const OBSERVABLES_HEADER: &str = "B_gauss,delta0_khz,delta_plus_khz,delta_minus_khz,\
                                  delta_n_khz,gamma0,gamma_plus,gamma_minus";

fn observables(cli: &Cli, a: &ObservablesArgs) -> anyhow::Result<u32> {
    let (sp, source) = observables_input(a)?;
    let mut rows: Vec<(f64, nvspin_core::ObservableSet, bool)> = Vec::new();
    if let Some(b) = a.field {
        ensure!(b.is_finite(), "--field must be finite, got {b}");
        let f = FieldPoint::with_gamma(b, cli.gamma_n)?;
        let near = (b - AVOIDED_CROSSING_B_GAUSS).abs() <= AVOIDED_CROSSING_WINDOW_GAUSS;
        rows.push((b, at_field(&sp, &f), near));
    } else {
        let sweep = a.field_sweep.as_ref().expect("clap guarantees a field selection");
        let [lo, hi] = parse_colon_floats::<2>(sweep, "--field-sweep")?;
        for row in field_sweep(&sp, cli.gamma_n, lo, hi, a.steps)? {
            rows.push((row.b_gauss, row.observables, row.near_crossing));
        }
    }
    let near_count = rows.iter().filter(|r| r.2).count();

    let config = json!({
        "source": source,
        "a_zz_khz": sp.a_zz_khz,
        "t_nd_khz": sp.t_nd_khz,
        "phi_rad": sp.phi_rad,
        "gamma_n_khz_per_g": cli.gamma_n,
        "field_gauss": a.field,
        "field_sweep": a.field_sweep,
        "steps": a.field_sweep.as_ref().map(|_| a.steps),
    });

    let mut em = Emitter::create(&cli.output)?;
    match cli.format {
        Format::Json => {
            let json_rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|(b, o, near)| {
                    json!({
                        "b_gauss": b,
                        "delta0_khz": o.delta0_khz,
                        "delta_plus_khz": o.delta_plus_khz,
                        "delta_minus_khz": o.delta_minus_khz,
                        "delta_n_khz": o.delta_n_khz,
                        "gamma0": o.gamma0,
                        "gamma_plus": o.gamma_plus,
                        "gamma_minus": o.gamma_minus,
                        "near_crossing": near,
                    })
                })
                .collect();
            em.json(&json!({
                "command": "observables",
                "config": config,
                "near_crossing_rows": near_count,
                "rows": json_rows,
            }))?;
        }
        Format::Csv => {
            em.provenance("observables", &config)?;
            if near_count > 0 {
                em.comment(&format!(
                    "warning: {near_count} row(s) within {AVOIDED_CROSSING_WINDOW_GAUSS} G \
                     of the {AVOIDED_CROSSING_B_GAUSS} G avoided crossing; secular formulas \
                     are unreliable there"
                ))?;
            }
            em.line(OBSERVABLES_HEADER)?;
            for (b, o, _) in &rows {
                em.line(&output::csv_row(&[
                    output::num(*b),
                    output::num(o.delta0_khz),
                    output::num(o.delta_plus_khz),
                    output::num(o.delta_minus_khz),
                    output::num(o.delta_n_khz),
                    output::num(o.gamma0),
                    output::num(o.gamma_plus),
                    output::num(o.gamma_minus),
                ]))?;
            }
        }
    }
    em.finish()?;
    Ok(near_count as u32)
}

fn observables_input(a: &ObservablesArgs) -> anyhow::Result<(SecularParams, String)> {
    if let Some(a_zz) = a.a_zz {
        let sp = secular_checked(a_zz, a.t_nd.unwrap_or(0.0), a.phi_deg.unwrap_or(0.0))?;
        Ok((sp, "flags".into()))
    } else if let Some(id) = a.site {
        let table = a.table.as_ref().expect("clap enforces --table with --site");
        let records = load_records(table)?;
        let rec = records
            .iter()
            .find(|r| r.id == id)
            .with_context(|| format!("site {id} not found in {}", table.display()))?;
        Ok((rec.secular(), format!("site {id}")))
    } else {
        let vals = a.matrix.as_ref().expect("clap guarantees one input mode");
        let ut: [f64; 6] =
            vals.as_slice().try_into().context("--matrix expects exactly 6 values")?;
        let m = HfiMatrix::from_upper_triangle(Frame::NvPacs, ut)?;
        Ok((m.secular_params()?, "matrix".into()))
    }
}

// ----------------------------------------------------------------- tensor

fn tensor(cli: &Cli, a: &TensorArgs) -> anyhow::Result<u32> {
    let mut em = Emitter::create(&cli.output)?;
    if let Some(values) = &a.matrix {
        let ut: [f64; 6] =
            values.as_slice().try_into().context("--matrix expects exactly 6 values")?;
        let config = json!({
            "matrix_upper_triangle_khz": ut.to_vec(),
            "azimuth_deg": a.azimuth,
        });
        let mut body = tensor_entry(ut, a.azimuth)?;
        let obj = body.as_object_mut().expect("tensor entries are objects");
        obj.insert("command".into(), json!("tensor"));
        obj.insert("config".into(), config);
        em.json(&body)?;
    } else {
        let path = a.matrix_file.as_ref().expect("clap guarantees a matrix source");
        let entries = load_upper_triangles(path)?;
        let config = json!({
            "matrix_file": path.display().to_string(),
            "rows": entries.len(),
            "azimuth_deg": a.azimuth,
        });
        let mut rows = Vec::with_capacity(entries.len());
        for (index, ut) in entries.iter().enumerate() {
            let entry = tensor_entry(*ut, a.azimuth)
                .with_context(|| format!("matrix row {}", index + 1))?;
            rows.push(entry);
        }
        em.json(&json!({
            "command": "tensor",
            "config": config,
            "matrices": rows,
        }))?;
    }
    em.finish()?;
    Ok(0)
}

/// Reads upper-triangle rows (AXX AXY AXZ AYY AYZ AZZ, kHz) from TSV/CSV
/// text or a JSON array of 6-element arrays.
fn load_upper_triangles(path: &Path) -> anyhow::Result<Vec<[f64; 6]>> {
    let body = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    if body.trim_start().starts_with('[') {
        let rows: Vec<[f64; 6]> = serde_json::from_str(&body)
            .with_context(|| format!("{}: JSON matrix rows", path.display()))?;
        Ok(rows)
    } else {
        let matrices = nvspin_core::hfi::parse_upper_triangle_rows(&body)
            .with_context(|| format!("{}", path.display()))?;
        Ok(matrices.iter().map(|m| m.upper_triangle()).collect())
    }
}

fn tensor_entry(ut: [f64; 6], azimuth: Option<f64>) -> anyhow::Result<serde_json::Value> {
    let m = HfiMatrix::from_upper_triangle(Frame::NvPacs, ut)?;
    let dec = m.decompose()?;
    let principal = m.diagonalize();
    let sec = m.secular_params()?;
    let azimuth_deg = azimuth.unwrap_or_else(|| sec.phi_rad.to_degrees());
    ensure!(azimuth_deg.is_finite(), "--azimuth must be finite, got {azimuth_deg}");
    let site = m.to_site_frame(azimuth_deg)?;

    Ok(json!({
        "matrix_upper_triangle_khz": ut.to_vec(),
        "a_iso_khz": dec.a_iso,
        "dipolar_khz": mat3_json(&dec.dipolar),
        "principal": {
            "a_xx_d_khz": principal.a_xx_d,
            "a_yy_d_khz": principal.a_yy_d,
            "a_zz_d_khz": principal.a_zz_d,
            "t_axial_khz": principal.t_axial,
            "rhombicity_khz": principal.rhombicity,
            "cos_zz": principal.cos_zz,
            "direction_cosines": mat3_json(&principal.direction_cosines),
        },
        "secular": {
            "a_zz_khz": sec.a_zz_khz,
            "t_nd_khz": sec.t_nd_khz,
            "phi_deg": sec.phi_rad.to_degrees(),
            "delta0_khz": sec.delta0_khz(),
        },
        "site_frame": {
            "azimuth_deg": azimuth_deg,
            "matrix_khz": mat3_json(site.matrix.matrix()),
            "a_zy_khz": site.a_zy_khz,
            "a_xy_khz": site.a_xy_khz,
            "symmetry_residual": site.symmetry_residual,
        },
    }))
}

// ------------------------------------------------------------------ endor

fn endor(cli: &Cli, a: &EndorArgs) -> anyhow::Result<u32> {
    let sp = secular_checked(a.a_zz, a.t_nd, a.phi_deg)?;
    let [lo, hi, step] = parse_colon_floats::<3>(&a.sweep, "--sweep")?;
    let range = RfRange::new(lo, hi, step)?;
    let manifold: Manifold =
        a.manifold.parse().map_err(|e| anyhow::anyhow!("--manifold: {e}"))?;
    let mut p = SpinHamiltonianParams::secular(sp, a.field);
    p.gamma_n_khz_per_g = cli.gamma_n;
    let points = endor_sweep(&p, &range, a.rf_duration, manifold, NuclearSpin::Up, a.rabi)?;

    let config = json!({
        "a_zz_khz": sp.a_zz_khz,
        "t_nd_khz": sp.t_nd_khz,
        "phi_rad": sp.phi_rad,
        "field_gauss": a.field,
        "gamma_n_khz_per_g": cli.gamma_n,
        "sweep_khz": [lo, hi, step],
        "rf_duration_ms": a.rf_duration,
        "rabi_khz": a.rabi,
        "manifold": manifold.to_string(),
    });
    let mut em = Emitter::create(&cli.output)?;
    match cli.format {
        Format::Json => {
            let rows: Vec<serde_json::Value> = points
                .iter()
                .map(|p| json!({"frequency_khz": p.frequency_khz, "flip_probability": p.flip_probability}))
                .collect();
            em.json(&json!({"command": "endor", "config": config, "rows": rows}))?;
        }
        Format::Csv => {
            em.provenance("endor", &config)?;
            em.line("frequency_khz,flip_probability")?;
            for p in &points {
                em.line(&output::csv_row(&[
                    output::num(p.frequency_khz),
                    output::num(p.flip_probability),
                ]))?;
            }
        }
    }
    em.finish()?;
    Ok(0)
}

// -------------------------------------------------------------------- xy8

fn xy8(cli: &Cli, a: &Xy8Args) -> anyhow::Result<u32> {
    let sp = secular_checked(a.a_zz, a.t_nd, a.phi_deg)?;
    ensure!(a.n_max >= 1, "--n-max must be at least 1");
    let mut p = SpinHamiltonianParams::secular(sp, a.field);
    p.gamma_n_khz_per_g = cli.gamma_n;
    let blocks: Vec<u32> = (1..=a.n_max).collect();
    let settings = Xy8Settings {
        contrast: a.contrast,
        pulse_duration_us: a.pulse_duration,
        init_nuclear: NuclearSpin::Up,
    };
    let points = xy8_trace(&p, a.tau, &blocks, &settings)?;
    let resonance = xy8_resonance_tau_us(&p)?;

    let config = json!({
        "a_zz_khz": sp.a_zz_khz,
        "t_nd_khz": sp.t_nd_khz,
        "phi_rad": sp.phi_rad,
        "field_gauss": a.field,
        "gamma_n_khz_per_g": cli.gamma_n,
        "tau_us": a.tau,
        "n_max": a.n_max,
        "contrast": a.contrast,
        "pulse_duration_us": a.pulse_duration,
    });
    let mut em = Emitter::create(&cli.output)?;
    match cli.format {
        Format::Json => {
            em.json(&json!({
                "command": "xy8",
                "config": config,
                "first_resonance_tau_us": resonance,
                "rows": points,
            }))?;
        }
        Format::Csv => {
            em.provenance("xy8", &config)?;
            em.comment(&format!("first_resonance_tau_us {}", output::num(resonance)))?;
            em.line("n_blocks,pulse_count,total_time_us,coherence,fluorescence")?;
            for pt in &points {
                em.line(&output::csv_row(&[
                    pt.n_blocks.to_string(),
                    pt.pulse_count.to_string(),
                    output::num(pt.total_time_us),
                    output::num(pt.coherence),
                    output::num(pt.fluorescence),
                ]))?;
            }
        }
    }
    em.finish()?;
    Ok(0)
}

// -------------------------------------------------------------------- ssr

fn ssr(cli: &Cli, a: &SsrArgs) -> anyhow::Result<u32> {
    let params = SsrParams {
        flip_prob_per_cycle: a.flip_prob,
        n_cycles: a.cycles,
        cycle_time_s: a.cycle_time,
        readout: ReadoutModel {
            bright_rate: a.bright,
            dark_rate: a.dark,
            fidelity: a.fidelity,
        },
        seed: cli.seed,
    };
    let trace = ssr_trace(&params)?;

    let config = json!({
        "flip_prob_per_cycle": a.flip_prob,
        "n_cycles": a.cycles,
        "cycle_time_s": a.cycle_time,
        "bright_rate": a.bright,
        "dark_rate": a.dark,
        "fidelity": a.fidelity,
        "seed": cli.seed,
    });
    let dwell_json = if trace.estimated_dwell_s.is_finite() {
        json!(trace.estimated_dwell_s)
    } else {
        json!("inf")
    };
    let mut em = Emitter::create(&cli.output)?;
    match cli.format {
        Format::Json => {
            let samples: Vec<serde_json::Value> = trace
                .samples
                .iter()
                .zip(&trace.estimated_states)
                .map(|(s, est)| {
                    json!({
                        "t_s": s.t_s,
                        "counts": s.counts,
                        "true_state": s.true_state.to_string(),
                        "estimated_state": est.to_string(),
                    })
                })
                .collect();
            em.json(&json!({
                "command": "ssr",
                "config": config,
                "threshold": trace.threshold,
                "n_transitions": trace.n_transitions,
                "true_transitions": trace.true_transitions,
                "estimated_dwell_s": dwell_json,
                "samples": samples,
            }))?;
        }
        Format::Csv => {
            em.provenance("ssr", &config)?;
            em.comment(&format!("threshold {}", output::num(trace.threshold)))?;
            em.comment(&format!("n_transitions {}", trace.n_transitions))?;
            em.comment(&format!("true_transitions {}", trace.true_transitions))?;
            em.comment(&format!("estimated_dwell_s {}", output::num(trace.estimated_dwell_s)))?;
            em.line("t_s,counts,true_state,estimated_state")?;
            for (s, est) in trace.samples.iter().zip(&trace.estimated_states) {
                em.line(&output::csv_row(&[
                    output::num(s.t_s),
                    s.counts.to_string(),
                    s.true_state.to_string(),
                    est.to_string(),
                ]))?;
            }
        }
    }
    em.finish()?;
    Ok(0)
}
