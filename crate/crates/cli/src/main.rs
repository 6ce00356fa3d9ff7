//! nvspin — command-line surface for the NV-center ¹³C analysis toolkit.
//!
//! Exit codes: 0 success, 1 domain warnings escalated by `--strict`,
//! 2 usage, parse, or I/O errors.

mod commands;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "nvspin",
    version,
    about = "NV-center 13C hyperfine analysis: site tables, observables, spin dynamics",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Nuclear gyromagnetic ratio, kHz/G.
    #[arg(
        long,
        global = true,
        env = "NVSPIN_GAMMA_N",
        default_value_t = nvspin_core::GAMMA_N_C13_KHZ_PER_G,
        value_name = "KHZ_PER_G"
    )]
    pub gamma_n: f64,

    /// Seed for stochastic commands; identical seeds reproduce output
    /// byte-for-byte.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Exit with code 1 when the run produces domain warnings.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a site table (TSV or JSON store); optionally
    /// write a normalized JSON store.
    Ingest(IngestArgs),
    /// Rank sites by recomputed lifetime tau0.
    Rank(RankArgs),
    /// Cluster near-degenerate sites into families and report averages.
    Families(FamiliesArgs),
    /// Closed-form splittings and flip probabilities at a field or over a
    /// field sweep.
    Observables(ObservablesArgs),
    /// Decompose a full hyperfine matrix: isotropic/dipolar split,
    /// principal axes, secular parameters, site-frame form (JSON output).
    Tensor(TensorArgs),
    /// Analytic ENDOR lineshape over an rf frequency sweep.
    Endor(EndorArgs),
    /// XY8 dynamical-decoupling signal versus block count.
    Xy8(Xy8Args),
    /// Stochastic single-shot-readout telegraph trace with dwell-time
    /// estimation.
    Ssr(SsrArgs),
}

#[derive(Debug, clap::Args)]
pub struct IngestArgs {
    /// Site table: TSV columns or a previously stored JSON site store.
    #[arg(long, value_name = "PATH")]
    pub table: PathBuf,
    /// Optional .xyz geometry to cross-check site coordinates.
    #[arg(long, value_name = "PATH")]
    pub geometry: Option<PathBuf>,
    /// Write the parsed records as a normalized JSON site store.
    #[arg(long, value_name = "PATH")]
    pub store: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct RankArgs {
    #[arg(long, value_name = "PATH")]
    pub table: PathBuf,
    /// Number of leading sites to report.
    #[arg(long, default_value_t = 30)]
    pub top: usize,
}

#[derive(Debug, clap::Args)]
#[command(allow_negative_numbers = true)]
pub struct FamiliesArgs {
    #[arg(long, value_name = "PATH")]
    pub table: PathBuf,
    /// Optional .xyz geometry enabling the ±120° rotation cross-check.
    #[arg(long, value_name = "PATH")]
    pub geometry: Option<PathBuf>,
    /// Clustering tolerance on A_ZZ, kHz.
    #[arg(long, default_value_t = 5.0)]
    pub tol_azz: f64,
    /// Clustering tolerance on A_nd, kHz.
    #[arg(long, default_value_t = 1.0)]
    pub tol_and: f64,
    /// Clustering tolerance on R_CZ, Å.
    #[arg(long, default_value_t = 0.1)]
    pub tol_rcz: f64,
    /// Clustering tolerance on R_CXY, Å.
    #[arg(long, default_value_t = 0.15)]
    pub tol_rcxy: f64,
    /// Axial classification tolerance on R_CXY, Å.
    #[arg(long, default_value_t = nvspin_core::registry::DEFAULT_AXIAL_TOL_ANG)]
    pub axial_tol: f64,
}

#[derive(Debug, clap::Args)]
#[command(
    allow_negative_numbers = true,
    group(clap::ArgGroup::new("input").required(true)),
    group(clap::ArgGroup::new("fieldsel").required(true))
)]
pub struct ObservablesArgs {
    /// Secular A_ZZ, kHz.
    #[arg(long = "azz", group = "input", value_name = "KHZ")]
    pub a_zz: Option<f64>,
    /// Secular T_nd, kHz (with --azz; default 0).
    #[arg(long = "tnd", requires = "a_zz", value_name = "KHZ")]
    pub t_nd: Option<f64>,
    /// Secular phase, degrees (with --azz; default 0).
    #[arg(long = "phi", requires = "a_zz", value_name = "DEG")]
    pub phi_deg: Option<f64>,
    /// Take the secular parameters from this site id in --table.
    #[arg(long, group = "input", requires = "table")]
    pub site: Option<u32>,
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,
    /// Full NV-frame upper triangle: AXX AXY AXZ AYY AYZ AZZ, kHz.
    #[arg(long, group = "input", num_args = 6, allow_hyphen_values = true, value_name = "KHZ")]
    pub matrix: Option<Vec<f64>>,
    /// Single magnetic field, G.
    #[arg(long, group = "fieldsel", value_name = "GAUSS", allow_hyphen_values = true)]
    pub field: Option<f64>,
    /// Field sweep LO:HI, G.
    #[arg(long, group = "fieldsel", value_name = "LO:HI")]
    pub field_sweep: Option<String>,
    /// Number of sweep points (>= 2).
    #[arg(long, default_value_t = 101, requires = "field_sweep")]
    pub steps: usize,
}

#[derive(Debug, clap::Args)]
#[command(
    allow_negative_numbers = true,
    group(clap::ArgGroup::new("src").required(true))
)]
pub struct TensorArgs {
    /// NV-frame upper triangle: AXX AXY AXZ AYY AYZ AZZ, kHz.
    #[arg(long, group = "src", num_args = 6, allow_hyphen_values = true, value_name = "KHZ")]
    pub matrix: Option<Vec<f64>>,
    /// File of upper-triangle rows: TSV/CSV (6 columns per line, '#'
    /// comments) or a JSON array of 6-element arrays.
    #[arg(long, group = "src", value_name = "PATH")]
    pub matrix_file: Option<PathBuf>,
    /// Site azimuth, degrees; default is the azimuth implied by the
    /// secular phase.
    #[arg(long, value_name = "DEG")]
    pub azimuth: Option<f64>,
}

#[derive(Debug, clap::Args)]
#[command(allow_negative_numbers = true)]
pub struct EndorArgs {
    /// Secular A_ZZ, kHz.
    #[arg(long = "azz", value_name = "KHZ")]
    pub a_zz: f64,
    /// Secular T_nd, kHz.
    #[arg(long = "tnd", value_name = "KHZ")]
    pub t_nd: f64,
    /// Secular phase, degrees.
    #[arg(long = "phi", default_value_t = 0.0, value_name = "DEG")]
    pub phi_deg: f64,
    /// Magnetic field, G.
    #[arg(long, value_name = "GAUSS")]
    pub field: f64,
    /// Rf sweep LO:HI:STEP, kHz.
    #[arg(long, value_name = "LO:HI:STEP")]
    pub sweep: String,
    /// Rf pulse duration, ms.
    #[arg(long, value_name = "MS")]
    pub rf_duration: f64,
    /// Rabi amplitude, kHz; default is the pi-pulse amplitude 1/(2t).
    #[arg(long, value_name = "KHZ")]
    pub rabi: Option<f64>,
    /// Electron manifold the rf addresses: +1, 0, or -1.
    #[arg(long, default_value = "0")]
    pub manifold: String,
}

#[derive(Debug, clap::Args)]
#[command(allow_negative_numbers = true)]
pub struct Xy8Args {
    /// Secular A_ZZ, kHz.
    #[arg(long = "azz", value_name = "KHZ")]
    pub a_zz: f64,
    /// Secular T_nd, kHz.
    #[arg(long = "tnd", value_name = "KHZ")]
    pub t_nd: f64,
    /// Secular phase, degrees.
    #[arg(long = "phi", default_value_t = 0.0, value_name = "DEG")]
    pub phi_deg: f64,
    /// Magnetic field, G.
    #[arg(long, value_name = "GAUSS")]
    pub field: f64,
    /// Inter-pulse half-spacing tau, µs.
    #[arg(long, value_name = "US")]
    pub tau: f64,
    /// Evaluate N = 1..=n-max XY8 blocks.
    #[arg(long, value_name = "N")]
    pub n_max: u32,
    /// Fluorescence contrast in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub contrast: f64,
    /// Finite pi-pulse duration, µs; default instantaneous.
    #[arg(long, value_name = "US")]
    pub pulse_duration: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct SsrArgs {
    /// Nuclear flip probability per readout cycle.
    #[arg(long, value_name = "P")]
    pub flip_prob: f64,
    /// Number of readout cycles.
    #[arg(long, value_name = "N")]
    pub cycles: usize,
    /// Readout fidelity in [0, 1].
    #[arg(long, default_value_t = 0.99)]
    pub fidelity: f64,
    /// Readout cycle duration, s.
    #[arg(long, default_value_t = 5e-3, value_name = "S")]
    pub cycle_time: f64,
    /// Bright-state Poisson rate, counts per cycle.
    #[arg(long, default_value_t = 100.0, value_name = "RATE")]
    pub bright: f64,
    /// Dark-state Poisson rate, counts per cycle.
    #[arg(long, default_value_t = 50.0, value_name = "RATE")]
    pub dark: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(warnings) => {
            if warnings > 0 && cli.strict {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            // A downstream consumer (head, grep -m1, ...) closing the pipe
            // is not a tool failure: finish quietly like line-oriented
            // Unix tools do.
            let broken_pipe = e.chain().any(|cause| {
                cause
                    .downcast_ref::<std::io::Error>()
                    .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            });
            if broken_pipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
