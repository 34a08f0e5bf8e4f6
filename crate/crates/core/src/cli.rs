//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::mesh_solver::{validate_solver, MeshConfig};
use crate::potentials::{PotentialSpec, QuantumLabel};
use crate::report::{
    anharmonic_dataset, build_table, figure_dataset, sig2, write_dataset, write_rows, FigureKind, FigureParams,
    OutputFormat, ANHARMONIC_LAMBDAS,
};
use crate::wkb_correction::{fit_gamma, FitGauge};

/// Largest deviation `validate` accepts before failing.
pub const VALIDATION_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "radial-wkb", version, about = "Bohr-Sommerfeld energies and WKB corrections for radial S-states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact vs B-S energies, deviations and γ for a list of states.
    Table {
        #[arg(long)]
        potential: PotentialSpec,
        #[arg(long, default_value_t = 3)]
        dim: u32,
        #[arg(long, default_value = "0..20", value_parser = parse_range)]
        nr: RangeInclusive<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Figure data: rd_vs_m, gamma_vs_nr or gamma_vs_m.
    Figure {
        kind: FigureKind,
        /// Repeatable; gamma_vs_nr only.
        #[arg(long)]
        potential: Vec<PotentialSpec>,
        /// Comma-separated; defaults to 2,3 (rd_vs_m), 3 (gamma_vs_nr) or 2,3,6 (gamma_vs_m).
        #[arg(long, value_delimiter = ',')]
        dim: Vec<u32>,
        #[arg(long, default_value = "0..40", value_parser = parse_range)]
        nr: RangeInclusive<u32>,
        /// Comma-separated exponents replacing the default m grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        m_grid: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Ground-state γ of r² + λr⁴ over couplings and dimensions.
    Anharmonic {
        /// Comma-separated; `inf` is the pure quartic.
        #[arg(long, value_delimiter = ',', default_values_t = ANHARMONIC_LAMBDAS.to_vec())]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 6])]
        dim: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Fits P_k/√Q_{2k+2} to the γ series extracted from mesh energies.
    Fit {
        #[arg(long)]
        potential: PotentialSpec,
        #[arg(long, default_value_t = 3)]
        dim: u32,
        #[arg(long, default_value = "0..40", value_parser = parse_range)]
        nr: RangeInclusive<u32>,
        #[arg(long, default_value_t = 1)]
        fit_order: usize,
        #[arg(long, default_value = "q0")]
        gauge: FitGauge,
        #[command(flatten)]
        common: Common,
    },
    /// Checks the mesh solver against the harmonic and Coulomb spectra.
    Validate {
        #[arg(long, default_value_t = 3)]
        dim: u32,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = 100)]
    mesh_points: usize,
    /// Relative agreement between N and 2N mesh points that marks a level converged.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn mesh(&self) -> Result<MeshConfig> {
        MeshConfig::new(self.mesh_points, None, self.tolerance)
    }

    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(bytes)?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

/// Parses `a..b` (inclusive) or a single `a`.
fn parse_range(s: &str) -> std::result::Result<RangeInclusive<u32>, String> {
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("invalid n_r `{}`", t.trim()));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let a = parse(s)?;
            (a, a)
        }
    };
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok(a..=b)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    let mut buf = Vec::new();
    let common = match command {
        Command::Table { potential, dim, nr, common } => {
            let n_r: Vec<u32> = nr.collect();
            let rows = build_table(&potential, dim, &n_r, &common.mesh()?)?;
            write_rows(&rows, common.format, &mut buf)?;
            common
        }
        Command::Figure { kind, potential, dim, nr, m_grid, common } => {
            let dims = if dim.is_empty() {
                match kind {
                    FigureKind::RdVsM => vec![2, 3],
                    FigureKind::GammaVsNr => vec![3],
                    FigureKind::GammaVsM => vec![2, 3, 6],
                }
            } else {
                dim
            };
            if kind != FigureKind::GammaVsNr && !potential.is_empty() {
                return Err(Error::usage(format!("--potential only applies to gamma_vs_nr, not {kind}")));
            }
            let params = FigureParams {
                dims,
                potentials: potential,
                m_grid,
                n_r: nr.collect(),
                mesh: common.mesh()?,
            };
            write_dataset(&figure_dataset(kind, &params)?, common.format, &mut buf)?;
            common
        }
        Command::Anharmonic { lambdas, dim, common } => {
            write_dataset(&anharmonic_dataset(&lambdas, &dim, &common.mesh()?)?, common.format, &mut buf)?;
            common
        }
        Command::Fit { potential, dim, nr, fit_order, gauge, common } => {
            let n_r: Vec<u32> = nr.collect();
            let rows = build_table(&potential, dim, &n_r, &common.mesh()?)?;
            let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.q.n_r as f64, r.gamma)).collect();
            let fit = fit_gamma(&points, fit_order, gauge)?;
            let record = fit.record();
            match common.format {
                OutputFormat::Csv => {
                    let mut w = csv::Writer::from_writer(&mut buf);
                    let io = |e: csv::Error| Error::Io(e.to_string());
                    w.write_record(record.iter().map(|(k, _)| k)).map_err(io)?;
                    w.write_record(record.iter().map(|(_, v)| v)).map_err(io)?;
                    w.flush()?;
                }
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut buf, &fit).map_err(|e| Error::Io(e.to_string()))?;
                    writeln!(buf)?;
                }
                OutputFormat::Text => {
                    writeln!(buf, "fit of gamma for `{potential}`, d = {dim}, n_r = {}..{}", n_r[0], n_r[n_r.len() - 1])?;
                    for (k, v) in &record {
                        writeln!(buf, "{k:>12} {v}")?;
                    }
                }
            }
            common
        }
        Command::Validate { dim, common } => {
            QuantumLabel::new(0, dim)?;
            let report = validate_solver(dim, &common.mesh()?)?;
            match common.format {
                OutputFormat::Csv => {
                    let mut w = csv::Writer::from_writer(&mut buf);
                    w.serialize(report).map_err(|e| Error::Io(e.to_string()))?;
                    w.flush()?;
                }
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut buf, &report).map_err(|e| Error::Io(e.to_string()))?;
                    writeln!(buf)?;
                }
                OutputFormat::Text => {
                    writeln!(buf, "d = {}, {} mesh points", report.d, report.n_points)?;
                    writeln!(buf, "harmonic deviation {}", sig2(report.harmonic_deviation))?;
                    writeln!(buf, "coulomb deviation  {}", sig2(report.coulomb_deviation))?;
                    writeln!(buf, "max deviation      {}", sig2(report.max_deviation))?;
                }
            }
            common.emit(&buf)?;
            if !(report.max_deviation <= VALIDATION_THRESHOLD) {
                return Err(Error::numerical(format!(
                    "solver deviation {:e} exceeds {VALIDATION_THRESHOLD:e}",
                    report.max_deviation
                )));
            }
            return Ok(());
        }
    };
    common.emit(&buf)
}
