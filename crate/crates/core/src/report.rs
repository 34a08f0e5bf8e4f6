//! Comparison tables and figure datasets: exact against B-S energies, their
//! deviations, and the WKB correction γ.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::bs_solver::{bs_energy_coulomb, bs_energy_general, bs_energy_log, bs_energy_power, bs_energy_well, exact_well_energy};
use crate::error::{Error, Result};
use crate::mesh_solver::{solve_radial, MeshConfig};
use crate::potentials::{check_dim, PotentialSpec, QuantumLabel};
use crate::wkb_correction::gamma_extract;

/// Ground-state R.D. grid for [`FigureKind::RdVsM`].
pub const RD_M_GRID: [f64; 13] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 30.0, 40.0];

/// γ grid for [`FigureKind::GammaVsM`]; m = −1 is Coulomb and m = 0 the logarithm.
pub const GAMMA_M_GRID: [f64; 16] = [
    -1.0, -0.5, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 30.0, 40.0,
];

/// Couplings of the anharmonic γ table; infinity stands for the pure quartic.
pub const ANHARMONIC_LAMBDAS: [f64; 6] = [0.0, 0.1, 1.0, 10.0, 100.0, f64::INFINITY];

/// One state of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub potential: PotentialSpec,
    pub q: QuantumLabel,
    pub e_exact: f64,
    pub e_bs: f64,
    /// |E_exact − E_BS|
    pub abs_dev: f64,
    /// abs_dev / |E_exact|
    pub rel_dev: f64,
    pub gamma: f64,
}

impl ComparisonRow {
    pub fn new(potential: PotentialSpec, q: QuantumLabel, e_exact: f64, e_bs: f64, gamma: f64) -> Self {
        let abs_dev = (e_exact - e_bs).abs();
        ComparisonRow {
            potential,
            q,
            e_exact,
            e_bs,
            abs_dev,
            rel_dev: abs_dev / e_exact.abs(),
            gamma,
        }
    }

    fn record(&self) -> RowRecord {
        let (m, lambda) = match self.potential {
            PotentialSpec::Log => (Some(0.0), None),
            PotentialSpec::Anharmonic { lambda } => (None, Some(lambda)),
            ref v => (v.exponent(), None),
        };
        RowRecord {
            potential: self.potential.to_string(),
            m,
            lambda,
            d: self.q.d,
            n_r: self.q.n_r,
            e_exact: self.e_exact,
            e_bs: self.e_bs,
            ad: self.abs_dev,
            rd: self.rel_dev,
            gamma: self.gamma,
        }
    }
}

#[derive(Serialize)]
struct RowRecord {
    potential: String,
    m: Option<f64>,
    lambda: Option<f64>,
    d: u32,
    n_r: u32,
    e_exact: f64,
    e_bs: f64,
    ad: f64,
    rd: f64,
    gamma: f64,
}

impl Serialize for ComparisonRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.record().serialize(serializer)
    }
}

/// B-S energy with γ = 0, from a closed form whenever one exists.
pub fn bs_energy(v: &PotentialSpec, q: QuantumLabel) -> Result<f64> {
    check_dim(q.d)?;
    match *v {
        PotentialSpec::Power { m, a, g } if m > 0.0 && a == 1.0 && g == 1.0 => bs_energy_power(m, q),
        PotentialSpec::Anharmonic { lambda: 0.0 } => bs_energy_power(2.0, q),
        PotentialSpec::Coulomb => Ok(bs_energy_coulomb(q)),
        PotentialSpec::Log => Ok(bs_energy_log(q)),
        PotentialSpec::InfiniteWell => Ok(bs_energy_well(q)),
        _ => bs_energy_general(v, q, 0.0),
    }
}

/// Exact energies for n_r = 0..=n_max: closed forms for Coulomb
/// (−1/(2n_r + d − 1)²) and the well (Bessel zeros), the mesh otherwise.
pub fn exact_energies(v: &PotentialSpec, d: u32, n_max: u32, cfg: &MeshConfig) -> Result<Vec<f64>> {
    check_dim(d)?;
    match v {
        PotentialSpec::Coulomb => {
            if d < 2 {
                return Err(Error::domain("the Coulomb S-spectrum is unbounded below at d = 1"));
            }
            Ok((0..=n_max)
                .map(|n| {
                    let k = (2 * n + d - 1) as f64;
                    -1.0 / (k * k)
                })
                .collect())
        }
        PotentialSpec::InfiniteWell => (0..=n_max).map(|n| exact_well_energy(QuantumLabel { n_r: n, d })).collect(),
        _ => Ok(solve_radial(v, d, n_max, cfg)?.energies),
    }
}

/// One comparison row per requested state, in the order given.
pub fn build_table(v: &PotentialSpec, d: u32, n_r_list: &[u32], cfg: &MeshConfig) -> Result<Vec<ComparisonRow>> {
    let Some(&n_max) = n_r_list.iter().max() else {
        return Ok(Vec::new());
    };
    let exact = exact_energies(v, d, n_max, cfg).map_err(|e| labeled(e, v, d, None))?;
    n_r_list
        .iter()
        .map(|&n| {
            let q = QuantumLabel::new(n, d)?;
            let e_exact = exact[n as usize];
            let e_bs = bs_energy(v, q).map_err(|e| labeled(e, v, d, Some(n)))?;
            let gamma = gamma_extract(v, q, e_exact).map_err(|e| labeled(e, v, d, Some(n)))?;
            Ok(ComparisonRow::new(*v, q, e_exact, e_bs, gamma))
        })
        .collect()
}

fn labeled(e: Error, v: &PotentialSpec, d: u32, n_r: Option<u32>) -> Error {
    let tag = match n_r {
        Some(n) => format!("`{v}`, d = {d}, n_r = {n}"),
        None => format!("`{v}`, d = {d}"),
    };
    match e {
        Error::Domain(s) => Error::Domain(format!("{tag}: {s}")),
        Error::Numerical(s) => Error::Numerical(format!("{tag}: {s}")),
        Error::Usage(s) => Error::Usage(format!("{tag}: {s}")),
        other => other,
    }
}

/// The potential plotted at exponent m: Coulomb at −1, the logarithm at 0.
pub fn potential_for_m(m: f64) -> Result<PotentialSpec> {
    if m == -1.0 {
        Ok(PotentialSpec::Coulomb)
    } else if m == 0.0 {
        Ok(PotentialSpec::Log)
    } else {
        PotentialSpec::power(m)
    }
}

/// γ of a single state, exact energy included.
pub fn state_gamma(v: &PotentialSpec, q: QuantumLabel, cfg: &MeshConfig) -> Result<f64> {
    let e = exact_energies(v, q.d, q.n_r, cfg)?[q.n_r as usize];
    gamma_extract(v, q, e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    /// Ground-state R.D. against m, one series per dimension.
    RdVsM,
    /// γ against n_r, one series per (potential, dimension).
    GammaVsNr,
    /// Ground-state γ against m, one series per dimension.
    GammaVsM,
}

impl FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rd_vs_m" => Ok(FigureKind::RdVsM),
            "gamma_vs_nr" => Ok(FigureKind::GammaVsNr),
            "gamma_vs_m" => Ok(FigureKind::GammaVsM),
            other => Err(Error::usage(format!(
                "unknown figure `{other}`; expected rd_vs_m, gamma_vs_nr or gamma_vs_m"
            ))),
        }
    }
}

impl fmt::Display for FigureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FigureKind::RdVsM => "rd_vs_m",
            FigureKind::GammaVsNr => "gamma_vs_nr",
            FigureKind::GammaVsM => "gamma_vs_m",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureParams {
    pub dims: Vec<u32>,
    /// Only used by [`FigureKind::GammaVsNr`].
    pub potentials: Vec<PotentialSpec>,
    /// Overrides the default m grid of the m-figures.
    pub m_grid: Option<Vec<f64>>,
    /// n_r values for [`FigureKind::GammaVsNr`].
    pub n_r: Vec<u32>,
    pub mesh: MeshConfig,
}

/// Numeric columns; the first one is the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn figure_dataset(kind: FigureKind, params: &FigureParams) -> Result<Dataset> {
    if params.dims.is_empty() {
        return Err(Error::usage("figure needs at least one dimension"));
    }
    match kind {
        FigureKind::RdVsM | FigureKind::GammaVsM => {
            let default: &[f64] = if kind == FigureKind::RdVsM { &RD_M_GRID } else { &GAMMA_M_GRID };
            let grid = params.m_grid.as_deref().unwrap_or(default);
            let prefix = if kind == FigureKind::RdVsM { "rd" } else { "gamma" };
            let mut columns = vec!["m".to_string()];
            columns.extend(params.dims.iter().map(|d| format!("{prefix}_d{d}")));
            let mut rows = Vec::with_capacity(grid.len());
            for &m in grid {
                let v = potential_for_m(m)?;
                let mut row = vec![m];
                for &d in &params.dims {
                    let r = build_table(&v, d, &[0], &params.mesh)?[0];
                    row.push(if kind == FigureKind::RdVsM { r.rel_dev } else { r.gamma });
                }
                rows.push(row);
            }
            Ok(Dataset { columns, rows })
        }
        FigureKind::GammaVsNr => {
            if params.potentials.is_empty() || params.n_r.is_empty() {
                return Err(Error::usage("gamma_vs_nr needs a potential and an n_r range"));
            }
            let mut columns = vec!["n_r".to_string()];
            let mut series = Vec::new();
            for v in &params.potentials {
                for &d in &params.dims {
                    columns.push(format!("gamma_{v}_d{d}"));
                    series.push(build_table(v, d, &params.n_r, &params.mesh)?);
                }
            }
            let rows = params
                .n_r
                .iter()
                .enumerate()
                .map(|(i, &n)| std::iter::once(n as f64).chain(series.iter().map(|s| s[i].gamma)).collect())
                .collect();
            Ok(Dataset { columns, rows })
        }
    }
}

/// Exponent m in [lo, hi] where γ(r^m, n_r) changes sign, by bisection to
/// `m_tol`. Both ends must be positive powers with opposite signs of γ.
pub fn gamma_zero_crossing(d: u32, n_r: u32, lo: f64, hi: f64, m_tol: f64, cfg: &MeshConfig) -> Result<f64> {
    if !(lo > 0.0 && hi > lo && m_tol > 0.0) {
        return Err(Error::domain(format!("need 0 < lo < hi and m_tol > 0, got [{lo}, {hi}], {m_tol}")));
    }
    let q = QuantumLabel::new(n_r, d)?;
    let gamma = |m: f64| state_gamma(&PotentialSpec::power(m)?, q, cfg);
    let (mut a, mut b) = (lo, hi);
    let ga = gamma(a)?;
    let gb = gamma(b)?;
    if ga.signum() == gb.signum() {
        return Err(Error::domain(format!(
            "γ has the same sign at m = {lo} ({ga:e}) and m = {hi} ({gb:e})"
        )));
    }
    while b - a > m_tol {
        let mid = 0.5 * (a + b);
        if gamma(mid)?.signum() == ga.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// γ of the one-dimensional rule ∫_{−a}^{a} √(E − V) dx = π(n + 1/2 + γ) for
/// the even state n = 2n_r, given the radial γ at d = 1. The full-line action
/// is twice the half-line one, so the correction doubles.
pub fn full_line_gamma(radial_gamma: f64) -> f64 {
    2.0 * radial_gamma
}

/// Ground-state γ of V = r² + λr⁴, indexed `[dimension][coupling]`.
/// λ = ∞ means the pure quartic, the limit the γ values approach. The d = 1
/// entries use the one-dimensional convention of [`full_line_gamma`].
pub fn anharmonic_gamma_table(lambdas: &[f64], dims: &[u32], cfg: &MeshConfig) -> Result<Vec<Vec<f64>>> {
    dims.iter()
        .map(|&d| {
            let q = QuantumLabel::new(0, d)?;
            lambdas
                .iter()
                .map(|&lambda| {
                    let v = if lambda == f64::INFINITY {
                        PotentialSpec::power(4.0)?
                    } else {
                        PotentialSpec::anharmonic(lambda)?
                    };
                    let g = state_gamma(&v, q, cfg).map_err(|e| labeled(e, &v, d, Some(0)))?;
                    Ok(if d == 1 { full_line_gamma(g) } else { g })
                })
                .collect()
        })
        .collect()
}

/// The anharmonic grid as a dataset with λ in the first column.
pub fn anharmonic_dataset(lambdas: &[f64], dims: &[u32], cfg: &MeshConfig) -> Result<Dataset> {
    let grid = anharmonic_gamma_table(lambdas, dims, cfg)?;
    let mut columns = vec!["lambda".to_string()];
    columns.extend(dims.iter().map(|d| format!("gamma_d{d}")));
    let rows = lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| std::iter::once(l).chain(grid.iter().map(|g| g[j])).collect())
        .collect();
    Ok(Dataset { columns, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    /// Human-readable: energies truncated to 4 decimals, deviations and γ
    /// to 2 significant digits.
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::usage(format!("unknown format `{other}`; expected csv, json or text"))),
        }
    }
}

/// Truncates toward zero at 4 decimals, the way the tables print energies.
pub fn truncate4(x: f64) -> String {
    // nudge by a few ulps so values like 2.1 stored as 2.0999.. keep their digit
    let t = (x * 1e4 * (1.0 + 4.0 * f64::EPSILON)).trunc() / 1e4;
    let t = if t == 0.0 { 0.0 } else { t };
    format!("{t:.4}")
}

/// Two significant digits in scientific form, `0` for exact zero.
pub fn sig2(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:.1e}")
    }
}

pub fn write_rows(rows: &[ComparisonRow], format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r.record()).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, rows).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
        OutputFormat::Text => {
            writeln!(
                out,
                "{:<22} {:>3} {:>4} {:>14} {:>14} {:>8} {:>8} {:>8}",
                "potential", "d", "n_r", "E_exact", "E_BS", "A.D.", "R.D.", "gamma"
            )?;
            for r in rows {
                writeln!(
                    out,
                    "{:<22} {:>3} {:>4} {:>14} {:>14} {:>8} {:>8} {:>8}",
                    r.potential.to_string(),
                    r.q.d,
                    r.q.n_r,
                    truncate4(r.e_exact),
                    truncate4(r.e_bs),
                    sig2(r.abs_dev),
                    sig2(r.rel_dev),
                    sig2(r.gamma)
                )?;
            }
        }
    }
    Ok(())
}

pub fn write_dataset(data: &Dataset, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&data.columns).map_err(csv_error)?;
            for row in &data.rows {
                w.write_record(row.iter().map(|x| x.to_string())).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let records: Vec<serde_json::Map<String, serde_json::Value>> = data
                .rows
                .iter()
                .map(|row| {
                    data.columns
                        .iter()
                        .zip(row)
                        .map(|(c, &x)| (c.clone(), json_number(x)))
                        .collect()
                })
                .collect();
            serde_json::to_writer_pretty(&mut *out, &records).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
        OutputFormat::Text => {
            let header: Vec<String> = data.columns.iter().map(|c| format!("{c:>14}")).collect();
            writeln!(out, "{}", header.join(" "))?;
            for row in &data.rows {
                let cells: Vec<String> = row
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| if j == 0 { format!("{x:>14}") } else { format!("{:>14}", sig2(x)) })
                    .collect();
                writeln!(out, "{}", cells.join(" "))?;
            }
        }
    }
    Ok(())
}

// JSON has no infinity; the λ = ∞ sentinel is written as the string "inf"
fn json_number(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .unwrap_or_else(|| serde_json::Value::String(x.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
