//! Reference S-state eigenvalues of −ψ'' − ((d−1)/r)ψ' + Vψ = Eψ on a
//! Lagrange-Laguerre mesh.
//!
//! Trial functions are ψ(r) = p(r/h)·e^{−r/(2h)} with p a polynomial of degree
//! below N, expanded in Laguerre polynomials L_n^{(d−1)} orthonormal for the
//! measure x^{d−1}e^{−x}. The kinetic matrix is exact in that basis and the
//! potential matrix uses a 2N-point generalized Gauss-Laguerre rule. The weak
//! form carries the regularity condition at r = 0 for every d, so no
//! centrifugal term is introduced.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::bs_solver::bs_energy_general;
use crate::error::{Error, Result};
use crate::potentials::{check_dim, eval_unchecked, turning_point, PotentialSpec, QuantumLabel};
use crate::specfun::{gauss_rule, ln_gamma, QuadratureFamily};

/// Smallest mesh accepted by [`MeshConfig::new`].
pub const MIN_POINTS: usize = 20;
/// Largest mesh size reached by automatic refinement.
pub const MAX_POINTS: usize = 800;

const OUTER_REACH: f64 = 1.5;
const TAIL_DECAY: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MeshBasis {
    #[default]
    LaguerreRadial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub n_points: usize,
    /// Radial scale h with r = h·x; `None` picks it from the B-S estimate of
    /// the highest requested state.
    pub scaling: Option<f64>,
    pub basis: MeshBasis,
    /// Relative change under mesh doubling below which a level is trusted.
    pub tolerance: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            n_points: 100,
            scaling: None,
            basis: MeshBasis::LaguerreRadial,
            tolerance: 1e-6,
        }
    }
}

impl MeshConfig {
    pub fn new(n_points: usize, scaling: Option<f64>, tolerance: f64) -> Result<Self> {
        let cfg = MeshConfig {
            n_points,
            scaling,
            basis: MeshBasis::LaguerreRadial,
            tolerance,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_points(n_points: usize) -> Result<Self> {
        Self::new(n_points, None, MeshConfig::default().tolerance)
    }

    fn check(&self) -> Result<()> {
        if self.n_points < MIN_POINTS || self.n_points > MAX_POINTS {
            return Err(Error::domain(format!(
                "mesh size must lie in [{MIN_POINTS}, {MAX_POINTS}], got {}",
                self.n_points
            )));
        }
        if let Some(h) = self.scaling {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::domain(format!("mesh scaling must be positive, got {h}")));
            }
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }
}

/// Mesh eigenvalues with convergence metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Levels n_r = 0..=n_max from the refined mesh.
    pub energies: Vec<f64>,
    pub n_converged: usize,
    /// Coarse mesh size and the scaling it used; the energies come from twice
    /// that many points.
    pub config_used: MeshConfig,
    pub residual_estimate: f64,
}

/// Result of [`validate_solver`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub d: u32,
    pub n_points: usize,
    pub harmonic_deviation: f64,
    pub coulomb_deviation: f64,
    pub max_deviation: f64,
}

/// Lowest n_max + 1 S-state energies of `v` in d dimensions.
///
/// The mesh is solved at N and 2N points and a level is trusted when the two
/// agree to `cfg.tolerance` relative. N doubles until every requested level
/// is trusted or the refined mesh would exceed [`MAX_POINTS`].
pub fn solve_radial(v: &PotentialSpec, d: u32, n_max: u32, cfg: &MeshConfig) -> Result<SpectrumResult> {
    cfg.check()?;
    let count = requested_levels(v, d, n_max, cfg)?;
    let mut n_points = cfg.n_points;
    let first = Problem::new(v, d, n_max, n_points, cfg.scaling)?;
    let mut coarse_scale = first.scale;
    let mut coarse = first.energies(count)?;
    loop {
        let fine_problem = Problem::new(v, d, n_max, 2 * n_points, cfg.scaling)?;
        let fine = fine_problem.energies(count)?;
        let changes: Vec<f64> = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| (c - f).abs() / f.abs().max(f64::MIN_POSITIVE))
            .collect();
        let n_converged = changes.iter().take_while(|&&c| c <= cfg.tolerance).count();
        if n_converged == count {
            return Ok(SpectrumResult {
                energies: fine,
                n_converged,
                config_used: MeshConfig {
                    n_points,
                    scaling: Some(coarse_scale),
                    ..*cfg
                },
                residual_estimate: changes.iter().cloned().fold(0.0, f64::max),
            });
        }
        if 4 * n_points > MAX_POINTS {
            return Err(Error::MeshNotConverged {
                n_points: 2 * n_points,
                residual: changes.iter().cloned().fold(0.0, f64::max),
                target: cfg.tolerance,
                coarse,
                fine,
            });
        }
        n_points *= 2;
        coarse = fine;
        coarse_scale = fine_problem.scale;
    }
}

/// Sign changes of each eigenvector on the mesh nodes, for n_r = 0..=n_max,
/// at the single mesh size `cfg.n_points`. Only nodes inside 1.1 turning radii
/// of each level are used; farther out the eigenvector is below its own
/// discretization error.
pub fn node_counts(v: &PotentialSpec, d: u32, n_max: u32, cfg: &MeshConfig) -> Result<Vec<usize>> {
    cfg.check()?;
    let count = requested_levels(v, d, n_max, cfg)?;
    let problem = Problem::new(v, d, n_max, cfg.n_points, cfg.scaling)?;
    let (energies, vectors) = problem.eigen(count, true)?;
    let vectors = vectors.expect("eigenvectors requested");
    // sqrt(w_k)·p_n(x_k) on the N-point rule; ψ(x_k) has the sign of Σ_n c_n·values[n][k]
    let alpha = (d - 1) as f64;
    let nodes = laguerre_nodes(cfg.n_points, alpha)?;
    let values = weighted_basis(cfg.n_points, alpha, &nodes, alpha);
    let mut counts = Vec::with_capacity(count);
    for (j, &energy) in energies.iter().enumerate() {
        let r_max = 1.1 * turning_point(v, energy)?;
        let signs: Vec<bool> = nodes
            .iter()
            .enumerate()
            .take_while(|(_, &x)| problem.scale * x < r_max)
            .map(|(k, _)| (0..cfg.n_points).map(|n| vectors[(n, j)] * values[(n, k)]).sum::<f64>() > 0.0)
            .collect();
        counts.push(signs.windows(2).filter(|w| w[0] != w[1]).count());
    }
    Ok(counts)
}

/// Maximum absolute deviation from the closed-form harmonic (4n_r + d) and
/// Coulomb (−1/(2n_r + d − 1)²) spectra over n_r ≤ 10.
pub fn validate_solver(d: u32, cfg: &MeshConfig) -> Result<ValidationReport> {
    const LEVELS: u32 = 10;
    let harmonic = solve_radial(&PotentialSpec::power(2.0)?, d, LEVELS, cfg)?;
    let harmonic_deviation = harmonic
        .energies
        .iter()
        .enumerate()
        .map(|(n, e)| (e - (4 * n as u32 + d) as f64).abs())
        .fold(0.0, f64::max);
    let coulomb_deviation = if d >= 2 {
        let coulomb = solve_radial(&PotentialSpec::Coulomb, d, LEVELS, cfg)?;
        coulomb
            .energies
            .iter()
            .enumerate()
            .map(|(n, e)| {
                let k = (2 * n as u32 + d - 1) as f64;
                (e + 1.0 / (k * k)).abs()
            })
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(ValidationReport {
        d,
        n_points: cfg.n_points,
        harmonic_deviation,
        coulomb_deviation,
        max_deviation: harmonic_deviation.max(coulomb_deviation),
    })
}

fn requested_levels(v: &PotentialSpec, d: u32, n_max: u32, cfg: &MeshConfig) -> Result<usize> {
    check_dim(d)?;
    if matches!(v, PotentialSpec::InfiniteWell) {
        return Err(Error::usage("the infinite well is not solved on the mesh; use its exact energies"));
    }
    if let Some(m) = v.exponent().filter(|&m| m < 0.0) {
        if (d as f64 - 1.0) + m <= -1.0 {
            return Err(Error::domain(format!("r^{m} has no regular S-states in d = {d}")));
        }
    }
    let count = n_max as usize + 1;
    if 2 * count > cfg.n_points {
        return Err(Error::domain(format!(
            "n_max = {n_max} needs at least {} mesh points, got {}",
            2 * count,
            cfg.n_points
        )));
    }
    Ok(count)
}

/// One discretization at a fixed mesh size.
struct Problem {
    n_points: usize,
    scale: f64,
    hamiltonian: DMatrix<f64>,
    negative: bool,
}

impl Problem {
    fn new(v: &PotentialSpec, d: u32, n_max: u32, n_points: usize, scaling: Option<f64>) -> Result<Self> {
        let alpha = (d - 1) as f64;
        let scale = match scaling {
            Some(h) => h,
            None => auto_scale(v, d, n_max, laguerre_nodes(n_points, alpha)?.last().copied().unwrap_or(1.0))?,
        };
        // r^m with m < 0: the singular factor moves into the quadrature weight
        let shift = v.exponent().filter(|&m| m < 0.0).unwrap_or(0.0);
        let beta = alpha + shift;
        let quad_points = 2 * n_points;
        let nodes = laguerre_nodes(quad_points, beta)?;
        let mut basis = weighted_basis(n_points, alpha, &nodes, beta);
        let basis_t = basis.transpose();
        for (k, &y) in nodes.iter().enumerate() {
            let g = y.powf(-shift) * eval_unchecked(v, scale * y);
            basis.column_mut(k).scale_mut(g);
        }
        let mut hamiltonian = &basis * basis_t;
        hamiltonian += kinetic_matrix(n_points, alpha) / (scale * scale);
        Ok(Problem {
            n_points,
            scale,
            hamiltonian,
            negative: v.has_negative_spectrum(),
        })
    }

    fn energies(&self, count: usize) -> Result<Vec<f64>> {
        Ok(self.eigen(count, false)?.0)
    }

    fn eigen(&self, count: usize, vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
        let (values, vecs) = if vectors {
            let eig = SymmetricEigen::new(self.hamiltonian.clone());
            let mut order: Vec<usize> = (0..self.n_points).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let mut sorted = DMatrix::zeros(self.n_points, count);
            for (j, &i) in order.iter().take(count).enumerate() {
                sorted.set_column(j, &eig.eigenvectors.column(i));
            }
            (values, Some(sorted))
        } else {
            let mut values: Vec<f64> = self.hamiltonian.symmetric_eigenvalues().iter().copied().collect();
            values.sort_by(f64::total_cmp);
            (values, None)
        };
        let levels: Vec<f64> = values.into_iter().take(count).collect();
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::numerical("mesh Hamiltonian produced non-finite eigenvalues"));
        }
        if self.negative && levels.iter().any(|&e| e >= 0.0) {
            return Err(Error::numerical(format!(
                "only {} bound levels resolved on {} mesh points with scale {:.4e}",
                levels.iter().filter(|&&e| e < 0.0).count(),
                self.n_points,
                self.scale
            )));
        }
        Ok((levels, vecs))
    }
}

/// h such that the last node sits past the turning radius r₀ of the highest
/// requested B-S level: at R with ∫_{r₀}^{R} √(V − E) dr = 25, and at least
/// at 1.5·r₀.
fn auto_scale(v: &PotentialSpec, d: u32, n_max: u32, last_node: f64) -> Result<f64> {
    let energy = bs_energy_general(v, QuantumLabel::new(n_max, d)?, 0.0)?;
    let r0 = turning_point(v, energy)?;
    let rule = gauss_rule(16, QuadratureFamily::Legendre)?;
    let (mut r, mut step, mut decay) = (r0, 0.01 * r0, 0.0);
    while decay < TAIL_DECAY {
        decay += rule.integrate_on(r, r + step, |x| (eval_unchecked(v, x) - energy).max(0.0).sqrt());
        r += step;
        step *= 1.1;
        if !r.is_finite() {
            return Err(Error::numerical(format!("no classically forbidden tail found for `{v}`")));
        }
    }
    Ok(r.max(OUTER_REACH * r0) / last_node)
}

/// Zeros of L_K^{(β)}, ascending.
pub(crate) fn laguerre_nodes(k: usize, beta: f64) -> Result<Vec<f64>> {
    let diag: Vec<f64> = (0..k).map(|n| 2.0 * n as f64 + beta + 1.0).collect();
    let off: Vec<f64> = (1..k).map(|n| -((n as f64) * (n as f64 + beta)).sqrt()).collect();
    tridiagonal_eigenvalues(diag, off)
}

/// Matrix B[n][k] = p_n(y_k)·sqrt(w_k): p_n are the orthonormal Laguerre
/// polynomials for x^α e^{−x} and (y_k, w_k) the Gauss rule for x^β e^{−x}.
/// Both recurrences carry a running log-scale, since p_n(y) grows like e^{y/2}.
fn weighted_basis(n_points: usize, alpha: f64, nodes: &[f64], beta: f64) -> DMatrix<f64> {
    const BIG: f64 = 1e100;
    let ln_big = BIG.ln();
    let p0 = |a: f64| (-0.5 * ln_gamma(a + 1.0).expect("a > -1")).exp();
    let step = |n: usize, a: f64, y: f64, cur: f64, prev: f64| {
        let nf = n as f64;
        ((y - 2.0 * nf - a - 1.0) * cur + (nf * (nf + a)).sqrt() * prev) / -((nf + 1.0) * (nf + 1.0 + a)).sqrt()
    };
    let mut out = DMatrix::zeros(n_points, nodes.len());
    for (k, &y) in nodes.iter().enumerate() {
        // Christoffel: 1/w_k = Σ_{n<K} p_n^{(β)}(y_k)²
        let (mut prev, mut cur, mut scale, mut sum_sq) = (0.0, p0(beta), 0.0, 0.0);
        for n in 0..nodes.len() {
            sum_sq += cur * cur;
            let next = step(n, beta, y, cur, prev);
            prev = cur;
            cur = next;
            if cur.abs() > BIG {
                prev /= BIG;
                cur /= BIG;
                sum_sq /= BIG * BIG;
                scale += ln_big;
            }
        }
        let ln_norm = scale + 0.5 * sum_sq.ln();

        let (mut prev, mut cur, mut scale) = (0.0, p0(alpha), 0.0);
        for n in 0..n_points {
            out[(n, k)] = cur * (scale - ln_norm).exp();
            let next = step(n, alpha, y, cur, prev);
            prev = cur;
            cur = next;
            if cur.abs() > BIG {
                prev /= BIG;
                cur /= BIG;
                scale += ln_big;
            }
        }
    }
    out
}

/// ∫ φ_m'φ_n' x^α dx for φ_n = p_n(x)e^{−x/2}, using L_n' = −Σ_{k<n} L_k.
fn kinetic_matrix(n_points: usize, alpha: f64) -> DMatrix<f64> {
    let base = ln_gamma(alpha + 1.0).expect("alpha >= 0");
    let h: Vec<f64> = (0..n_points)
        .map(|k| {
            let k = k as f64;
            (ln_gamma(k + alpha + 1.0).expect("positive") - ln_gamma(k + 1.0).expect("positive") - base).exp()
        })
        .collect();
    let mut partial = 0.0;
    let mut t = DMatrix::zeros(n_points, n_points);
    for m in 0..n_points {
        t[(m, m)] = (partial + 0.25 * h[m]) / h[m];
        for n in m + 1..n_points {
            let value = (partial + 0.5 * h[m]) / (h[m] * h[n]).sqrt();
            t[(m, n)] = value;
            t[(n, m)] = value;
        }
        partial += h[m];
    }
    t
}

/// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal
/// and off-diagonal, by implicit QL with Wilkinson shifts. Ascending.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    let mut e = off;
    e.push(0.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::numerical(format!("tridiagonal QL stalled at row {l} of {n}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}
