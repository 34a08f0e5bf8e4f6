//! Special functions and Gauss quadrature rules.
//!
//! Everything here is a pure function of its arguments. The only shared state
//! is a lazily built, read-only table of Gauss-Legendre rules used by the
//! action integrals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx); sin(πx) > 0 on (0, 1/2)
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// ln B(a, b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!("beta requires a, b > 0, got ({a}, {b})")));
    }
    Ok(ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b))
}

/// Euler Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta(a: f64, b: f64) -> Result<f64> {
    ln_beta(a, b).map(f64::exp)
}

/// Returns `(J_ν(x), J_{ν+1}(x))` for ν ≥ -1/2 and x > 0.
///
/// Miller's downward recurrence normalized with the Neumann-type sum
/// (x/2)^ν = Σ_k (ν+2k) Γ(ν+k)/k! J_{ν+2k}(x).
pub fn bessel_j_pair(nu: f64, x: f64) -> (f64, f64) {
    debug_assert!(nu >= -0.5 && x > 0.0);
    let steps = (x + 15.0 * x.cbrt() + 40.0).ceil() as usize;
    let steps = steps + steps % 2;

    // Normalized sum coefficients c_k / Γ(ν+1), walked downward from k = steps/2.
    let kmax = steps / 2;
    let mut coeffs = Vec::with_capacity(kmax + 1);
    coeffs.push(1.0);
    if kmax >= 1 {
        coeffs.push(nu + 2.0);
    }
    for k in 1..kmax {
        let kf = k as f64;
        let prev = coeffs[k];
        coeffs.push(prev * (nu + 2.0 * kf + 2.0) * (nu + kf) / ((nu + 2.0 * kf) * (kf + 1.0)));
    }

    let mut f_above = 0.0_f64;
    let mut f = 1e-280_f64;
    let mut sum = coeffs[kmax] * f;
    for j in (1..=steps).rev() {
        let f_below = 2.0 * (nu + j as f64) / x * f - f_above;
        f_above = f;
        f = f_below;
        let idx = j - 1;
        if idx % 2 == 0 {
            sum += coeffs[idx / 2] * f;
        }
        if f.abs() > 1e200 {
            f *= 1e-200;
            f_above *= 1e-200;
            sum *= 1e-200;
        }
    }
    // f now holds the order-ν value, f_above the order-(ν+1) value.
    let log_prefactor = nu * (0.5 * x).ln() - ln_gamma_pos(nu + 1.0);
    let scale = log_prefactor.exp() / sum;
    (f * scale, f_above * scale)
}

/// J_ν(x) for ν ≥ -1/2, x > 0.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    bessel_j_pair(nu, x).0
}

/// k-th positive zero of J_ν.
///
/// The zero is bracketed by a forward sign scan (consecutive zeros of J_ν with
/// ν ≥ -1/2 are more than 2.5 apart), refined by bisection and finished with
/// two Newton steps.
pub fn bessel_j_zero(nu: f64, k: usize) -> Result<f64> {
    if !(nu >= -0.5) {
        return Err(Error::domain(format!("bessel_j_zero requires nu >= -1/2, got {nu}")));
    }
    if k == 0 {
        return Err(Error::domain("bessel_j_zero requires k >= 1"));
    }
    let step = 0.5;
    let mut lo = nu.max(0.0) + 0.5;
    let mut f_lo = bessel_j(nu, lo);
    let mut found = 0;
    let mut hi = lo;
    loop {
        let next = hi + step;
        let f_next = bessel_j(nu, next);
        if f_next == 0.0 || f_next.signum() != f_lo.signum() {
            found += 1;
            if found == k {
                lo = hi;
                hi = next;
                break;
            }
        }
        hi = next;
        f_lo = f_next;
    }

    let mut f_lo = bessel_j(nu, lo);
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        let f_mid = bessel_j(nu, mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut root = 0.5 * (lo + hi);
    for _ in 0..2 {
        let (j, j_next) = bessel_j_pair(nu, root);
        let deriv = nu / root * j - j_next;
        if deriv != 0.0 {
            let candidate = root - j / deriv;
            if (candidate - root).abs() < 1e-8 * root {
                root = candidate;
            }
        }
    }
    Ok(root)
}

/// Quadrature families offered by [`gauss_rule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureFamily {
    /// Gauss-Legendre on (-1, 1), unit weight.
    Legendre,
    /// Gauss-Jacobi on (0, 1) with weight (1-t)^{1/2}.
    JacobiHalfPow,
}

impl fmt::Display for QuadratureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureFamily::Legendre => f.write_str("legendre"),
            QuadratureFamily::JacobiHalfPow => f.write_str("jacobi_halfpow"),
        }
    }
}

impl FromStr for QuadratureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" => Ok(QuadratureFamily::Legendre),
            "jacobi_halfpow" => Ok(QuadratureFamily::JacobiHalfPow),
            other => Err(Error::usage(format!("unknown quadrature family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub family: QuadratureFamily,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on its reference interval (weight function included).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Legendre rule mapped onto `[a, b]`.
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        debug_assert_eq!(self.family, QuadratureFamily::Legendre);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|x| f(mid + half * x))
    }
}

/// Builds an `n`-point Gauss rule of the requested family.
pub fn gauss_rule(n: usize, family: QuadratureFamily) -> Result<QuadratureRule> {
    if n < 2 {
        return Err(Error::domain(format!("gauss_rule requires n >= 2, got {n}")));
    }
    Ok(match family {
        QuadratureFamily::Legendre => gauss_legendre(n),
        QuadratureFamily::JacobiHalfPow => gauss_jacobi_half(n)?,
    })
}

/// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let deriv = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, deriv)
}

fn gauss_legendre(n: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, x);
            deriv = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        if dp.is_finite() {
            deriv = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        // descending cosines -> fill from the top down so nodes end up increasing
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    QuadratureRule {
        nodes,
        weights,
        family: QuadratureFamily::Legendre,
    }
}

/// Jacobi P_n^{(α,β)}(x) and its derivative.
fn jacobi_eval(n: usize, alpha: f64, beta: f64, x: f64) -> (f64, f64) {
    let ab = alpha + beta;
    let mut p0 = 1.0;
    let mut p1 = 0.5 * (alpha - beta + (ab + 2.0) * x);
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + ab;
        let a1 = 2.0 * kf * (kf + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (kf + alpha - 1.0) * (kf + beta - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let c = 2.0 * nf + ab;
    let deriv = (nf * (alpha - beta - c * x) * p1 + 2.0 * (nf + alpha) * (nf + beta) * p0)
        / (c * (1.0 - x * x));
    (p1, deriv)
}

fn gauss_jacobi_half(n: usize) -> Result<QuadratureRule> {
    let (alpha, beta) = (0.5_f64, 0.0_f64);
    let ab = alpha + beta;

    // Golub-Welsch eigenvalues seed the Newton iteration.
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        let c = 2.0 * k + ab;
        jac[(i, i)] = (beta * beta - alpha * alpha) / (c * (c + 2.0));
        if i + 1 < n {
            let k1 = k + 1.0;
            let c1 = 2.0 * k1 + ab;
            let b = (4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab)
                / (c1 * c1 * (c1 + 1.0) * (c1 - 1.0)))
                .sqrt();
            jac[(i, i + 1)] = b;
            jac[(i + 1, i)] = b;
        }
    }
    let mut seeds: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
    seeds.sort_by(|a, b| a.total_cmp(b));

    let norm = (ln_gamma_pos(n as f64 + alpha + 1.0) + ln_gamma_pos(n as f64 + beta + 1.0)
        - ln_gamma_pos(n as f64 + ab + 1.0)
        - ln_gamma_pos(n as f64 + 1.0))
    .exp()
        * 2f64.powf(ab + 1.0);

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for seed in seeds {
        let mut x = seed;
        for _ in 0..50 {
            let (p, dp) = jacobi_eval(n, alpha, beta, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (p, dp) = jacobi_eval(n, alpha, beta, x);
        if !(p / dp).is_finite() || (p / dp).abs() > 1e-12 {
            return Err(Error::numerical(format!(
                "Gauss-Jacobi node did not converge (n = {n}, residual {p:e})"
            )));
        }
        let w = norm / ((1.0 - x * x) * dp * dp);
        // map (-1, 1) onto (0, 1): ∫₀¹ (1-t)^{1/2} f dt = 2^{-3/2} ∫ (1-x)^{1/2} f dx
        nodes.push(0.5 * (1.0 + x));
        weights.push(w * 2f64.powf(-1.5));
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        family: QuadratureFamily::JacobiHalfPow,
    })
}

const CACHED_LEGENDRE: [usize; 5] = [128, 256, 512, 1024, 2048];

/// Shared Gauss-Legendre rule for the sizes used by the adaptive action loop.
pub(crate) fn cached_legendre(n: usize) -> &'static QuadratureRule {
    static CACHE: [OnceLock<QuadratureRule>; 5] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let slot = CACHED_LEGENDRE
        .iter()
        .position(|&m| m == n)
        .expect("uncached Legendre size");
    CACHE[slot].get_or_init(|| gauss_legendre(n))
}
