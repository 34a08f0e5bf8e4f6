//! Bohr-Sommerfeld energies: ∫₀^{r₀} √(E − V) dr = π(n_r + d/4 + γ).

use std::f64::consts::PI;

use crate::action::{action_closed_power, action_numeric};
use crate::error::{Error, Result};
use crate::potentials::{check_dim, PotentialSpec, QuantumLabel};
use crate::roots::{bracket_increasing, solve_increasing};
use crate::specfun::{beta, bessel_j_zero, ln_beta};

/// M = 1/m + 1/2.
pub fn big_m(m: f64) -> f64 {
    1.0 / m + 0.5
}

/// Closed-form B-S energy of V = r^m, m > 0.
pub fn bs_energy_power(m: f64, q: QuantumLabel) -> Result<f64> {
    bs_energy_power_real(m, q.n_r as f64, q.d)
}

/// Same as [`bs_energy_power`] with the radial quantum number continued to
/// real values n_r ≥ 0.
pub fn bs_energy_power_real(m: f64, n_r: f64, d: u32) -> Result<f64> {
    check_dim(d)?;
    if !(n_r >= 0.0) {
        return Err(Error::domain(format!("n_r must be >= 0, got {n_r}")));
    }
    power_energy_from_shift(m, n_r + d as f64 / 4.0)
}

/// Inverts E^M·B(1/m, 3/2)/m = π·shift; shared with the γ-modified energies.
pub(crate) fn power_energy_from_shift(m: f64, shift: f64) -> Result<f64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("closed-form B-S energy needs m > 0, got {m}")));
    }
    if !(shift > 0.0) {
        return Err(Error::domain(format!("quantization shift must be positive, got {shift}")));
    }
    let big = big_m(m);
    Ok((2.0 * big * beta(0.5, big)? * shift).powf(1.0 / big))
}

/// E_BS = −1/(2n_r + d/2)² for V = −1/r.
pub fn bs_energy_coulomb(q: QuantumLabel) -> f64 {
    let denom = 2.0 * q.n_r as f64 + q.d as f64 / 2.0;
    -1.0 / (denom * denom)
}

/// E_BS = log(2√π(n_r + d/4)) for V = log r.
pub fn bs_energy_log(q: QuantumLabel) -> f64 {
    (2.0 * PI.sqrt() * q.shift()).ln()
}

/// E_BS = π²(n_r + d/4)² for the infinite well of unit radius.
pub fn bs_energy_well(q: QuantumLabel) -> f64 {
    let s = PI * q.shift();
    s * s
}

/// Exact infinite-well energies: squared zeros of J_{(d−2)/2}.
pub fn exact_well_energy(q: QuantumLabel) -> Result<f64> {
    check_dim(q.d)?;
    let n = q.n_r as f64;
    let root = match q.d {
        1 => PI * (n + 0.5),
        3 => PI * (n + 1.0),
        d => bessel_j_zero((d as f64 - 2.0) / 2.0, q.n_r as usize + 1)?,
    };
    Ok(root * root)
}

/// Solves the quantization condition with the quadrature action and a
/// bracketed Newton search, for any supported potential.
pub fn bs_energy_general(v: &PotentialSpec, q: QuantumLabel, gamma: f64) -> Result<f64> {
    check_dim(q.d)?;
    let target = PI * (q.shift() + gamma);
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::domain(format!(
            "n_r + d/4 + gamma must be positive, got {}",
            q.shift() + gamma
        )));
    }
    let residual = |e: f64| -> Result<f64> { Ok(action_numeric(v, e)? - target) };

    match *v {
        PotentialSpec::Log => {
            let start = (2.0 * target / PI.sqrt()).ln();
            let (lo, hi) = bracket_increasing(residual, start, |x| x - 1.0, |x| x + 1.0)?;
            solve_increasing(residual, lo, hi, start, 1e-11 * start.abs().max(1.0))
        }
        _ if v.has_negative_spectrum() => {
            // E = −e^u; the action decreases with u, so search on −u
            let m = v.exponent().unwrap_or(-1.0);
            let coeff = v.power_coefficient();
            let unit = action_closed_power(m, -1.0)? * coeff.powf(-1.0 / m);
            let start = -((target / unit).powf(1.0 / big_m(m))).ln();
            let g = |w: f64| residual(-(-w).exp());
            let (lo, hi) = bracket_increasing(g, start, |x| x - 1.0, |x| x + 1.0)?;
            let w = solve_increasing(g, lo, hi, start, 1e-11)?;
            Ok(-(-w).exp())
        }
        _ => {
            let start = confining_guess(v, target)?;
            let g = |s: f64| residual(s.exp());
            let ln2 = std::f64::consts::LN_2;
            let (lo, hi) = bracket_increasing(g, start.ln(), |x| x - ln2, |x| x + ln2)?;
            let s = solve_increasing(g, lo, hi, start.ln(), 1e-11)?;
            Ok(s.exp())
        }
    }
}

/// Starting energy from the closed form of the dominant power-law term.
fn confining_guess(v: &PotentialSpec, target: f64) -> Result<f64> {
    let shift = target / PI;
    Ok(match *v {
        PotentialSpec::Power { m, .. } => {
            power_energy_from_shift(m, shift)? * v.power_coefficient().powf(1.0 / (m * big_m(m)))
        }
        PotentialSpec::Anharmonic { lambda } => {
            let harmonic = power_energy_from_shift(2.0, shift)?;
            if lambda > 0.0 {
                // λr⁴ alone: E = λ^{1/3}·E_quartic
                let quartic = lambda.cbrt() * power_energy_from_shift(4.0, shift)?;
                harmonic.max(quartic)
            } else {
                harmonic
            }
        }
        PotentialSpec::InfiniteWell => target * target,
        _ => 1.0,
    })
}

/// Leading large-d coefficients (c_M, c_M^BS) of E ≈ c·d^{1/M}.
///
/// c_M comes from minimizing the effective potential d²/(4r²) + r^m; c_M^BS is
/// the large-d limit of the closed-form B-S energy, (M·B(1/2, M)/2)^{1/M}.
pub fn large_d_coefficients(m: f64) -> Result<(f64, f64)> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("large-d coefficients need m > 0, got {m}")));
    }
    let big = big_m(m);
    let c_exact = 2f64.powf(1.0 - 1.0 / big) * (1.0 / (2.0 * big - 1.0)).powf(1.0 - 1.0 / (2.0 * big)) * big;
    let c_bs = (((0.5 * big).ln() + ln_beta(0.5, big)?) / big).exp();
    Ok((c_exact, c_bs))
}
