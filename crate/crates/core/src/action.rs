//! The radial action ∫₀^{r₀} √(E − V(r)) dr.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potentials::{eval_unchecked, turning_point, PotentialSpec};
use crate::specfun::{beta, cached_legendre};

const START_NODES: usize = 128;
const MAX_NODES: usize = 2048;
const AGREEMENT: f64 = 1e-11;

/// Closed-form action for V = sign(m)·r^m.
///
/// With M = 1/m + 1/2 this is E^M·B(1/m, 3/2)/m for m > 0 and
/// |E|^M·B(3/2, −M)/|m| for −1 ≤ m < 0.
pub fn action_closed_power(m: f64, energy: f64) -> Result<f64> {
    if !m.is_finite() || m < -1.0 || m == 0.0 {
        return Err(Error::domain(format!("closed-form action needs m in [-1, inf) without 0, got {m}")));
    }
    let big_m = 1.0 / m + 0.5;
    if m > 0.0 {
        if !(energy > 0.0) {
            return Err(Error::domain(format!("m = {m} > 0 needs E > 0, got {energy}")));
        }
        Ok(energy.powf(big_m) * beta(1.0 / m, 1.5)? / m)
    } else {
        if !(energy < 0.0) {
            return Err(Error::domain(format!("m = {m} < 0 needs E < 0, got {energy}")));
        }
        Ok((-energy).powf(big_m) * beta(1.5, -big_m)? / m.abs())
    }
}

/// Closed-form action for V = log r: e^E·√π/2.
pub fn action_closed_log(energy: f64) -> f64 {
    energy.exp() * PI.sqrt() / 2.0
}

/// Closed-form action when one exists for `v`.
pub fn action_closed(v: &PotentialSpec, energy: f64) -> Option<Result<f64>> {
    match *v {
        PotentialSpec::Power { m, .. } => Some(
            action_closed_power(m, energy).map(|a| a * v.power_coefficient().powf(-1.0 / m)),
        ),
        PotentialSpec::Coulomb => Some(action_closed_power(-1.0, energy)),
        PotentialSpec::Log => Some(if energy.is_finite() {
            Ok(action_closed_log(energy))
        } else {
            Err(Error::domain(format!("non-finite energy {energy}")))
        }),
        PotentialSpec::Anharmonic { lambda: 0.0 } => Some(action_closed_power(2.0, energy)),
        PotentialSpec::InfiniteWell => Some(if energy > 0.0 {
            Ok(energy.sqrt())
        } else {
            Err(Error::domain(format!("well energies are positive, got {energy}")))
        }),
        PotentialSpec::Anharmonic { .. } => None,
    }
}

/// The action, using the closed form when available and quadrature otherwise.
pub fn action(v: &PotentialSpec, energy: f64) -> Result<f64> {
    match action_closed(v, energy) {
        Some(result) => result,
        None => action_numeric(v, energy),
    }
}

/// Action by quadrature.
///
/// The square-root zero at r₀ is removed with r = r₀ − (r₀ − r_s)·t². For
/// potentials singular at the origin the interval is split at r_s = r₀/2 and
/// the left piece uses r = r_s·u^p, with p = 2/|m| for attractive powers and
/// p = 4 for the logarithm. Node counts double from 128 until two successive
/// results agree to 1e-11.
pub fn action_numeric(v: &PotentialSpec, energy: f64) -> Result<f64> {
    let r0 = turning_point(v, energy)?;
    let integrand = |r: f64| (energy - eval_unchecked(v, r)).max(0.0).sqrt();

    let origin_power = match *v {
        PotentialSpec::Log => Some(4.0),
        _ => v.exponent().filter(|&m| m < 0.0).map(|m| 2.0 / m.abs()),
    };
    let split = if origin_power.is_some() { 0.5 * r0 } else { 0.0 };
    let outer = r0 - split;

    let evaluate = |n: usize| -> f64 {
        let rule = cached_legendre(n);
        let right = rule.integrate_on(0.0, 1.0, |t| {
            integrand(r0 - outer * t * t) * 2.0 * outer * t
        });
        let left = match origin_power {
            Some(p) => rule.integrate_on(0.0, 1.0, |u| {
                integrand(split * u.powf(p)) * split * p * u.powf(p - 1.0)
            }),
            None => 0.0,
        };
        left + right
    };

    let mut n = START_NODES;
    let mut previous = evaluate(n);
    while n < MAX_NODES {
        n *= 2;
        let current = evaluate(n);
        if (current - previous).abs() <= AGREEMENT * current.abs() {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::numerical(format!(
        "action quadrature for `{v}` at E = {energy} did not settle within {MAX_NODES} nodes"
    )))
}
