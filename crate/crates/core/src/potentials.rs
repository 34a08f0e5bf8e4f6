//! Radial potentials and their classical turning points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest spatial dimension accepted by [`QuantumLabel`].
pub const MAX_DIM: u32 = 12;

/// A radial potential V(r).
///
/// `Power` follows V(r) = a·g^{m-2}·sign(m)·r^m, so negative exponents give
/// attractive singular potentials. m = 0 is represented by `Log`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Power { m: f64, a: f64, g: f64 },
    Coulomb,
    Log,
    Anharmonic { lambda: f64 },
    InfiniteWell,
}

impl PotentialSpec {
    /// V(r) = sign(m)·r^m.
    pub fn power(m: f64) -> Result<Self> {
        Self::power_scaled(m, 1.0, 1.0)
    }

    pub fn power_scaled(m: f64, a: f64, g: f64) -> Result<Self> {
        if !m.is_finite() || m < -1.0 {
            return Err(Error::domain(format!("power exponent must satisfy m >= -1, got {m}")));
        }
        if m == 0.0 {
            return Err(Error::domain("power exponent m = 0 is the logarithmic potential; use `log`"));
        }
        if !(a > 0.0 && g > 0.0) || !a.is_finite() || !g.is_finite() {
            return Err(Error::domain(format!("power requires a > 0 and g > 0, got a = {a}, g = {g}")));
        }
        Ok(PotentialSpec::Power { m, a, g })
    }

    /// V(r) = r² + λr⁴.
    pub fn anharmonic(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("anharmonic coupling must be >= 0, got {lambda}")));
        }
        Ok(PotentialSpec::Anharmonic { lambda })
    }

    /// Power-law exponent when the potential is a pure power (Coulomb counts as m = -1).
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            PotentialSpec::Power { m, .. } => Some(m),
            PotentialSpec::Coulomb => Some(-1.0),
            _ => None,
        }
    }

    /// Bound states sit at negative energies (Coulomb and m < 0 powers).
    pub fn has_negative_spectrum(&self) -> bool {
        matches!(self.exponent(), Some(m) if m < 0.0)
    }

    /// Whether `energy` lies in the classically allowed range of bound states.
    pub fn energy_allowed(&self, energy: f64) -> bool {
        if !energy.is_finite() {
            return false;
        }
        match self {
            PotentialSpec::Log => true,
            _ if self.has_negative_spectrum() => energy < 0.0,
            _ => energy > 0.0,
        }
    }

    /// Coefficient c in V(r) = ±c·r^m for pure powers.
    pub(crate) fn power_coefficient(&self) -> f64 {
        match *self {
            PotentialSpec::Power { m, a, g } => a * g.powf(m - 2.0),
            _ => 1.0,
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PotentialSpec::Power { m, a, g } => {
                write!(f, "power:m={m}")?;
                if a != 1.0 {
                    write!(f, ",a={a}")?;
                }
                if g != 1.0 {
                    write!(f, ",g={g}")?;
                }
                Ok(())
            }
            PotentialSpec::Coulomb => f.write_str("coulomb"),
            PotentialSpec::Log => f.write_str("log"),
            PotentialSpec::Anharmonic { lambda } => write!(f, "anharmonic:lambda={lambda}"),
            PotentialSpec::InfiniteWell => f.write_str("well"),
        }
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    /// Parses `power:m=4`, `power:m=-0.5,a=2,g=1`, `coulomb`, `log`,
    /// `anharmonic:lambda=10` and `well`, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (kind, params) = match lower.split_once(':') {
            Some((k, p)) => (k.trim(), p.trim()),
            None => (lower.as_str(), ""),
        };
        let mut pairs = Vec::new();
        for item in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("expected key=value in potential spec, got `{item}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::usage(format!("invalid number `{}` for `{}`", value.trim(), key.trim())))?;
            pairs.push((key.trim().to_string(), value));
        }
        let take = |allowed: &[&str]| -> Result<Vec<Option<f64>>> {
            let mut out = vec![None; allowed.len()];
            for (key, value) in &pairs {
                let idx = allowed
                    .iter()
                    .position(|a| a == key)
                    .ok_or_else(|| Error::usage(format!("unknown key `{key}` for potential `{kind}`")))?;
                if out[idx].replace(*value).is_some() {
                    return Err(Error::usage(format!("duplicate key `{key}`")));
                }
            }
            Ok(out)
        };
        match kind {
            "power" => {
                let v = take(&["m", "a", "g"])?;
                let m = v[0].ok_or_else(|| Error::usage("power potential needs `m=`"))?;
                PotentialSpec::power_scaled(m, v[1].unwrap_or(1.0), v[2].unwrap_or(1.0))
            }
            "anharmonic" => {
                let v = take(&["lambda"])?;
                let lambda = v[0].ok_or_else(|| Error::usage("anharmonic potential needs `lambda=`"))?;
                PotentialSpec::anharmonic(lambda)
            }
            "coulomb" | "log" | "well" => {
                take(&[])?;
                Ok(match kind {
                    "coulomb" => PotentialSpec::Coulomb,
                    "log" => PotentialSpec::Log,
                    _ => PotentialSpec::InfiniteWell,
                })
            }
            other => Err(Error::usage(format!("unknown potential kind `{other}`"))),
        }
    }
}

/// Radial quantum number and spatial dimension of an S-state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantumLabel {
    pub n_r: u32,
    pub d: u32,
}

impl QuantumLabel {
    pub fn new(n_r: u32, d: u32) -> Result<Self> {
        check_dim(d)?;
        Ok(QuantumLabel { n_r, d })
    }

    /// n_r + d/4, the right-hand side of the quantization rule divided by π.
    pub fn shift(&self) -> f64 {
        self.n_r as f64 + self.d as f64 / 4.0
    }
}

pub(crate) fn check_dim(d: u32) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::domain(format!("dimension must lie in 1..={MAX_DIM}, got {d}")));
    }
    Ok(())
}

/// V(r) for r > 0.
pub fn evaluate(v: &PotentialSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("potential evaluated at r = {r}; need r > 0")));
    }
    if let PotentialSpec::InfiniteWell = v {
        return Err(Error::usage(
            "the infinite well has no pointwise potential here; use the closed-form well energies",
        ));
    }
    Ok(eval_unchecked(v, r))
}

/// V(r) without argument checks. The well evaluates to 0 inside r < 1.
pub(crate) fn eval_unchecked(v: &PotentialSpec, r: f64) -> f64 {
    match *v {
        PotentialSpec::Power { m, .. } => {
            let c = v.power_coefficient();
            let magnitude = if m == -1.0 {
                1.0 / r
            } else if m.fract() == 0.0 && m.abs() <= 64.0 {
                r.powi(m as i32)
            } else {
                r.powf(m)
            };
            m.signum() * c * magnitude
        }
        PotentialSpec::Coulomb => -1.0 / r,
        PotentialSpec::Log => r.ln(),
        PotentialSpec::Anharmonic { lambda } => {
            let r2 = r * r;
            r2 + lambda * r2 * r2
        }
        PotentialSpec::InfiniteWell => {
            if r < 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
    }
}

/// dV/dr, used for Newton polishing of turning points.
pub(crate) fn derivative(v: &PotentialSpec, r: f64) -> f64 {
    match *v {
        PotentialSpec::Power { m, .. } => m.signum() * v.power_coefficient() * m * r.powf(m - 1.0),
        PotentialSpec::Coulomb => 1.0 / (r * r),
        PotentialSpec::Log => 1.0 / r,
        PotentialSpec::Anharmonic { lambda } => 2.0 * r + 4.0 * lambda * r * r * r,
        PotentialSpec::InfiniteWell => 0.0,
    }
}

/// The radius r₀ > 0 where V(r₀) = E.
pub fn turning_point(v: &PotentialSpec, energy: f64) -> Result<f64> {
    if !v.energy_allowed(energy) {
        return Err(Error::domain(format!("energy {energy} is outside the bound-state range of `{v}`")));
    }
    Ok(match *v {
        PotentialSpec::Power { m, .. } => (energy.abs() / v.power_coefficient()).powf(1.0 / m),
        PotentialSpec::Coulomb => -1.0 / energy,
        PotentialSpec::Log => energy.exp(),
        PotentialSpec::InfiniteWell => 1.0,
        PotentialSpec::Anharmonic { lambda } => {
            if lambda == 0.0 {
                energy.sqrt()
            } else {
                anharmonic_turning_point(v, energy)?
            }
        }
    })
}

fn anharmonic_turning_point(v: &PotentialSpec, energy: f64) -> Result<f64> {
    // V(r) ≥ r², so r = √E + 1 already lies past the turning point
    let mut lo = 0.0_f64;
    let mut hi = 1f64.max(energy.powf(0.25)).max(energy.sqrt()) + 1.0;
    while eval_unchecked(v, hi) < energy {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-6 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if eval_unchecked(v, mid) < energy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = (eval_unchecked(v, r) - energy) / derivative(v, r);
        let next = (r - step).clamp(lo, hi);
        let done = (next - r).abs() <= 1e-15 * r;
        r = next;
        if done {
            break;
        }
    }
    let residual = (eval_unchecked(v, r) - energy).abs() / energy;
    if residual > 1e-13 {
        return Err(Error::numerical(format!(
            "turning point of `{v}` at E = {energy} did not converge (relative residual {residual:e})"
        )));
    }
    Ok(r)
}
