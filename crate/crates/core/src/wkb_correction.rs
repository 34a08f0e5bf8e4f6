//! The WKB correction γ: the shift that turns the B-S condition into an exact
//! quantization rule, ∫₀^{r₀} √(E − V) dr = π(n_r + d/4 + γ).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::action::action;
use crate::bs_solver::{bs_energy_log, power_energy_from_shift};
use crate::error::{Error, Result};
use crate::potentials::{check_dim, PotentialSpec, QuantumLabel};

/// γ = action(V, E)/π − n_r − d/4.
pub fn gamma_extract(v: &PotentialSpec, q: QuantumLabel, energy: f64) -> Result<f64> {
    check_dim(q.d)?;
    if !v.energy_allowed(energy) {
        return Err(Error::domain(format!("E = {energy} is outside the bound-state range of `{v}`")));
    }
    Ok(action(v, energy)? / PI - q.shift())
}

/// E = (2M·B(1/2, M)·(n_r + d/4 + γ))^{1/M} for V = r^m.
pub fn modified_bs_energy(m: f64, q: QuantumLabel, gamma: f64) -> Result<f64> {
    check_dim(q.d)?;
    power_energy_from_shift(m, q.shift() + gamma)
}

/// E = log(2√π·(n_r + d/4 + γ)) for V = log r.
pub fn modified_bs_energy_log(q: QuantumLabel, gamma: f64) -> Result<f64> {
    check_dim(q.d)?;
    let shift = q.shift() + gamma;
    if !(shift > 0.0) {
        return Err(Error::domain(format!("n_r + d/4 + gamma must be positive, got {shift}")));
    }
    if gamma == 0.0 {
        return Ok(bs_energy_log(q));
    }
    Ok((2.0 * PI.sqrt() * shift).ln())
}

/// Normalization fixing the scale freedom P/√Q = (cP)/√(c²Q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitGauge {
    /// Q(0) = 1.
    #[default]
    #[serde(rename = "q0")]
    UnitConstant,
    /// Leading coefficient of Q equal to 1.
    Monic,
}

impl fmt::Display for FitGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitGauge::UnitConstant => "q0",
            FitGauge::Monic => "monic",
        })
    }
}

impl FromStr for FitGauge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "q0" | "unit" | "unit_constant" => Ok(FitGauge::UnitConstant),
            "monic" => Ok(FitGauge::Monic),
            other => Err(Error::usage(format!("unknown gauge `{other}` (expected q0 or monic)"))),
        }
    }
}

/// γ_fit(n) = P_k(n)/√Q_{2k+2}(n), coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaFit {
    pub k: usize,
    pub p_coeffs: Vec<f64>,
    pub q_coeffs: Vec<f64>,
    pub rms_residual: f64,
    /// Smallest and largest n_r fitted.
    pub domain: (f64, f64),
    pub gauge: FitGauge,
}

impl GammaFit {
    /// Flat (key, value) pairs: k, gauge, p0..pk, q0..q_{2k+2}, rms, domain bounds.
    pub fn record(&self) -> Vec<(String, String)> {
        let mut out = vec![("k".to_string(), self.k.to_string()), ("gauge".to_string(), self.gauge.to_string())];
        out.extend(self.p_coeffs.iter().enumerate().map(|(i, c)| (format!("p{i}"), format!("{c:e}"))));
        out.extend(self.q_coeffs.iter().enumerate().map(|(i, c)| (format!("q{i}"), format!("{c:e}"))));
        out.push(("rms".to_string(), format!("{:e}", self.rms_residual)));
        out.push(("domain_min".to_string(), self.domain.0.to_string()));
        out.push(("domain_max".to_string(), self.domain.1.to_string()));
        out
    }
}

impl Serialize for GammaFit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.p_coeffs.len() + self.q_coeffs.len() + 5))?;
        map.serialize_entry("k", &self.k)?;
        map.serialize_entry("gauge", &self.gauge)?;
        for (i, c) in self.p_coeffs.iter().enumerate() {
            map.serialize_entry(&format!("p{i}"), c)?;
        }
        for (i, c) in self.q_coeffs.iter().enumerate() {
            map.serialize_entry(&format!("q{i}"), c)?;
        }
        map.serialize_entry("rms", &self.rms_residual)?;
        map.serialize_entry("domain_min", &self.domain.0)?;
        map.serialize_entry("domain_max", &self.domain.1)?;
        map.end()
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// P(n_r)/√Q(n_r).
pub fn gamma_fit_eval(fit: &GammaFit, n_r: f64) -> Result<f64> {
    if !(n_r >= 0.0) {
        return Err(Error::domain(format!("n_r must be >= 0, got {n_r}")));
    }
    let q = horner(&fit.q_coeffs, n_r);
    if !(q > 0.0) {
        return Err(Error::domain(format!("fit denominator Q({n_r}) = {q} is not positive")));
    }
    Ok(horner(&fit.p_coeffs, n_r) / q.sqrt())
}

const MAX_FIT_ITERATIONS: usize = 5000;
// a fit reproducing the data to this relative rms is treated as exact
const FIT_RMS_TARGET: f64 = 1e-8;
const STALL_WINDOW: usize = 100;
// denominator parameters, numerator, cost, cost history
type Descent = (DVector<f64>, DVector<f64>, f64, Vec<f64>);

const START_SLOPES: [f64; 4] = [1.0, 4.0, 0.25, 16.0];

/// Nonlinear least-squares fit of γ(n_r) by P_k/√Q_{2k+2}.
///
/// Works in x = n_r/n_max with Q(0) = 1. For fixed Q the best P is a linear
/// least-squares solve, so Levenberg-Marquardt runs over the Q coefficients
/// only (variable projection), restarted from Q = (1 + c·x)^{2k+2} for a few
/// slopes c. Steps that
/// make Q non-positive on the fitted points or on a uniform grid spanning the
/// domain are rejected.
pub fn fit_gamma(points: &[(f64, f64)], k: usize, gauge: FitGauge) -> Result<GammaFit> {
    if k == 0 {
        return Err(Error::domain("fit order k must be >= 1"));
    }
    let needed = (2 * k + 4).max(3 * k + 3);
    if points.len() < needed {
        return Err(Error::domain(format!(
            "order k = {k} needs at least {needed} points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(n, g)| !(n >= 0.0) || !n.is_finite() || !g.is_finite()) {
        return Err(Error::domain("fit points need finite n_r >= 0 and finite gamma"));
    }
    let mut sorted: Vec<f64> = points.iter().map(|p| p.0).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("fit points must have distinct n_r"));
    }
    let domain = (sorted[0], *sorted.last().expect("non-empty"));
    let scale = domain.1.max(1.0);
    let xs: Vec<f64> = points.iter().map(|p| p.0 / scale).collect();
    let ys = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let guard: Vec<f64> = xs
        .iter()
        .copied()
        .chain((0..=200).map(|i| (domain.0 + (domain.1 - domain.0) * i as f64 / 200.0) / scale))
        .collect();
    let np = k + 1;
    let nq = 2 * k + 2;
    let monic = gauge == FitGauge::Monic;

    let full_q = |phi: &DVector<f64>| -> Vec<f64> { std::iter::once(1.0).chain(phi.iter().copied()).collect() };
    // best P for the denominator given by φ, and the residual it leaves
    let project = |phi: &DVector<f64>| -> Option<(DVector<f64>, DVector<f64>)> {
        let q = full_q(phi);
        if guard.iter().any(|&x| !(horner(&q, x) > 0.0)) {
            return None;
        }
        let design = DMatrix::from_fn(xs.len(), np, |i, j| xs[i].powi(j as i32) / horner(&q, xs[i]).sqrt());
        let svd = design.clone().svd(true, true);
        if !(svd.singular_values.min() > 1e-13 * svd.singular_values.max()) {
            return None;
        }
        let p = svd.solve(&ys, 0.0).ok()?;
        let r = &ys - design * &p;
        Some((p, r))
    };

    let data_scale = ys.norm_squared();
    let floor = FIT_RMS_TARGET * FIT_RMS_TARGET * data_scale;

    // Levenberg-Marquardt from one starting denominator
    let descend = |mut phi: DVector<f64>| -> Result<Descent> {
        let (mut p, mut r) = project(&phi).ok_or_else(|| Error::Fit {
            reason: "rank-deficient initial design".into(),
            trace: vec![],
        })?;
        let mut cost = r.norm_squared();
        let mut trace = vec![cost];
        let mut lambda = 1e-3;
        let mut converged = cost <= floor || data_scale == 0.0;
        let mut iterations = 0;
        let mut tiny_gains = 0;
        while !converged {
            iterations += 1;
            if iterations > MAX_FIT_ITERATIONS {
                return Err(Error::Fit {
                    reason: format!("no convergence in {MAX_FIT_ITERATIONS} iterations"),
                    trace,
                });
            }
            // central differences of the projected residual
            let mut jac = DMatrix::zeros(xs.len(), nq);
            for j in 0..nq {
                let h = 1e-6 * phi[j].abs().max(1e-3);
                let mut plus = phi.clone();
                plus[j] += h;
                let mut minus = phi.clone();
                minus[j] -= h;
                let column = match (project(&plus), project(&minus)) {
                    (Some((_, rp)), Some((_, rm))) => (rp - rm) / (2.0 * h),
                    (Some((_, rp)), None) => (rp - &r) / h,
                    (None, Some((_, rm))) => (&r - rm) / h,
                    (None, None) => DVector::zeros(xs.len()),
                };
                jac.set_column(j, &column);
            }
            let jtj = jac.transpose() * &jac;
            let grad = jac.transpose() * &r;
            let mut accepted = false;
            while lambda < 1e16 {
                let mut a = jtj.clone();
                for i in 0..nq {
                    a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
                }
                let Some(ch) = a.cholesky() else {
                    lambda *= 10.0;
                    continue;
                };
                let step = ch.solve(&(-&grad));
                let candidate = &phi + &step;
                if let Some((pc, rc)) = project(&candidate) {
                    let c = rc.norm_squared();
                    if c.is_finite() && c < cost {
                        let gain = cost - c;
                        phi = candidate;
                        p = pc;
                        r = rc;
                        cost = c;
                        trace.push(cost);
                        lambda = (lambda / 3.0).max(1e-15);
                        accepted = true;
                        // a flat valley: 100 steps shaved off less than 10%
                        let stalled = trace.len() > STALL_WINDOW && cost > 0.9 * trace[trace.len() - 1 - STALL_WINDOW];
                        // one heavily damped step can gain little far from the minimum
                        tiny_gains = if gain <= 1e-10 * cost { tiny_gains + 1 } else { 0 };
                        converged = stalled
                            || tiny_gains >= 5
                            || step.norm() <= 1e-12 * (phi.norm() + 1e-12)
                            || cost <= floor;
                        break;
                    }
                }
                lambda *= 10.0;
            }
            if !accepted {
                // no descent left at any damping: stationary
                converged = true;
            }
        }
        Ok((phi, p, cost, trace))
    };

    // Q = (1 + c·x)^{2k+2} for a spread of c; the best local minimum wins
    let binom = |n: usize, r: usize| (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    let mut best: Option<Descent> = None;
    let mut last_error = None;
    for c in START_SLOPES {
        let start = DVector::from_iterator(nq, (1..=nq).map(|i| binom(nq, i) * c.powi(i as i32)));
        match descend(start) {
            Ok(found) => {
                if best.as_ref().is_none_or(|b| found.2 < b.2) {
                    best = Some(found);
                }
            }
            Err(e) => last_error = Some(e),
        }
        if best.as_ref().is_some_and(|b| b.2 <= floor) {
            break;
        }
    }
    let Some((phi, p, cost, trace)) = best else {
        return Err(last_error.expect("at least one start"));
    };

    let q_scaled = full_q(&phi);
    let mut p: Vec<f64> = p.iter().enumerate().map(|(i, c)| c / scale.powi(i as i32)).collect();
    let mut q: Vec<f64> = q_scaled.iter().enumerate().map(|(i, c)| c / scale.powi(i as i32)).collect();
    if monic {
        let lead = q[nq];
        if !(lead > 0.0) {
            return Err(Error::Fit {
                reason: format!("leading denominator coefficient {lead:e} is not positive, so no monic form exists"),
                trace,
            });
        }
        q.iter_mut().for_each(|c| *c /= lead);
        p.iter_mut().for_each(|c| *c /= lead.sqrt());
    }
    let rms_residual = (cost / xs.len() as f64).sqrt();
    let fit = GammaFit {
        k,
        p_coeffs: p,
        q_coeffs: q,
        rms_residual,
        domain,
        gauge,
    };
    for &x in &guard {
        gamma_fit_eval(&fit, x * scale).map_err(|e| Error::Fit {
            reason: format!("fitted denominator fails the positivity check: {e}"),
            trace: trace.clone(),
        })?;
    }
    Ok(fit)
}
