//! Safeguarded Newton iteration for monotone increasing scalar functions.

use crate::error::{Error, Result};

pub(crate) const MAX_ITERATIONS: usize = 200;

/// Finds `x` in `[lo, hi]` with `f(x) = 0`, given `f(lo) < 0 < f(hi)` and `f`
/// increasing. Newton steps use a forward-difference slope and fall back to
/// bisection whenever they leave the bracket. Stops once a step is below
/// `x_tol`.
pub(crate) fn solve_increasing<F>(mut f: F, mut lo: f64, mut hi: f64, start: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    let mut history = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let fx = f(x)?;
        history.push(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let h = 1e-7 * x.abs().max(1.0);
        let slope = (f(x + h)? - fx) / h;
        let newton = x - fx / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= x_tol || hi - lo <= x_tol {
            return Ok(next);
        }
        x = next;
    }
    let tail: Vec<String> = history.iter().rev().take(4).map(|v| format!("{v:.6e}")).collect();
    Err(Error::numerical(format!(
        "root search did not converge in {MAX_ITERATIONS} iterations; bracket [{lo:.6e}, {hi:.6e}], last iterates {}",
        tail.join(", ")
    )))
}

/// Expands `[lo, hi]` around `start` by repeatedly stepping `step(x, k)` until
/// `f` changes sign. Returns the bracket as `(lo, hi)`.
pub(crate) fn bracket_increasing<F>(mut f: F, start: f64, mut down: impl FnMut(f64) -> f64, mut up: impl FnMut(f64) -> f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f0 = f(start)?;
    if f0 == 0.0 {
        return Ok((start, start));
    }
    let mut inner = start;
    for _ in 0..MAX_ITERATIONS {
        let outer = if f0 < 0.0 { up(inner) } else { down(inner) };
        let fo = f(outer)?;
        if (f0 < 0.0) == (fo > 0.0) || fo == 0.0 {
            return Ok(if f0 < 0.0 { (inner, outer) } else { (outer, inner) });
        }
        inner = outer;
    }
    Err(Error::numerical(format!("failed to bracket a root starting from {start:e}")))
}
