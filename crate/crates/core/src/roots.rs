//! Bracketed bisection and bracket expansion.
//!
//! Every root the solver needs is of a function that is monotone on the
//! bracket, so plain bisection to an absolute width is used throughout.

use crate::error::{Error, Result};

/// Absolute interval width at which bisection stops.
pub const DEFAULT_XTOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 400;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Endpoints that evaluate to exactly zero are returned as roots. Stops when
/// the bracket is narrower than `xtol` or when the midpoint stops moving in
/// floating point.
pub fn bisect<F>(what: &'static str, mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let fa = f(a)?;
    if fa == 0.0 {
        return Ok(a);
    }
    let fb = f(b)?;
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoBracket { what, lo: a, hi: b });
    }
    let a_positive = fa > 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if b - a <= xtol || mid <= a || mid >= b {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == a_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(Error::ConvergenceFailure { what, iterations: MAX_BISECTIONS })
}

/// Walks away from `anchor` with geometrically growing offsets
/// (`first_step`, `2 first_step`, ...) until `stop` holds, giving up once the
/// offset exceeds `max_offset`. A negative `first_step` walks left.
///
/// Returns the first point where `stop` is true together with the previous
/// point, which is where it was still false.
pub fn expand<F>(what: &'static str, mut stop: F, anchor: f64, first_step: f64, max_offset: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<bool>,
{
    let mut previous = anchor;
    let mut step = first_step;
    loop {
        let x = anchor + step;
        if stop(x)? {
            return Ok((x, previous));
        }
        if step.abs() >= max_offset {
            return Err(Error::NoBracket { what, lo: anchor.min(x), hi: anchor.max(x) });
        }
        previous = x;
        step *= 2.0;
    }
}
