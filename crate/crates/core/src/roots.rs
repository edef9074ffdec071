//! Bracketed bisection for strictly increasing functions with `f(0) = 0`.

use crate::error::{Error, Result};

pub(crate) const REL_TOL: f64 = 1e-12;
pub(crate) const MAX_ITER: usize = 200;

/// Shrink factor applied to a finite domain end so the upper bracket stays inside it.
pub(crate) const EDGE_SHRINK: f64 = 1e-14;

const MAX_BRACKET_STEPS: usize = 2200;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Upper {
    /// Open domain `[0, end)`; the bracket tops out at `end * (1 - EDGE_SHRINK)`.
    Finite(f64),
    Unbounded,
}

impl Upper {
    pub(crate) fn from_limit(limit: f64) -> Self {
        if limit.is_finite() {
            Upper::Finite(limit)
        } else {
            Upper::Unbounded
        }
    }

    pub(crate) fn edge(self) -> f64 {
        match self {
            Upper::Finite(end) => end * (1.0 - EDGE_SHRINK),
            Upper::Unbounded => f64::INFINITY,
        }
    }
}

/// Solves `f(x) = target` for a strictly increasing `f` on `[0, upper)` with `f(0) = 0`.
///
/// The bracket is located geometrically first (halving or doubling from a
/// starting point), so bisection always starts on an interval whose width is
/// at most its upper end. Targets at or above the supremum reached inside the
/// domain are rejected.
pub(crate) fn invert_increasing<F>(mut f: F, target: f64, upper: Upper, what: &str) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(target >= 0.0) || !target.is_finite() {
        return Err(Error::domain(format!("{what}: target {target} must be finite and >= 0")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }

    let start = match upper {
        Upper::Finite(end) => 0.5 * end,
        Upper::Unbounded => 1.0,
    };
    let (mut lo, mut hi);
    if f(start)? >= target {
        hi = start;
        lo = 0.0;
        for _ in 0..MAX_BRACKET_STEPS {
            let cand = 0.5 * hi;
            if cand == 0.0 {
                break;
            }
            if f(cand)? <= target {
                lo = cand;
                break;
            }
            hi = cand;
        }
    } else {
        lo = start;
        match upper {
            Upper::Finite(_) => {
                hi = upper.edge();
                let top = f(hi)?;
                if !(top > target) {
                    return Err(Error::domain(format!(
                        "{what}: target {target} is at or above the supremum {top} reached at {hi}"
                    )));
                }
            }
            Upper::Unbounded => {
                hi = 2.0 * lo;
                let mut found = false;
                for _ in 0..MAX_BRACKET_STEPS {
                    if !hi.is_finite() {
                        break;
                    }
                    if f(hi)? >= target {
                        found = true;
                        break;
                    }
                    lo = hi;
                    hi *= 2.0;
                }
                if !found {
                    return Err(Error::domain(format!(
                        "{what}: target {target} is not attained on [0, inf)"
                    )));
                }
            }
        }
    }

    // Stop once the bracket is relatively narrow and the residual is small too; near a pole
    // the residual lags, so keep halving until it catches up or the bracket is exhausted.
    let residual_tol = REL_TOL * target.max(1.0);
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let value = f(mid)?;
        if value.is_nan() {
            return Err(Error::Convergence(format!("{what}: NaN encountered at {mid}")));
        }
        if hi - lo <= REL_TOL * hi && (value - target).abs() <= residual_tol {
            return Ok(mid);
        }
        if value < target {
            lo = mid;
        } else if value > target {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }
    Err(Error::Convergence(format!(
        "{what}: bisection budget of {MAX_ITER} iterations exhausted on [{lo}, {hi}]"
    )))
}
