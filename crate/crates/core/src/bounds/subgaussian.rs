use super::{check_delta, BoundKind, BoundResult};
use crate::error::{Error, Result};
use crate::processes::ProcessState;
use crate::psi::Family;

/// Squared radius for ‖S‖²_{V^{-1}} of a sub-Gaussian pair: log(det V / det U0) + 2 log(1/δ).
///
/// The state's `V` already contains `U0`, so it plays the role of `V + U0` here.
pub fn subgaussian_radius_sq(state: &ProcessState, delta: f64) -> Result<BoundResult> {
    check_delta(delta)?;
    if state.psi().family() != Family::Normal {
        return Err(Error::domain(format!(
            "the log-det bound needs a sub-Gaussian pair, got sub-{}",
            state.psi().label()
        )));
    }
    let log_det_ratio = state.log_det_ratio();
    let log_inv_delta = -delta.ln();
    Ok(BoundResult::new(
        BoundKind::SubGaussian,
        log_det_ratio + 2.0 * log_inv_delta,
        vec![("log_det_ratio", log_det_ratio), ("log_inv_delta", log_inv_delta)],
    ))
}
