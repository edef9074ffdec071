//! Conjugate-rate radii, stated up to a caller-supplied constant.

use std::f64::consts::E;

use super::{check_delta, BoundKind, BoundResult};
use crate::error::{Error, Result};
use crate::processes::ProcessState;
use crate::psi::PsiSpec;

/// Step of the central difference used for φ' = ((ψ*)^{-1})'.
pub const PHI_PRIME_STEP: f64 = 1e-6;

/// (log det V + log log max(‖S‖, e) + log(1/δ)) / √(1 − 1/γ_min(V)); `loglog` is passed precomputed.
pub fn conjugate_rate_argument(log_det_v: f64, loglog: f64, log_inv_delta: f64, gamma_min_v: f64) -> Result<f64> {
    if !(gamma_min_v > 1.0) {
        return Err(Error::domain(format!("needs gamma_min(V) > 1, got {gamma_min_v}")));
    }
    Ok((log_det_v + loglog + log_inv_delta) / (1.0 - 1.0 / gamma_min_v).sqrt())
}

fn check_psi(state: &ProcessState, constant: f64) -> Result<()> {
    let psi = state.psi();
    if !psi.lambda_max().is_finite() {
        return Err(Error::domain(format!("{} has lambda_max = inf; the conjugate rate needs it finite", psi.label())));
    }
    if !psi.is_super_gaussian() || !psi.has_nonneg_third_derivative() {
        return Err(Error::domain(format!("{} must be super-Gaussian with psi''' >= 0", psi.label())));
    }
    let floor = state.u0().gamma_min()?;
    if !(1.0 / floor < psi.sup_value()) {
        return Err(Error::domain(format!(
            "needs 1/gamma_min(U0) < psi(lambda_max), got 1/{floor} vs {}",
            psi.sup_value()
        )));
    }
    if !(constant > 0.0) || !constant.is_finite() {
        return Err(Error::domain(format!("constant must be finite and > 0, got {constant}")));
    }
    Ok(())
}

/// Self-referential form, evaluated at the observed ‖S‖_{V^{-1}}.
pub fn conjugate_rate_radius(state: &ProcessState, delta: f64, constant: f64) -> Result<BoundResult> {
    check_delta(delta)?;
    check_psi(state, constant)?;
    let norm = state.self_norm()?;
    let loglog = norm.max(E).ln().ln();
    finish(state, delta, constant, loglog, 1.0, BoundKind::ConjugateRate)
}

/// φ'(log 1/δ) by central difference (one-sided when log 1/δ is below the step).
fn phi_prime(psi: &PsiSpec, y: f64) -> Result<f64> {
    let h = PHI_PRIME_STEP;
    if y > h {
        Ok((psi.conjugate_inverse(y + h)? - psi.conjugate_inverse(y - h)?) / (2.0 * h))
    } else {
        Ok((psi.conjugate_inverse(y + h)? - psi.conjugate_inverse(y)?) / h)
    }
}

/// √(1−1/ρ) / (√(1−1/ρ) − φ'(log 1/δ)); fails when φ'(log 1/δ) ≥ √(1−1/ρ).
pub fn corollary_prefactor(psi: &PsiSpec, delta: f64, rho: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(rho > 1.0) {
        return Err(Error::domain(format!("needs rho = gamma_min(U0) > 1, got {rho}")));
    }
    let s = (1.0 - 1.0 / rho).sqrt();
    let slope = phi_prime(psi, -delta.ln())?;
    if !(slope < s) {
        return Err(Error::domain(format!(
            "phi'(log 1/delta) = {slope} must be below sqrt(1 - 1/rho) = {s}"
        )));
    }
    Ok(s / (s - slope))
}

/// Self-reference removed at the price of [`corollary_prefactor`].
pub fn conjugate_rate_corollary(state: &ProcessState, delta: f64, constant: f64) -> Result<BoundResult> {
    check_delta(delta)?;
    check_psi(state, constant)?;
    let prefactor = corollary_prefactor(state.psi(), delta, state.u0().gamma_min()?)?;
    finish(state, delta, constant, 0.0, prefactor, BoundKind::ConjugateRateCorollary)
}

fn finish(
    state: &ProcessState,
    delta: f64,
    constant: f64,
    loglog: f64,
    prefactor: f64,
    kind: BoundKind,
) -> Result<BoundResult> {
    let gamma_min_v = state.v().gamma_min()?;
    let log_det_v = state.v().log_det();
    let log_inv_delta = -delta.ln();
    let mut components = vec![
        ("constant", constant),
        ("prefactor", prefactor),
        ("log_det_v", log_det_v),
        ("loglog", loglog),
        ("log_inv_delta", log_inv_delta),
        ("gamma_min_v", gamma_min_v),
    ];
    if !(gamma_min_v > 1.0) {
        return Ok(BoundResult::vacuous(kind, components));
    }
    let argument = conjugate_rate_argument(log_det_v, loglog, log_inv_delta, gamma_min_v)?;
    if argument < 0.0 {
        return Err(Error::domain(format!("conjugate argument {argument} is negative")));
    }
    let term = state.psi().conjugate_inverse(argument)?;
    components.push(("argument", argument));
    components.push(("conjugate_term", term));
    Ok(BoundResult::new(kind, constant * prefactor * term, components))
}
