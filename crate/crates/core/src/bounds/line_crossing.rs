//! Fixed-λ line-crossing radii and their Bennett, Bernstein and empirical-Bernstein instances.

use super::{check_delta, g_factor, BoundKind, BoundResult};
use crate::error::{Error, Result};
use crate::matstats::{rayleigh_max, SymPosDef};
use crate::processes::ProcessState;
use crate::psi::PsiSpec;

const LAMBDA_REL_TOL: f64 = 1e-12;

/// ψ^{-1}(1/γ_min(U0)), the smallest admissible λ.
pub fn lambda_lower_bound(psi: &PsiSpec, u0: &SymPosDef) -> Result<f64> {
    psi.inverse(1.0 / u0.gamma_min()?)
}

/// Line-crossing radius using the state's own ψ tag.
pub fn line_crossing_radius(state: &ProcessState, delta: f64, lambda: f64) -> Result<BoundResult> {
    evaluate(state, state.psi(), delta, lambda, BoundKind::LineCrossing)
}

/// Line-crossing radius for an explicit ψ that dominates the state's tag.
pub fn line_crossing_radius_for(state: &ProcessState, psi: &PsiSpec, delta: f64, lambda: f64) -> Result<BoundResult> {
    evaluate(state, psi, delta, lambda, BoundKind::LineCrossing)
}

/// Self-normalized Bennett radius: the line-crossing radius with ψ = ψ_{P,b}.
pub fn bennett_radius(state: &ProcessState, delta: f64, lambda: f64, b: f64) -> Result<BoundResult> {
    evaluate(state, &PsiSpec::poisson(b)?, delta, lambda, BoundKind::Bennett)
}

/// Self-normalized Bernstein radius: the line-crossing radius with ψ = ψ_{G,c}.
pub fn bernstein_radius(state: &ProcessState, delta: f64, lambda: f64, c: f64) -> Result<BoundResult> {
    evaluate(state, &PsiSpec::gamma(c)?, delta, lambda, BoundKind::Bernstein)
}

/// Empirical-Bernstein radius: ψ = ψ_{E,1} with `U0 = ρI`, ρ > 1, λ ∈ [ψ_{E,1}^{-1}(1/ρ), 1).
pub fn empirical_bernstein_radius(state: &ProcessState, delta: f64, lambda: f64, rho: f64) -> Result<BoundResult> {
    check_rho_identity(state, rho)?;
    evaluate(state, &PsiSpec::neg_exp(1.0)?, delta, lambda, BoundKind::EmpiricalBernstein)
}

pub(crate) fn check_rho_identity(state: &ProcessState, rho: f64) -> Result<()> {
    if !(rho > 1.0) || !rho.is_finite() {
        return Err(Error::domain(format!("rho must be finite and > 1, got {rho}")));
    }
    let (lo, hi) = state.u0().eigen_extremes()?;
    if (lo - rho).abs() > 1e-12 * rho || (hi - rho).abs() > 1e-12 * rho {
        return Err(Error::domain(format!(
            "U0 must equal rho I with rho = {rho}, but its spectrum spans [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn evaluate(state: &ProcessState, psi: &PsiSpec, delta: f64, lambda: f64, kind: BoundKind) -> Result<BoundResult> {
    check_delta(delta)?;
    if !psi.is_super_gaussian() {
        return Err(Error::domain(format!("{} is not super-Gaussian", psi.label())));
    }
    if !state.psi().dominated_by(psi) {
        return Err(Error::domain(format!(
            "a sub-{} process is not known to be sub-{}",
            state.psi().label(),
            psi.label()
        )));
    }
    let lower = lambda_lower_bound(psi, state.u0())?;
    let upper = psi.lambda_max();
    if !(lambda >= lower * (1.0 - LAMBDA_REL_TOL)) || !(lambda < upper) {
        return Err(Error::domain(format!(
            "lambda = {lambda} outside the admissible interval [{lower}, {upper}) for {}",
            psi.label()
        )));
    }
    let u0_norm = state.u0().op_norm()?;
    let sqrt_u0_norm = u0_norm.sqrt();
    let alpha = rayleigh_max(state.u0(), state.v())?;
    let g = g_factor(psi, alpha.min(1.0), lambda)?;
    let psi_lambda = psi.eval(lambda)?;
    let log_det_ratio = state.log_det_ratio();
    let log_inv_delta = -delta.ln();
    let d_term = 0.5 * log_det_ratio + 1.0 + log_inv_delta;
    let components = vec![
        ("lambda", lambda),
        ("alpha", alpha),
        ("g", g),
        ("psi_lambda", psi_lambda),
        ("sqrt_u0_norm", sqrt_u0_norm),
        ("log_det_ratio", log_det_ratio),
        ("log_inv_delta", log_inv_delta),
        ("D", d_term),
    ];
    if !(g > 0.0) {
        return Ok(BoundResult::vacuous(kind, components));
    }
    let radius = sqrt_u0_norm / (lambda * g) * d_term + g * psi_lambda / (lambda * sqrt_u0_norm);
    Ok(BoundResult::new(kind, radius, components))
}
