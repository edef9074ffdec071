//! Stitched sub-gamma boundaries: the general (η, ℓ) form, the η = 2 preset with
//! rounded constants, and its empirical-Bernstein instance.

use std::f64::consts::{E, PI, SQRT_2};

use super::line_crossing::check_rho_identity;
use super::{check_delta, gamma_view, BoundKind, BoundResult};
use crate::error::{Error, Result};
use crate::processes::ProcessState;

/// Terms scanned by the default [`StitchingFunction`] checks.
const SCAN_TERMS: usize = 10_000;

/// Rounded constants of the preset: 1.60 ≥ √(5.07/2) and 1.5 ≥ 1 + log(π²/6).
pub const PRESET_SQRT_COEF: f64 = 1.60;
pub const PRESET_OFFSET: f64 = 1.5;

/// Largest δ the preset accepts.
pub const PRESET_MAX_DELTA: f64 = 1.0 / SQRT_2;

/// Allocation ℓ of the error budget across epochs, with Σ_k 1/ℓ(k) ≤ 1.
///
/// `value` is evaluated at real arguments because the radius uses ℓ(log_η det V).
pub trait StitchingFunction: Sync {
    fn value(&self, x: f64) -> f64;

    /// sup_k ℓ(k+2)/ℓ(k+1), scanned over the first terms by default.
    fn sup_ratio(&self) -> f64 {
        (0..SCAN_TERMS)
            .map(|k| self.value(k as f64 + 2.0) / self.value(k as f64 + 1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks positivity and the partial sums of Σ 1/ℓ(k).
    fn check(&self) -> Result<()> {
        let mut total = 0.0;
        for k in 0..SCAN_TERMS {
            let v = self.value(k as f64);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("stitching function must be positive, got l({k}) = {v}")));
            }
            total += 1.0 / v;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::domain(format!("stitching weights sum to more than 1 (partial sum {total})")));
        }
        Ok(())
    }
}

/// ℓ(k) = (k+1)² π²/6.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZetaStitching;

impl StitchingFunction for ZetaStitching {
    fn value(&self, x: f64) -> f64 {
        (x + 1.0).powi(2) * PI * PI / 6.0
    }

    fn sup_ratio(&self) -> f64 {
        // (k+3)²/(k+2)² is decreasing in k, so the sup sits at k = 0.
        9.0 / 4.0
    }

    fn check(&self) -> Result<()> {
        Ok(())
    }
}

/// α_{δ,η} = 1 + log η / (1 + log(1/δ) − log(η)/2) + sup_k ℓ(k+2)/ℓ(k+1).
pub fn stitching_alpha(delta: f64, eta: f64, ell: &dyn StitchingFunction) -> Result<f64> {
    check_delta(delta)?;
    check_eta(delta, eta)?;
    let log_eta = eta.ln();
    Ok(1.0 + log_eta / (1.0 + (-delta.ln()) - 0.5 * log_eta) + ell.sup_ratio())
}

fn check_eta(delta: f64, eta: f64) -> Result<()> {
    let cap = (E / delta).powi(2);
    if !(eta > 1.0 && eta < cap) {
        return Err(Error::domain(format!("eta = {eta} outside (1, (e/delta)^2) = (1, {cap})")));
    }
    Ok(())
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("c must be finite and > 0, got {c}")))
    }
}

/// H_c = 0 ∨ (√(1 − r) − √(r · 2/(c + √(c² + 2c)))) with r = γ_max(U0)/γ_min(V).
fn h_factor(c: f64, u0_max: f64, v_min: f64) -> f64 {
    let r = u0_max / v_min;
    if r >= 1.0 {
        return 0.0;
    }
    let h = (1.0 - r).sqrt() - (r * 2.0 / (c + (c * c + 2.0 * c).sqrt())).sqrt();
    h.max(0.0)
}

struct Shape {
    kind: BoundKind,
    sqrt_coef: f64,
    /// D as a function of the log-determinant and confidence terms.
    d_term: fn(&Inputs) -> f64,
}

struct Inputs {
    log_det_ratio: f64,
    log_det_v: f64,
    log_eta: f64,
    log_inv_delta: f64,
    ell_log: f64,
}

fn assemble(state: &ProcessState, delta: f64, c: f64, eta: f64, ell: &dyn StitchingFunction, shape: Shape) -> Result<BoundResult> {
    let (a, view) = gamma_view(state, c)?;
    let st = view.as_ref();
    let v_min = st.v().gamma_min()?;
    if v_min < 1.0 - 1e-12 {
        return Err(Error::domain(format!("stitching needs V >= I, but gamma_min(V) = {v_min}")));
    }
    let (rho, u0_max) = st.u0().eigen_extremes()?;
    let log_det_v = st.v().log_det();
    let log_eta = eta.ln();
    let epoch = (log_det_v / log_eta).max(0.0);
    let inputs = Inputs {
        log_det_ratio: st.log_det_ratio(),
        log_det_v,
        log_eta,
        log_inv_delta: -delta.ln(),
        ell_log: ell.value(epoch).ln(),
    };
    let d = (shape.d_term)(&inputs);
    let max_term = ((c + (c * c + 2.0 * rho).sqrt()) / (2.0 * rho)).max((d / 2.0).sqrt());
    let h = h_factor(c, u0_max, v_min);
    let components = vec![
        ("c", c),
        ("eta", eta),
        ("sqrt_coef", shape.sqrt_coef),
        ("D", d),
        ("max_term", max_term),
        ("H", h),
        ("rho", rho),
        ("log_det_v", inputs.log_det_v),
        ("log_det_ratio", inputs.log_det_ratio),
        ("log_inv_delta", inputs.log_inv_delta),
        ("epoch_k", epoch.floor()),
        ("envelope_sqrt_a", a.sqrt()),
    ];
    if !(h > 0.0) {
        return Ok(BoundResult::vacuous(shape.kind, components));
    }
    let radius = a.sqrt() * (c * d + shape.sqrt_coef * d.sqrt() + max_term) / h;
    Ok(BoundResult::new(shape.kind, radius, components))
}

/// General stitched sub-gamma radius for epochs of width η in log det V and weights ℓ.
///
/// Preconditions: `V ⪰ I`, `V ⪰ U0`, `1 < η < (e/δ)²`, Σ 1/ℓ(k) ≤ 1.
pub fn stitched_subgamma_radius(
    state: &ProcessState,
    delta: f64,
    c: f64,
    eta: f64,
    ell: &dyn StitchingFunction,
) -> Result<BoundResult> {
    check_delta(delta)?;
    check_c(c)?;
    check_eta(delta, eta)?;
    ell.check()?;
    let alpha = stitching_alpha(delta, eta, ell)?;
    let shape = Shape {
        kind: BoundKind::StitchedGeneral,
        sqrt_coef: (alpha / 2.0).sqrt(),
        d_term: |i| 0.5 * i.log_det_ratio + 1.0 + i.ell_log + i.log_inv_delta,
    };
    let mut r = assemble(state, delta, c, eta, ell, shape)?;
    r.components.push(("alpha_delta_eta", alpha));
    Ok(r)
}

/// η = 2, ℓ(k) = (k+1)²π²/6 with the rounded constants 1.5 and 1.60. Needs δ ≤ 1/√2 and `U0 ⪰ I`.
pub fn stitched_subgamma_simplified(state: &ProcessState, delta: f64, c: f64) -> Result<BoundResult> {
    preset(state, delta, c, BoundKind::StitchedPreset)
}

/// The preset with c = 1 on an empirical-Bernstein pair with `U0 = ρI`, ρ > 1.
pub fn empirical_bernstein_stitched(state: &ProcessState, delta: f64, rho: f64) -> Result<BoundResult> {
    check_rho_identity(state, rho)?;
    preset(state, delta, 1.0, BoundKind::EmpiricalBernsteinStitched)
}

fn preset(state: &ProcessState, delta: f64, c: f64, kind: BoundKind) -> Result<BoundResult> {
    check_delta(delta)?;
    check_c(c)?;
    if delta > PRESET_MAX_DELTA {
        return Err(Error::domain(format!("the preset needs delta <= 1/sqrt(2), got {delta}")));
    }
    let (a, _) = gamma_view(state, c)?;
    let rho = state.u0().gamma_min()? * a;
    if rho < 1.0 - 1e-12 {
        return Err(Error::domain(format!("the preset needs U0 >= I, but gamma_min(U0) = {rho}")));
    }
    let shape = Shape {
        kind,
        sqrt_coef: PRESET_SQRT_COEF,
        d_term: |i| {
            0.5 * i.log_det_ratio + PRESET_OFFSET + 2.0 * (i.log_det_v / i.log_eta + 1.0).ln() + i.log_inv_delta
        },
    };
    assemble(state, delta, c, 2.0, &ZetaStitching, shape)
}
