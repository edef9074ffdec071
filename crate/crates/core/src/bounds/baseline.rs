//! Condition-number baseline for sub-ψ_{G,c} pairs, used for comparison only.

use serde::{Deserialize, Serialize};

use super::{check_delta, gamma_view, BoundKind, BoundResult};
use crate::error::{Error, Result};
use crate::processes::ProcessState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitehouseParams {
    pub c: f64,
    /// Lower bound ρ with `V ⪰ ρI`; defaults to γ_min(U0).
    #[serde(default)]
    pub rho: Option<f64>,
    /// The constants A and B inside M1 have no default and must be supplied.
    pub a: f64,
    pub b: f64,
    #[serde(default = "two")]
    pub beta: f64,
    #[serde(default = "two")]
    pub eta2: f64,
    #[serde(default = "half")]
    pub eps: f64,
}

fn two() -> f64 {
    2.0
}

fn half() -> f64 {
    0.5
}

impl WhitehouseParams {
    /// β = 2, η₂ = 2, ε = 1/2 and ρ = γ_min(U0).
    pub fn new(c: f64, a: f64, b: f64) -> Self {
        WhitehouseParams { c, rho: None, a, b, beta: 2.0, eta2: 2.0, eps: 0.5 }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        positive("c", self.c)?;
        positive("A", self.a)?;
        positive("B", self.b)?;
        if let Some(rho) = self.rho {
            positive("rho", rho)?;
        }
        if !(self.beta > 1.0) || !(self.eta2 > 1.0) {
            return Err(Error::domain(format!("beta and eta2 must exceed 1, got {} and {}", self.beta, self.eta2)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::domain(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        Ok(())
    }
}

/// (1/(1−ε))√(4M) + (cη₂/√γ_min(V))·M with M = M1 + M2 + M3.
pub fn whitehouse_baseline(state: &ProcessState, delta: f64, params: &WhitehouseParams) -> Result<BoundResult> {
    check_delta(delta)?;
    params.validate()?;
    let (scale, view) = gamma_view(state, params.c)?;
    let st = view.as_ref();
    let rho = match params.rho {
        Some(r) => r * scale,
        None => st.u0().gamma_min()?,
    };
    let (v_min, v_max) = st.v().eigen_extremes()?;
    if v_min < rho * (1.0 - 1e-12) {
        return Err(Error::domain(format!("needs V >= rho I, but gamma_min(V) = {v_min} < rho = {rho}")));
    }
    if !(v_max > rho) {
        return Err(Error::domain(format!(
            "needs gamma_max(V) > rho for the iterated logarithm, got {v_max} <= {rho}"
        )));
    }
    let kappa = st.v().kappa()?;
    let d = st.dim() as f64;
    let m1 = params.b * (params.a * ((v_max / rho).ln() / params.eta2.ln())).ln();
    let m2 = (1.0 / (delta * (1.0 - 1.0 / params.beta))).ln();
    let m3 = (d + 1.0) * (params.beta * kappa.sqrt() / params.eps).ln();
    let m = m1 + m2 + m3;
    let components = vec![
        ("M1", m1),
        ("M2", m2),
        ("M3", m3),
        ("M", m),
        ("eps", params.eps),
        ("c", params.c),
        ("eta2", params.eta2),
        ("gamma_min_v", v_min),
        ("kappa", kappa),
        ("envelope_sqrt_a", scale.sqrt()),
    ];
    if !(m >= 0.0) {
        return Ok(BoundResult::vacuous(BoundKind::Whitehouse, components));
    }
    let radius = (4.0 * m).sqrt() / (1.0 - params.eps) + params.c * params.eta2 / v_min.sqrt() * m;
    Ok(BoundResult::new(BoundKind::Whitehouse, scale.sqrt() * radius, components))
}
