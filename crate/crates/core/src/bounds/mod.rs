//! Confidence radii for ‖S_τ‖_{V_τ^{-1}} with a component breakdown.
//!
//! Every evaluator is a pure function of a [`ProcessState`] and returns a
//! [`BoundResult`]. Guards that make a bound vacuous (a vanishing `g` or `H`,
//! a non-positive denominator) produce `valid = false` with an infinite radius
//! instead of an error, so figure code can leave gaps.

mod baseline;
mod conjugate;
mod line_crossing;
mod stitched;
mod subgaussian;

pub use baseline::{whitehouse_baseline, WhitehouseParams};
pub use conjugate::{conjugate_rate_argument, conjugate_rate_corollary, conjugate_rate_radius, corollary_prefactor};
pub use line_crossing::{
    bennett_radius, bernstein_radius, empirical_bernstein_radius, lambda_lower_bound, line_crossing_radius,
    line_crossing_radius_for,
};
pub use stitched::{
    empirical_bernstein_stitched, stitched_subgamma_radius, stitched_subgamma_simplified, stitching_alpha,
    StitchingFunction, ZetaStitching,
};
pub use subgaussian::subgaussian_radius_sq;

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::ProcessState;
use crate::psi::PsiSpec;

/// α within this distance of 0 or 1 is snapped onto the interval.
pub(crate) const ALPHA_SNAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Squared radius for sub-Gaussian pairs (log-det form).
    SubGaussian,
    LineCrossing,
    Bennett,
    Bernstein,
    EmpiricalBernstein,
    /// Sub-gamma stitching with free η and ℓ.
    StitchedGeneral,
    /// Sub-gamma stitching with η = 2, ℓ(k) = (k+1)²π²/6 and rounded constants.
    StitchedPreset,
    EmpiricalBernsteinStitched,
    ConjugateRate,
    ConjugateRateCorollary,
    Whitehouse,
}

impl BoundKind {
    pub const ALL: [BoundKind; 11] = [
        BoundKind::SubGaussian,
        BoundKind::LineCrossing,
        BoundKind::Bennett,
        BoundKind::Bernstein,
        BoundKind::EmpiricalBernstein,
        BoundKind::StitchedGeneral,
        BoundKind::StitchedPreset,
        BoundKind::EmpiricalBernsteinStitched,
        BoundKind::ConjugateRate,
        BoundKind::ConjugateRateCorollary,
        BoundKind::Whitehouse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::SubGaussian => "sub_gaussian",
            BoundKind::LineCrossing => "line_crossing",
            BoundKind::Bennett => "bennett",
            BoundKind::Bernstein => "bernstein",
            BoundKind::EmpiricalBernstein => "empirical_bernstein",
            BoundKind::StitchedGeneral => "stitched_general",
            BoundKind::StitchedPreset => "stitched_preset",
            BoundKind::EmpiricalBernsteinStitched => "empirical_bernstein_stitched",
            BoundKind::ConjugateRate => "conjugate_rate",
            BoundKind::ConjugateRateCorollary => "conjugate_rate_corollary",
            BoundKind::Whitehouse => "whitehouse",
        }
    }

    /// Whether the radius bounds the squared norm rather than the norm.
    pub fn is_squared(self) -> bool {
        self == BoundKind::SubGaussian
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A radius with its ordered component breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub kind: BoundKind,
    /// Bound on ‖S‖_{V^{-1}} (on its square for [`BoundKind::SubGaussian`]).
    pub radius: f64,
    pub valid: bool,
    pub components: Vec<(&'static str, f64)>,
}

impl BoundResult {
    pub(crate) fn new(kind: BoundKind, radius: f64, components: Vec<(&'static str, f64)>) -> Self {
        if radius.is_finite() && radius >= 0.0 {
            BoundResult { kind, radius, valid: true, components }
        } else {
            BoundResult { kind, radius: f64::INFINITY, valid: false, components }
        }
    }

    pub(crate) fn vacuous(kind: BoundKind, components: Vec<(&'static str, f64)>) -> Self {
        BoundResult { kind, radius: f64::INFINITY, valid: false, components }
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    fn need(&self, name: &str) -> f64 {
        self.component(name).unwrap_or(f64::NAN)
    }

    /// Threshold on ‖S‖_{V^{-1}} itself (square root for the squared form).
    pub fn norm_threshold(&self) -> f64 {
        if self.kind.is_squared() {
            self.radius.sqrt()
        } else {
            self.radius
        }
    }

    /// Whether an observed ‖S‖_{V^{-1}} exceeds the bound.
    pub fn is_violated_by(&self, self_norm: f64) -> bool {
        self.valid && self_norm > self.norm_threshold()
    }

    /// Recomputes the radius from the recorded components alone.
    pub fn reassemble(&self) -> f64 {
        if !self.valid {
            return f64::INFINITY;
        }
        let c = |n| self.need(n);
        match self.kind {
            BoundKind::SubGaussian => c("log_det_ratio") + 2.0 * c("log_inv_delta"),
            BoundKind::LineCrossing | BoundKind::Bennett | BoundKind::Bernstein | BoundKind::EmpiricalBernstein => {
                let (s, lambda, g) = (c("sqrt_u0_norm"), c("lambda"), c("g"));
                s / (lambda * g) * c("D") + g * c("psi_lambda") / (lambda * s)
            }
            BoundKind::StitchedGeneral | BoundKind::StitchedPreset | BoundKind::EmpiricalBernsteinStitched => {
                let d = c("D");
                c("envelope_sqrt_a") * (c("c") * d + c("sqrt_coef") * d.sqrt() + c("max_term")) / c("H")
            }
            BoundKind::ConjugateRate | BoundKind::ConjugateRateCorollary => {
                c("constant") * c("prefactor") * c("conjugate_term")
            }
            BoundKind::Whitehouse => {
                let m = c("M");
                c("envelope_sqrt_a")
                    * ((4.0 * m).sqrt() / (1.0 - c("eps")) + c("c") * c("eta2") / c("gamma_min_v").sqrt() * m)
            }
        }
    }

    /// CSV header for a result of this shape.
    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["kind".to_string(), "radius".to_string(), "valid".to_string()];
        h.extend(self.components.iter().map(|(n, _)| n.to_string()));
        h
    }

    /// Flat CSV record matching [`BoundResult::csv_header`].
    pub fn csv_record(&self) -> Vec<String> {
        let mut r = vec![self.kind.to_string(), format_value(self.radius), self.valid.to_string()];
        r.extend(self.components.iter().map(|(_, v)| format_value(*v)));
        r
    }
}

/// Shortest round-trip decimal, with `inf`/`-inf`/`nan` spelled out.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("delta must lie in (0, 1], got {delta}")))
    }
}

/// g(λ) = √(α ψ^{-1}(λ) + 1 − α) − √(α ψ^{-1}(λ)), evaluated in the cancellation-free form
/// (1 − α)/(√(α z + 1 − α) + √(α z)).
pub fn g_factor(psi: &PsiSpec, alpha: f64, lambda: f64) -> Result<f64> {
    let alpha = snap_alpha(alpha)?;
    let z = psi.inverse(lambda)?;
    let az = alpha * z;
    Ok((1.0 - alpha) / ((az + 1.0 - alpha).sqrt() + az.sqrt()))
}

pub(crate) fn snap_alpha(alpha: f64) -> Result<f64> {
    if !(-ALPHA_SNAP..=1.0 + ALPHA_SNAP).contains(&alpha) {
        return Err(Error::domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(if alpha > 1.0 - ALPHA_SNAP {
        1.0
    } else {
        alpha.max(0.0)
    })
}

/// View of a state as sub-ψ_{G,c}: when the declared envelope is `a·ψ_{G,c}` with `a ≠ 1`
/// the pair `(S, aV)` is sub-ψ_{G,c}, so the bound is computed on `(aV, aU0)` and
/// multiplied by √a.
pub(crate) fn gamma_view(state: &ProcessState, c: f64) -> Result<(f64, Cow<'_, ProcessState>)> {
    let gamma = PsiSpec::gamma(c)?;
    let a = state.psi().gamma_multiplier(c).ok_or_else(|| {
        Error::domain(format!("a sub-{} process is not known to be sub-gamma({c})", state.psi().label()))
    })?;
    if a == 1.0 {
        if state.psi().family() == crate::psi::Family::Gamma && state.psi().scale() == Some(c) {
            return Ok((1.0, Cow::Borrowed(state)));
        }
        return Ok((1.0, Cow::Owned(retag(state, gamma)?)));
    }
    let scaled = ProcessState::from_parts(
        state.t(),
        state.s().clone(),
        state.v().scaled(a)?,
        state.u0().scaled(a)?,
        gamma,
    )?;
    Ok((a, Cow::Owned(scaled)))
}

fn retag(state: &ProcessState, psi: PsiSpec) -> Result<ProcessState> {
    ProcessState::from_parts(state.t(), state.s().clone(), state.v().clone(), state.u0().clone(), psi)
}

/// Serializable choice of bound and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum BoundSpec {
    SubGaussian,
    LineCrossing { lambda: f64 },
    Bennett { lambda: f64, b: f64 },
    Bernstein { lambda: f64, c: f64 },
    EmpiricalBernstein { lambda: f64, rho: f64 },
    StitchedGeneral { c: f64, #[serde(default = "default_eta")] eta: f64 },
    StitchedPreset { c: f64 },
    EmpiricalBernsteinStitched { rho: f64 },
    ConjugateRate { #[serde(default = "default_constant")] constant: f64 },
    ConjugateRateCorollary { #[serde(default = "default_constant")] constant: f64 },
    Whitehouse(WhitehouseParams),
}

fn default_eta() -> f64 {
    2.0
}

fn default_constant() -> f64 {
    1.0
}

impl BoundSpec {
    pub fn kind(&self) -> BoundKind {
        match self {
            BoundSpec::SubGaussian => BoundKind::SubGaussian,
            BoundSpec::LineCrossing { .. } => BoundKind::LineCrossing,
            BoundSpec::Bennett { .. } => BoundKind::Bennett,
            BoundSpec::Bernstein { .. } => BoundKind::Bernstein,
            BoundSpec::EmpiricalBernstein { .. } => BoundKind::EmpiricalBernstein,
            BoundSpec::StitchedGeneral { .. } => BoundKind::StitchedGeneral,
            BoundSpec::StitchedPreset { .. } => BoundKind::StitchedPreset,
            BoundSpec::EmpiricalBernsteinStitched { .. } => BoundKind::EmpiricalBernsteinStitched,
            BoundSpec::ConjugateRate { .. } => BoundKind::ConjugateRate,
            BoundSpec::ConjugateRateCorollary { .. } => BoundKind::ConjugateRateCorollary,
            BoundSpec::Whitehouse(_) => BoundKind::Whitehouse,
        }
    }

    /// Short column label, e.g. `line_crossing(lambda=0.5)`.
    pub fn label(&self) -> String {
        match self {
            BoundSpec::LineCrossing { lambda } => format!("line_crossing(lambda={lambda})"),
            BoundSpec::Bennett { lambda, b } => format!("bennett(lambda={lambda};b={b})"),
            BoundSpec::Bernstein { lambda, c } => format!("bernstein(lambda={lambda};c={c})"),
            BoundSpec::EmpiricalBernstein { lambda, rho } => format!("empirical_bernstein(lambda={lambda};rho={rho})"),
            BoundSpec::StitchedGeneral { c, eta } => format!("stitched_general(c={c};eta={eta})"),
            BoundSpec::StitchedPreset { c } => format!("stitched_preset(c={c})"),
            BoundSpec::EmpiricalBernsteinStitched { rho } => format!("empirical_bernstein_stitched(rho={rho})"),
            other => other.kind().to_string(),
        }
    }

    /// Evaluates the bound; `delta` is the error budget.
    pub fn evaluate(&self, state: &ProcessState, delta: f64) -> Result<BoundResult> {
        match self {
            BoundSpec::SubGaussian => subgaussian_radius_sq(state, delta),
            BoundSpec::LineCrossing { lambda } => line_crossing_radius(state, delta, *lambda),
            BoundSpec::Bennett { lambda, b } => bennett_radius(state, delta, *lambda, *b),
            BoundSpec::Bernstein { lambda, c } => bernstein_radius(state, delta, *lambda, *c),
            BoundSpec::EmpiricalBernstein { lambda, rho } => empirical_bernstein_radius(state, delta, *lambda, *rho),
            BoundSpec::StitchedGeneral { c, eta } => {
                stitched_subgamma_radius(state, delta, *c, *eta, &ZetaStitching)
            }
            BoundSpec::StitchedPreset { c } => stitched_subgamma_simplified(state, delta, *c),
            BoundSpec::EmpiricalBernsteinStitched { rho } => empirical_bernstein_stitched(state, delta, *rho),
            BoundSpec::ConjugateRate { constant } => conjugate_rate_radius(state, delta, *constant),
            BoundSpec::ConjugateRateCorollary { constant } => conjugate_rate_corollary(state, delta, *constant),
            BoundSpec::Whitehouse(params) => whitehouse_baseline(state, delta, params),
        }
    }
}
