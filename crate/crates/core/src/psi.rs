//! CGF-like functions ψ and their calculus.
//!
//! A [`PsiSpec`] describes a strictly convex, twice differentiable function on
//! `[0, λ_max)` with `ψ(0) = ψ'(0+) = 0`. Four closed-form families are built
//! in (the Gaussian, gamma, negative-exponential and Poisson CGFs); anything
//! else can be supplied as a [`CustomPsi`] callback, which is validated on a
//! grid when it is constructed.
//!
//! Every inverse (ψ^{-1}, (ψ')^{-1} and (ψ*)^{-1}) is computed by bracketed
//! bisection unless a closed form is available. Inputs outside the domain or
//! image are rejected rather than clamped.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::roots::{invert_increasing, Upper};

/// Below this |cλ| the negative-exponential and Poisson families use their power series.
const SERIES_CUTOFF: f64 = 1e-2;
const SERIES_TERMS: i32 = 14;

const VALIDATION_GRID: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    Gamma,
    NegExp,
    Poisson,
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Gamma => "gamma",
            Family::NegExp => "neg_exp",
            Family::Poisson => "poisson",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A user-supplied CGF-like function.
///
/// `super_gaussian` and `nonneg_third_derivative` are behavioural claims that
/// several bounds depend on; [`PsiSpec::custom`] checks both on a grid.
/// `gamma_envelope = Some((a, c))` declares `ψ ≤ a·ψ_{G,c}` on the domain.
#[derive(Clone)]
pub struct CustomPsi {
    pub label: String,
    pub func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub lambda_max: f64,
    pub super_gaussian: bool,
    pub nonneg_third_derivative: bool,
    pub gamma_envelope: Option<(f64, f64)>,
}

impl fmt::Debug for CustomPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPsi")
            .field("label", &self.label)
            .field("lambda_max", &self.lambda_max)
            .field("super_gaussian", &self.super_gaussian)
            .field("nonneg_third_derivative", &self.nonneg_third_derivative)
            .field("gamma_envelope", &self.gamma_envelope)
            .finish()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Normal,
    Gamma(f64),
    NegExp(f64),
    Poisson(f64),
    Custom(Arc<CustomPsi>),
}

/// Immutable descriptor of a ψ function.
#[derive(Debug, Clone)]
pub struct PsiSpec {
    kind: Kind,
}

impl PartialEq for PsiSpec {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Normal, Kind::Normal) => true,
            (Kind::Gamma(a), Kind::Gamma(b))
            | (Kind::NegExp(a), Kind::NegExp(b))
            | (Kind::Poisson(a), Kind::Poisson(b)) => a == b,
            (Kind::Custom(a), Kind::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

fn check_scale(c: f64, family: Family) -> Result<f64> {
    if c.is_finite() && c > 0.0 {
        Ok(c)
    } else {
        Err(Error::domain(format!("{family}: scale c must be finite and > 0, got {c}")))
    }
}

fn neg_exp_unit(x: f64) -> f64 {
    // -log(1 - x) - x = sum_{q>=2} x^q / q
    if x.abs() < SERIES_CUTOFF {
        let mut term = x;
        let mut sum = 0.0;
        for q in 2..=SERIES_TERMS {
            term *= x;
            sum += term / f64::from(q);
        }
        sum
    } else {
        -(-x).ln_1p() - x
    }
}

fn poisson_unit(x: f64) -> f64 {
    // e^x - x - 1 = sum_{q>=2} x^q / q!
    if x.abs() < SERIES_CUTOFF {
        let mut term = x;
        let mut sum = 0.0;
        for q in 2..=SERIES_TERMS {
            term *= x / f64::from(q);
            sum += term;
        }
        sum
    } else {
        x.exp_m1() - x
    }
}

impl PsiSpec {
    /// ψ_N(λ) = λ²/2 on [0, ∞).
    pub fn normal() -> Self {
        PsiSpec { kind: Kind::Normal }
    }

    /// ψ_{G,c}(λ) = λ²/(2(1 − cλ)) on [0, 1/c).
    pub fn gamma(c: f64) -> Result<Self> {
        Ok(PsiSpec { kind: Kind::Gamma(check_scale(c, Family::Gamma)?) })
    }

    /// ψ_{E,c}(λ) = (−log(1 − cλ) − cλ)/c² on [0, 1/c).
    pub fn neg_exp(c: f64) -> Result<Self> {
        Ok(PsiSpec { kind: Kind::NegExp(check_scale(c, Family::NegExp)?) })
    }

    /// ψ_{P,c}(λ) = (e^{cλ} − cλ − 1)/c² on [0, ∞).
    pub fn poisson(c: f64) -> Result<Self> {
        Ok(PsiSpec { kind: Kind::Poisson(check_scale(c, Family::Poisson)?) })
    }

    /// Builds a spec from a family tag and scale (the scale is ignored for `Normal`).
    pub fn named(family: Family, c: f64) -> Result<Self> {
        match family {
            Family::Normal => Ok(Self::normal()),
            Family::Gamma => Self::gamma(c),
            Family::NegExp => Self::neg_exp(c),
            Family::Poisson => Self::poisson(c),
            Family::Custom => Err(Error::domain("custom specs need a callback; use PsiSpec::custom")),
        }
    }

    /// Validates a user-supplied ψ on a grid and wraps it.
    ///
    /// Checks: ψ(0) = 0, ψ finite, strictly increasing and convex on the grid, and
    /// the declared super-Gaussian / ψ''' ≥ 0 flags.
    pub fn custom(def: CustomPsi) -> Result<Self> {
        if !(def.lambda_max > 0.0) {
            return Err(Error::domain(format!("{}: lambda_max must be > 0", def.label)));
        }
        if let Some((a, c)) = def.gamma_envelope {
            if !(a > 0.0 && a.is_finite() && c > 0.0 && c.is_finite()) {
                return Err(Error::domain(format!("{}: gamma envelope needs a, c > 0", def.label)));
            }
        }
        let f = &def.func;
        let at_zero = f(0.0);
        if !(at_zero.abs() <= 1e-12) {
            return Err(Error::domain(format!("{}: psi(0) = {at_zero}, expected 0", def.label)));
        }
        let top = if def.lambda_max.is_finite() { 0.999 * def.lambda_max } else { 10.0 };
        let grid: Vec<f64> = (1..VALIDATION_GRID).map(|i| top * i as f64 / (VALIDATION_GRID - 1) as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&l| f(l)).collect();
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("{}: psi not finite at lambda = {}", def.label, grid[bad])));
        }
        let mut prev = 0.0;
        for (l, v) in grid.iter().zip(&values) {
            if !(*v > prev) {
                return Err(Error::domain(format!("{}: psi not strictly increasing at {l}", def.label)));
            }
            prev = *v;
        }
        let rel = |a: f64, b: f64| 1e-9 * a.abs().max(b.abs()).max(1e-300);
        let mut slopes = Vec::with_capacity(grid.len());
        let mut x0 = 0.0;
        let mut y0 = 0.0;
        for (&x, &y) in grid.iter().zip(&values) {
            slopes.push((y - y0) / (x - x0));
            x0 = x;
            y0 = y;
        }
        if slopes.windows(2).any(|w| w[1] < w[0] - rel(w[0], w[1])) {
            return Err(Error::domain(format!("{}: psi is not convex on the validation grid", def.label)));
        }
        if def.super_gaussian {
            let ratios: Vec<f64> = grid.iter().zip(&values).map(|(l, v)| v / (l * l)).collect();
            if ratios.windows(2).any(|w| w[1] < w[0] - rel(w[0], w[1])) {
                return Err(Error::domain(format!(
                    "{}: declared super-Gaussian but psi(l)/l^2 decreases on the grid",
                    def.label
                )));
            }
        }
        if def.nonneg_third_derivative {
            // ψ''' ≥ 0 ⇔ ψ' convex ⇔ second differences of the secant slopes are nonnegative.
            let second: Vec<f64> = slopes.windows(2).map(|w| w[1] - w[0]).collect();
            let tol = 1e-6 * second.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if second.windows(2).any(|w| w[1] < w[0] - tol) {
                return Err(Error::domain(format!(
                    "{}: declared psi''' >= 0 but psi'' decreases on the grid",
                    def.label
                )));
            }
        }
        Ok(PsiSpec { kind: Kind::Custom(Arc::new(def)) })
    }

    /// `a · ψ_{G,c}` wrapped as a custom spec with the matching gamma envelope.
    ///
    /// Any CGF-like ψ is dominated by such a scaled gamma function for some
    /// `(a, c)`; finding the constants is left to the caller.
    pub fn scaled_gamma(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain(format!("scaled gamma: a must be > 0, got {a}")));
        }
        let c = check_scale(c, Family::Gamma)?;
        Self::custom(CustomPsi {
            label: format!("{a}*gamma({c})"),
            func: Arc::new(move |l: f64| a * l * l / (2.0 * (1.0 - c * l))),
            lambda_max: 1.0 / c,
            super_gaussian: true,
            nonneg_third_derivative: true,
            gamma_envelope: Some((a, c)),
        })
    }

    /// ψ_β(λ) = β·ψ(λ/√β), the function a process rescaled by `(1/√β, 1/β)` is sub-ψ_β for.
    pub fn rescaled(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("rescale: beta must be > 0, got {beta}")));
        }
        let base = self.clone();
        let root = beta.sqrt();
        let envelope = self.gamma_envelope().map(|(a, c)| (a, c / root));
        Self::custom(CustomPsi {
            label: format!("rescaled({},{beta})", self.label()),
            func: Arc::new(move |l: f64| beta * base.value(l / root)),
            lambda_max: root * self.lambda_max(),
            super_gaussian: self.is_super_gaussian(),
            nonneg_third_derivative: self.has_nonneg_third_derivative(),
            gamma_envelope: envelope,
        })
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Normal => Family::Normal,
            Kind::Gamma(_) => Family::Gamma,
            Kind::NegExp(_) => Family::NegExp,
            Kind::Poisson(_) => Family::Poisson,
            Kind::Custom(_) => Family::Custom,
        }
    }

    /// Scale parameter c of the named families.
    pub fn scale(&self) -> Option<f64> {
        match self.kind {
            Kind::Gamma(c) | Kind::NegExp(c) | Kind::Poisson(c) => Some(c),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Normal => "normal".to_string(),
            Kind::Gamma(c) => format!("gamma({c})"),
            Kind::NegExp(c) => format!("neg_exp({c})"),
            Kind::Poisson(c) => format!("poisson({c})"),
            Kind::Custom(def) => def.label.clone(),
        }
    }

    pub fn lambda_max(&self) -> f64 {
        match &self.kind {
            Kind::Normal | Kind::Poisson(_) => f64::INFINITY,
            Kind::Gamma(c) | Kind::NegExp(c) => 1.0 / c,
            Kind::Custom(def) => def.lambda_max,
        }
    }

    /// λ ↦ ψ(λ)/λ² nondecreasing.
    pub fn is_super_gaussian(&self) -> bool {
        match &self.kind {
            Kind::Custom(def) => def.super_gaussian,
            _ => true,
        }
    }

    pub fn has_nonneg_third_derivative(&self) -> bool {
        match &self.kind {
            Kind::Normal => true,
            Kind::Custom(def) => def.nonneg_third_derivative,
            _ => true,
        }
    }

    /// Declared or built-in `(a, c)` with `ψ ≤ a·ψ_{G,c}`, using the smallest c available.
    pub fn gamma_envelope(&self) -> Option<(f64, f64)> {
        match &self.kind {
            Kind::Normal => None,
            Kind::Gamma(c) | Kind::NegExp(c) | Kind::Poisson(c) => Some((1.0, *c)),
            Kind::Custom(def) => def.gamma_envelope,
        }
    }

    /// Multiplier `a` such that `ψ ≤ a·ψ_{G,c}` on `[0, 1/c)`, if one is known.
    ///
    /// ψ_N is dominated by every ψ_{G,c}; ψ_{G,c'}, ψ_{E,c'} and ψ_{P,c'} are
    /// dominated by ψ_{G,c} whenever `c' ≤ c` (termwise comparison of the power
    /// series, and the monotonicity of each family in its scale).
    pub fn gamma_multiplier(&self, c: f64) -> Option<f64> {
        if !(c > 0.0) {
            return None;
        }
        match &self.kind {
            Kind::Normal => Some(1.0),
            _ => match self.gamma_envelope() {
                Some((a, c0)) if c0 <= c => Some(a),
                _ => None,
            },
        }
    }

    /// Whether every sub-`self` process is also sub-`other` (same variance proxy).
    pub fn dominated_by(&self, other: &PsiSpec) -> bool {
        if self == other {
            return true;
        }
        match (&self.kind, &other.kind) {
            (Kind::Normal, Kind::Custom(def)) => def.super_gaussian && def.gamma_envelope.is_some_and(|(a, _)| a >= 1.0),
            (Kind::Normal, _) => true,
            (_, Kind::Gamma(c)) => self.gamma_multiplier(*c).is_some_and(|a| a <= 1.0),
            (Kind::NegExp(c0), Kind::NegExp(c)) | (Kind::Poisson(c0), Kind::NegExp(c)) => c0 <= c,
            (Kind::Poisson(c0), Kind::Poisson(c)) => c0 <= c,
            _ => false,
        }
    }

    /// ψ(λ) without domain checks; may return ∞ on overflow.
    pub(crate) fn value(&self, lambda: f64) -> f64 {
        match &self.kind {
            Kind::Normal => 0.5 * lambda * lambda,
            Kind::Gamma(c) => lambda * lambda / (2.0 * (1.0 - c * lambda)),
            Kind::NegExp(c) => neg_exp_unit(c * lambda) / (c * c),
            Kind::Poisson(c) => poisson_unit(c * lambda) / (c * c),
            Kind::Custom(def) => (def.func)(lambda),
        }
    }

    /// ψ'(λ) without domain checks.
    pub(crate) fn slope(&self, lambda: f64) -> f64 {
        match &self.kind {
            Kind::Normal => lambda,
            Kind::Gamma(c) => {
                let denom = 1.0 - c * lambda;
                lambda * (2.0 - c * lambda) / (2.0 * denom * denom)
            }
            Kind::NegExp(c) => lambda / (1.0 - c * lambda),
            Kind::Poisson(c) => (c * lambda).exp_m1() / c,
            Kind::Custom(def) => {
                let upper = Upper::from_limit(def.lambda_max).edge();
                let h = 1e-6 * lambda.max(1e-6);
                let hi = (lambda + h).min(upper);
                let lo = (lambda - h).max(0.0);
                ((def.func)(hi) - (def.func)(lo)) / (hi - lo)
            }
        }
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        if lambda.is_nan() || lambda < 0.0 || lambda >= self.lambda_max() || !lambda.is_finite() {
            return Err(Error::domain(format!(
                "{}: lambda = {lambda} outside [0, {})",
                self.label(),
                self.lambda_max()
            )));
        }
        Ok(())
    }

    /// ψ(λ) for λ ∈ [0, λ_max).
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        let v = self.value(lambda);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("{}: psi({lambda}) overflows", self.label())))
        }
    }

    /// ψ'(λ) for λ ∈ [0, λ_max).
    pub fn derivative(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        let v = self.slope(lambda);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("{}: psi'({lambda}) overflows", self.label())))
        }
    }

    /// sup ψ over the domain, approached at the upper bracket.
    pub fn sup_value(&self) -> f64 {
        match &self.kind {
            Kind::Custom(def) => {
                let edge = Upper::from_limit(def.lambda_max).edge();
                if edge.is_finite() {
                    (def.func)(edge)
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        }
    }

    /// The unique λ with ψ(λ) = z.
    pub fn inverse(&self, z: f64) -> Result<f64> {
        if z.is_nan() || z < 0.0 {
            return Err(Error::domain(format!("{}: inverse needs z >= 0, got {z}", self.label())));
        }
        if z == 0.0 {
            return Ok(0.0);
        }
        if !z.is_finite() {
            return Err(Error::domain(format!("{}: z = {z} not in Im(psi)", self.label())));
        }
        match &self.kind {
            Kind::Normal => Ok((2.0 * z).sqrt()),
            Kind::Gamma(c) => Ok(2.0 / (c + (c * c + 2.0 / z).sqrt())),
            _ => invert_increasing(
                |l| Ok(self.value(l)),
                z,
                Upper::from_limit(self.lambda_max()),
                "psi inverse",
            ),
        }
    }

    /// λ*(a) = (ψ')^{-1}(a), the maximizer of λa − ψ(λ).
    pub fn lambda_star(&self, a: f64) -> Result<f64> {
        if a.is_nan() || a < 0.0 || !a.is_finite() {
            return Err(Error::domain(format!("{}: lambda_star needs finite a >= 0, got {a}", self.label())));
        }
        if a == 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            Kind::Normal => Ok(a),
            _ => invert_increasing(
                |l| Ok(self.slope(l)),
                a,
                Upper::from_limit(self.lambda_max()),
                "psi' inverse",
            ),
        }
    }

    /// ψ*(u) = sup_{λ ∈ [0, λ_max)} (λu − ψ(λ)); closed form for Normal and Gamma, otherwise via λ*.
    pub fn conjugate(&self, u: f64) -> Result<f64> {
        if u.is_nan() || u < 0.0 || !u.is_finite() {
            return Err(Error::domain(format!("{}: conjugate needs finite u >= 0, got {u}", self.label())));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            Kind::Normal => return Ok(0.5 * u * u),
            Kind::Gamma(c) => return Ok(u * u / (1.0 + c * u + (1.0 + 2.0 * c * u).sqrt())),
            _ => {}
        }
        let lambda = match self.lambda_star(u) {
            Ok(l) => l,
            Err(Error::Domain(_)) if self.lambda_max().is_finite() => {
                // ψ' stays below u on the whole domain: the sup sits at the edge.
                let edge = Upper::Finite(self.lambda_max()).edge();
                return Ok((edge * u - self.value(edge)).max(0.0));
            }
            Err(e) => return Err(e),
        };
        Ok((lambda * u - self.value(lambda)).max(0.0))
    }

    /// u with ψ*(u) = y; closed form √(2y) + cy for Gamma (c = 0 for Normal), otherwise bisection on ψ*.
    pub fn conjugate_inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 || !y.is_finite() {
            return Err(Error::domain(format!(
                "{}: conjugate inverse needs finite y >= 0, got {y}",
                self.label()
            )));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            Kind::Normal => Ok((2.0 * y).sqrt()),
            Kind::Gamma(c) => Ok((2.0 * y).sqrt() + c * y),
            _ => invert_increasing(|u| self.conjugate(u), y, Upper::Unbounded, "conjugate inverse"),
        }
    }
}
