//! Accumulators for sub-ψ pairs `(S_t, V_t)` and the matrix-growth scenarios.
//!
//! A [`ProcessState`] always stores `V` with the regularizer `U0` already
//! folded in, so `V ⪰ U0` holds from `t = 0`. The `psi` tag records which ψ
//! the pair is sub-ψ for; bound evaluators check it before computing.

mod rng;
mod scenario;

pub use rng::NoiseSource;
pub use scenario::{
    is_snapshot, run_scenario, run_scenario_with, Noise, ProcessKind, ScenarioConfig, ScenarioRun, UpdateRule,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::matstats::{min_eigenvalue, SymPosDef};
use crate::psi::PsiSpec;

/// Slack allowed when checking norm constraints on increments.
const NORM_SLACK: f64 = 1e-12;

/// Tolerance for `γ_min(V − U0) ≥ −tol`, relative to max(1, ‖V‖).
pub const LOEWNER_TOL: f64 = 1e-10;

/// Bound on ‖X_t‖₂ for the empirical-Bernstein accumulator.
pub const EB_NORM_BOUND: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct ProcessState {
    t: u64,
    s: DVector<f64>,
    v: SymPosDef,
    u0: SymPosDef,
    mu_hat: Option<DVector<f64>>,
    psi: PsiSpec,
}

impl ProcessState {
    /// Empty process at `t = 0` with `S = 0` and `V = U0`.
    pub fn new(u0: SymPosDef, psi: PsiSpec) -> Self {
        let d = u0.dim();
        ProcessState { t: 0, s: DVector::zeros(d), v: u0.clone(), u0, mu_hat: None, psi }
    }

    /// Empirical-Bernstein accumulator with `U0 = ρI`, `μ̂₀ = 0` and ψ = ψ_{E,1}.
    pub fn empirical_bernstein(d: usize, rho: f64) -> Result<Self> {
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(Error::domain(format!("empirical Bernstein needs rho > 1, got {rho}")));
        }
        let u0 = SymPosDef::scaled_identity(d, rho)?;
        let mut state = Self::new(u0, PsiSpec::neg_exp(1.0)?);
        state.mu_hat = Some(DVector::zeros(d));
        Ok(state)
    }

    /// Reassembles a recorded state, checking dimensions and `V ⪰ U0`.
    pub fn from_parts(t: u64, s: DVector<f64>, v: SymPosDef, u0: SymPosDef, psi: PsiSpec) -> Result<Self> {
        check_dim(v.dim(), s.len())?;
        check_dim(v.dim(), u0.dim())?;
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("S has non-finite entries"));
        }
        let state = ProcessState { t, s, v, u0, mu_hat: None, psi };
        state.check_dominates_u0()?;
        Ok(state)
    }

    /// Attaches a running mean (empirical-Bernstein states restored from disk).
    pub fn with_mean(mut self, mu_hat: DVector<f64>) -> Result<Self> {
        check_dim(self.dim(), mu_hat.len())?;
        self.mu_hat = Some(mu_hat);
        Ok(self)
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn s(&self) -> &DVector<f64> {
        &self.s
    }

    /// Variance proxy, including U0.
    pub fn v(&self) -> &SymPosDef {
        &self.v
    }

    pub fn u0(&self) -> &SymPosDef {
        &self.u0
    }

    pub fn mu_hat(&self) -> Option<&DVector<f64>> {
        self.mu_hat.as_ref()
    }

    pub fn psi(&self) -> &PsiSpec {
        &self.psi
    }

    /// ‖S‖_{V^{-1}}.
    pub fn self_norm(&self) -> Result<f64> {
        self.v.self_norm(&self.s)
    }

    /// log(det V / det U0).
    pub fn log_det_ratio(&self) -> f64 {
        self.v.log_det() - self.u0.log_det()
    }

    /// `γ_min(V − U0) ≥ −tol`, failing with a domain error otherwise.
    pub fn check_dominates_u0(&self) -> Result<()> {
        let gap = min_eigenvalue(&(self.v.matrix() - self.u0.matrix()))?;
        let tol = LOEWNER_TOL * self.v.matrix().amax().max(1.0);
        if gap < -tol {
            return Err(Error::domain(format!("V does not dominate U0: gamma_min(V - U0) = {gap}")));
        }
        Ok(())
    }

    fn check_vector(&self, x: &DVector<f64>) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("increment has non-finite entries"));
        }
        Ok(())
    }

    /// Bandit stream with σ-sub-Gaussian reward noise: `S += η x`, `V += σ² x xᵀ`.
    pub fn step_subgaussian_bandit(&mut self, x: &DVector<f64>, eta: f64, sigma: f64) -> Result<()> {
        self.check_vector(x)?;
        if !eta.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!("bandit step needs finite eta and sigma > 0, got ({eta}, {sigma})")));
        }
        self.v = self.v.add_outer(x, sigma * sigma)?;
        self.s.axpy(eta, x, 1.0);
        self.psi = PsiSpec::normal();
        self.t += 1;
        Ok(())
    }

    /// Conditionally symmetric increment: `S += x`, `V += x xᵀ`, tagged sub-Gaussian.
    pub fn step_symmetric(&mut self, x: &DVector<f64>) -> Result<()> {
        self.check_vector(x)?;
        self.v = self.v.add_outer(x, 1.0)?;
        self.s += x;
        self.psi = PsiSpec::normal();
        self.t += 1;
        Ok(())
    }

    fn add_covariance(&mut self, x: &DVector<f64>, cov: &DMatrix<f64>) -> Result<()> {
        check_dim(self.dim(), cov.nrows())?;
        check_dim(self.dim(), cov.ncols())?;
        let floor = min_eigenvalue(cov)?;
        if floor < -LOEWNER_TOL * cov.amax().max(1.0) {
            return Err(Error::domain(format!("covariance is not PSD: smallest eigenvalue {floor}")));
        }
        self.v = self.v.add_matrix(cov)?;
        self.s += x;
        self.t += 1;
        Ok(())
    }

    /// Bounded increment with `‖x‖ ≤ b` and supplied conditional second moment; tagged ψ_{P,b}.
    pub fn step_bounded(&mut self, x: &DVector<f64>, cov: &DMatrix<f64>, b: f64) -> Result<()> {
        self.check_vector(x)?;
        let psi = PsiSpec::poisson(b)?;
        let norm = x.norm();
        if norm > b * (1.0 + NORM_SLACK) {
            return Err(Error::BoundViolation(format!("increment norm {norm} exceeds b = {b}")));
        }
        self.add_covariance(x, cov)?;
        self.psi = psi;
        Ok(())
    }

    /// Increment satisfying the Bernstein moment condition with scale `c`; tagged ψ_{G,c}.
    pub fn step_bernstein(&mut self, x: &DVector<f64>, cov: &DMatrix<f64>, c: f64) -> Result<()> {
        self.check_vector(x)?;
        let psi = PsiSpec::gamma(c)?;
        self.add_covariance(x, cov)?;
        self.psi = psi;
        Ok(())
    }

    /// Empirical-Bernstein update: `V += (x − μ̂_{t−1})(x − μ̂_{t−1})ᵀ`, `S += x`, `μ̂_t = S/t`.
    pub fn step_empirical_bernstein(&mut self, x: &DVector<f64>) -> Result<()> {
        self.check_vector(x)?;
        let mu = self
            .mu_hat
            .as_ref()
            .ok_or_else(|| Error::domain("state was not created as an empirical-Bernstein accumulator"))?;
        let norm = x.norm();
        if norm > EB_NORM_BOUND * (1.0 + NORM_SLACK) {
            return Err(Error::BoundViolation(format!(
                "increment norm {norm} exceeds {EB_NORM_BOUND}"
            )));
        }
        let centered = x - mu;
        self.v = self.v.add_outer(&centered, 1.0)?;
        self.s += x;
        self.t += 1;
        self.mu_hat = Some(&self.s / self.t as f64);
        Ok(())
    }

    /// Re-declares the pair as sub-`psi`; allowed only when the current tag is dominated by it.
    pub fn with_psi(mut self, psi: PsiSpec) -> Result<Self> {
        if !self.psi.dominated_by(&psi) {
            return Err(Error::domain(format!(
                "a sub-{} process is not known to be sub-{}",
                self.psi.label(),
                psi.label()
            )));
        }
        self.psi = psi;
        Ok(self)
    }

    /// `(S/√β, V/β, U0/β)` together with ψ_β(λ) = βψ(λ/√β). Requires `V ⪰ βI`.
    pub fn rescale(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!("rescale needs beta > 0, got {beta}")));
        }
        let floor = self.v.gamma_min()?;
        if floor < beta * (1.0 - NORM_SLACK) {
            return Err(Error::domain(format!(
                "rescale needs V >= beta I, but gamma_min(V) = {floor} < {beta}"
            )));
        }
        if beta == 1.0 {
            return Ok(self.clone());
        }
        let root = beta.sqrt();
        Ok(ProcessState {
            t: self.t,
            s: &self.s / root,
            v: self.v.scaled(1.0 / beta)?,
            u0: self.u0.scaled(1.0 / beta)?,
            mu_hat: self.mu_hat.as_ref().map(|m| m / root),
            psi: self.psi.rescaled(beta)?,
        })
    }
}
