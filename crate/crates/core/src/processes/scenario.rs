//! Seeded matrix-growth scenarios.
//!
//! A scenario combines an update rule (which directions the covariates point
//! in) with a noise family (how the statistic `S_t` moves along them). Runs are
//! deterministic functions of the seed.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::rng::NoiseSource;
use super::ProcessState;
use crate::error::{Error, Result};
use crate::matstats::SymPosDef;
use crate::psi::PsiSpec;

/// Every step is recorded up to this time, then every [`SNAPSHOT_STRIDE`]th step.
pub const DENSE_SNAPSHOTS_UNTIL: u64 = 1000;
pub const SNAPSHOT_STRIDE: u64 = 10;

/// Dampening applied to the bottom eigendirection during warmup (the top one gets 1).
pub const WARMUP_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum UpdateRule {
    /// Covariate is the top eigenvector of `V_{t−1}^{-1}`.
    UcbEigvec,
    /// Damped full-rank warmup, then unit updates along the top-k eigenvectors of `V_{t−1}`.
    DampedFullRankThenRankK { k: usize },
    /// Covariate drawn uniformly from the unit sphere.
    IidIsotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    /// Reward noise η ~ N(0, σ²) multiplying the covariate.
    Gaussian { sigma: f64 },
    /// Increment uniform on the sphere of radius b (iid rule only).
    BoundedSphere { b: f64 },
    /// Covariate multiplied by an independent random sign.
    RademacherSymmetric,
}

/// How the variance proxy is formed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    /// True conditional variances (`σ² x xᵀ`, `x xᵀ` or `(b²/d) I`).
    #[default]
    Oracle,
    /// Running-mean-centred outer products with `U0 = ρI`.
    EmpiricalBernstein { rho: f64 },
}

fn default_warmup() -> u64 {
    100
}

fn default_u0_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub d: usize,
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    pub update_rule: UpdateRule,
    pub noise: Noise,
    #[serde(default = "default_warmup")]
    pub warmup_steps: u64,
    #[serde(default = "default_u0_scale")]
    pub u0_scale: f64,
    #[serde(default)]
    pub process: ProcessKind,
}

impl ScenarioConfig {
    pub fn new(d: usize, horizon: u64, seed: u64, update_rule: UpdateRule, noise: Noise) -> Self {
        ScenarioConfig {
            d,
            horizon,
            seed,
            update_rule,
            noise,
            warmup_steps: default_warmup(),
            u0_scale: default_u0_scale(),
            process: ProcessKind::Oracle,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::config("scenario dimension d must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("scenario horizon must be >= 1"));
        }
        if !(self.u0_scale > 0.0) || !self.u0_scale.is_finite() {
            return Err(Error::config(format!("u0_scale must be finite and > 0, got {}", self.u0_scale)));
        }
        if let UpdateRule::DampedFullRankThenRankK { k } = self.update_rule {
            if k == 0 || k > self.d {
                return Err(Error::config(format!("rank k = {k} must lie in [1, d = {}]", self.d)));
            }
        }
        match self.noise {
            Noise::Gaussian { sigma } if !(sigma > 0.0) || !sigma.is_finite() => {
                return Err(Error::config(format!("noise sigma must be finite and > 0, got {sigma}")));
            }
            Noise::BoundedSphere { b } => {
                if !(b > 0.0) || !b.is_finite() {
                    return Err(Error::config(format!("sphere radius b must be finite and > 0, got {b}")));
                }
                if self.update_rule != UpdateRule::IidIsotropic {
                    return Err(Error::config("bounded_sphere noise requires the iid_isotropic update rule"));
                }
            }
            _ => {}
        }
        if let ProcessKind::EmpiricalBernstein { rho } = self.process {
            if !(rho > 1.0) || !rho.is_finite() {
                return Err(Error::config(format!("empirical Bernstein needs rho > 1, got {rho}")));
            }
            match self.noise {
                Noise::BoundedSphere { b } if b <= super::EB_NORM_BOUND => {}
                _ => {
                    return Err(Error::config(format!(
                        "empirical Bernstein needs bounded_sphere noise with b <= {}",
                        super::EB_NORM_BOUND
                    )))
                }
            }
        }
        Ok(())
    }

    /// The ψ the generated pair is sub-ψ for.
    pub fn psi_tag(&self) -> Result<PsiSpec> {
        match (&self.process, &self.noise) {
            (ProcessKind::EmpiricalBernstein { .. }, _) => PsiSpec::neg_exp(1.0),
            (_, Noise::BoundedSphere { b }) => PsiSpec::gamma(*b),
            _ => Ok(PsiSpec::normal()),
        }
    }

    fn initial_state(&self) -> Result<ProcessState> {
        match self.process {
            ProcessKind::EmpiricalBernstein { rho } => ProcessState::empirical_bernstein(self.d, rho),
            ProcessKind::Oracle => Ok(ProcessState::new(
                SymPosDef::scaled_identity(self.d, self.u0_scale)?,
                self.psi_tag()?,
            )),
        }
    }
}

/// Whether step `t` is recorded.
pub fn is_snapshot(t: u64) -> bool {
    t <= DENSE_SNAPSHOTS_UNTIL || t.is_multiple_of(SNAPSHOT_STRIDE)
}

/// Recorded states of one run, starting with `t = 0`.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub snapshots: Vec<ProcessState>,
}

/// Runs the scenario with `NoiseSource::new(cfg.seed)` and keeps every snapshot.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    let mut snapshots = Vec::new();
    run_scenario_with(cfg, NoiseSource::new(cfg.seed), |state| {
        snapshots.push(state.clone());
        Ok(())
    })?;
    Ok(ScenarioRun { config: cfg.clone(), snapshots })
}

/// Runs the scenario with a caller-supplied noise stream, handing each snapshot to `visit`.
pub fn run_scenario_with<F>(cfg: &ScenarioConfig, mut noise: NoiseSource, mut visit: F) -> Result<()>
where
    F: FnMut(&ProcessState) -> Result<()>,
{
    cfg.validate()?;
    let mut state = cfg.initial_state()?;
    visit(&state)?;
    for t in 1..=cfg.horizon {
        advance(cfg, &mut state, &mut noise, t)?;
        if is_snapshot(t) {
            visit(&state)?;
        }
    }
    Ok(())
}

fn warmup_factor(j: usize, d: usize) -> f64 {
    if d == 1 {
        1.0
    } else {
        1.0 - (1.0 - WARMUP_FLOOR) * j as f64 / (d - 1) as f64
    }
}

fn advance(cfg: &ScenarioConfig, state: &mut ProcessState, noise: &mut NoiseSource, t: u64) -> Result<()> {
    let d = cfg.d;
    match cfg.update_rule {
        UpdateRule::IidIsotropic => match (&cfg.process, &cfg.noise) {
            (ProcessKind::EmpiricalBernstein { .. }, Noise::BoundedSphere { b }) => {
                let x = noise.uniform_sphere(d, *b);
                state.step_empirical_bernstein(&x)
            }
            (_, Noise::BoundedSphere { b }) => {
                let x = noise.uniform_sphere(d, *b);
                let cov = DMatrix::identity(d, d) * (b * b / d as f64);
                state.step_bernstein(&x, &cov, *b)
            }
            (_, Noise::Gaussian { sigma }) => {
                let x = noise.uniform_sphere(d, 1.0);
                let eta = sigma * noise.normal();
                state.step_subgaussian_bandit(&x, eta, *sigma)
            }
            (_, Noise::RademacherSymmetric) => {
                let x = noise.uniform_sphere(d, 1.0) * noise.rademacher();
                state.step_symmetric(&x)
            }
        },
        UpdateRule::UcbEigvec => {
            let x = state.v().spectrum()?.bottom_vector().clone();
            directional_step(cfg, state, noise, &[x])
        }
        UpdateRule::DampedFullRankThenRankK { k } => {
            let spectrum = state.v().spectrum()?;
            let dirs: Vec<DVector<f64>> = if t <= cfg.warmup_steps {
                spectrum
                    .vectors
                    .iter()
                    .enumerate()
                    .map(|(j, u)| u * warmup_factor(j, d).sqrt())
                    .collect()
            } else {
                spectrum.vectors.iter().take(k).cloned().collect()
            };
            directional_step(cfg, state, noise, &dirs)
        }
    }
}

type Draw = Box<dyn FnMut(&mut NoiseSource) -> f64>;

/// One time step made of several rank-one pieces `x_j`: `V += w Σ x_j x_jᵀ`, `S += Σ η_j x_j`.
fn directional_step(
    cfg: &ScenarioConfig,
    state: &mut ProcessState,
    noise: &mut NoiseSource,
    dirs: &[DVector<f64>],
) -> Result<()> {
    let d = cfg.d;
    let (weight, mut draw): (f64, Draw) = match cfg.noise {
        Noise::Gaussian { sigma } => (sigma * sigma, Box::new(move |n: &mut NoiseSource| sigma * n.normal())),
        Noise::RademacherSymmetric => (1.0, Box::new(|n: &mut NoiseSource| n.rademacher())),
        Noise::BoundedSphere { .. } => {
            return Err(Error::config("bounded_sphere noise requires the iid_isotropic update rule"));
        }
    };
    let mut increment = DMatrix::zeros(d, d);
    let mut ds = DVector::zeros(d);
    for x in dirs {
        for j in 0..d {
            for i in 0..d {
                increment[(i, j)] += weight * (x[i] * x[j]);
            }
        }
        ds.axpy(draw(noise), x, 1.0);
    }
    state.v = state.v.add_matrix(&increment)?;
    state.s += ds;
    state.t += 1;
    Ok(())
}
