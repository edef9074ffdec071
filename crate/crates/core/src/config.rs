//! TOML run configuration for the `snconc` binary.
//!
//! Matrices are row-major number lists next to an explicit `dim`. Every command-line flag
//! has a file equivalent; flags win. The resolved configuration is what gets echoed into
//! output manifests.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundSpec;
use crate::error::{Error, Result};
use crate::experiments::{FigureId, FigureSpec, MIN_TRIALS};
use crate::matstats::SymPosDef;
use crate::processes::{ProcessState, ScenarioConfig};
use crate::psi::{Family, PsiSpec};

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_TRIALS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiRecord {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl PsiRecord {
    pub fn to_psi(&self) -> Result<PsiSpec> {
        let family = match self.family.as_str() {
            "normal" => Family::Normal,
            "gamma" => Family::Gamma,
            "neg_exp" => Family::NegExp,
            "poisson" => Family::Poisson,
            other => return Err(Error::config(format!("unknown psi family '{other}'"))),
        };
        let c = match (family, self.c) {
            (Family::Normal, _) => 1.0,
            (_, Some(c)) => c,
            (_, None) => return Err(Error::config(format!("psi family '{}' needs a scale c", self.family))),
        };
        PsiSpec::named(family, c).map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_psi(psi: &PsiSpec) -> Result<Self> {
        if psi.family() == Family::Custom {
            return Err(Error::config("custom psi cannot be serialized"));
        }
        Ok(PsiRecord { family: psi.family().as_str().to_string(), c: psi.scale() })
    }
}

/// Serialized [`ProcessState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    #[serde(default)]
    pub t: u64,
    pub dim: usize,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub u0: Vec<f64>,
    pub psi: PsiRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_hat: Option<Vec<f64>>,
}

impl StateRecord {
    pub fn to_state(&self) -> Result<ProcessState> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::config("state dim must be >= 1"));
        }
        let vec_of = |name: &str, x: &[f64]| -> Result<DVector<f64>> {
            if x.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: x.len() });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("{name} has non-finite entries")));
            }
            Ok(DVector::from_column_slice(x))
        };
        let s = vec_of("s", &self.s)?;
        let v = SymPosDef::from_row_major(d, &self.v)?;
        let u0 = SymPosDef::from_row_major(d, &self.u0)?;
        let state = ProcessState::from_parts(self.t, s, v, u0, self.psi.to_psi()?)?;
        match &self.mu_hat {
            Some(m) => state.with_mean(vec_of("mu_hat", m)?),
            None => Ok(state),
        }
    }

    pub fn from_state(state: &ProcessState) -> Result<Self> {
        Ok(StateRecord {
            t: state.t(),
            dim: state.dim(),
            s: state.s().iter().copied().collect(),
            v: state.v().to_row_major(),
            u0: state.u0().to_row_major(),
            psi: PsiRecord::from_psi(state.psi())?,
            mu_hat: state.mu_hat().map(|m| m.iter().copied().collect()),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read state file {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config(format!("state file {}: {}", path.display(), e.message())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_file: Option<PathBuf>,
    pub bound: BoundSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure_id: Option<FigureId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub whitehouse_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub whitehouse_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSection {
    pub bound: BoundSpec,
    pub scenario: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub scenario: ScenarioConfig,
    pub left: BoundSpec,
    pub right: BoundSpec,
    /// Inclusive `[lo, hi]` range of t for the "left below" fraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<FigureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eval,
    Figure,
    Coverage,
    Compare,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub delta: Option<f64>,
    pub lambda: Option<f64>,
    pub figure_id: Option<FigureId>,
    pub trials: Option<u64>,
    pub horizon: Option<u64>,
}

/// Replaces the λ of a fixed-λ bound.
pub fn with_lambda(bound: &BoundSpec, lambda: f64) -> Result<BoundSpec> {
    let mut b = bound.clone();
    match &mut b {
        BoundSpec::LineCrossing { lambda: l }
        | BoundSpec::Bennett { lambda: l, .. }
        | BoundSpec::Bernstein { lambda: l, .. }
        | BoundSpec::EmpiricalBernstein { lambda: l, .. } => *l = lambda,
        other => {
            return Err(Error::config(format!("--lambda does not apply to bound {}", other.label())));
        }
    }
    Ok(b)
}

fn unused<T>(flag: &str, value: &Option<T>, command: &str) -> Result<()> {
    match value {
        Some(_) => Err(Error::config(format!("{flag} is not used by the {command} command"))),
        None => Ok(()),
    }
}

fn check_delta(delta: f64) -> Result<f64> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(delta)
    } else {
        Err(Error::config(format!("delta must lie in (0, 1], got {delta}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn effective_delta(&self) -> f64 {
        self.delta.unwrap_or(DEFAULT_DELTA)
    }

    /// Applies overrides and defaults, keeps only the section `command` uses, and validates it.
    pub fn resolve(&self, command: Command, o: &Overrides) -> Result<RunConfig> {
        let delta = check_delta(o.delta.or(self.delta).unwrap_or(DEFAULT_DELTA))?;
        let seed = o.seed.or(self.seed);
        let mut out = RunConfig { seed: None, delta: Some(delta), ..Default::default() };
        match command {
            Command::Eval => {
                unused("--seed", &seed, "eval")?;
                unused("--out", &o.out, "eval")?;
                unused("--figure-id", &o.figure_id, "eval")?;
                unused("--trials", &o.trials, "eval")?;
                unused("--horizon", &o.horizon, "eval")?;
                let mut eval = self.eval.clone().ok_or_else(|| Error::config("missing [eval] section"))?;
                if let Some(l) = o.lambda {
                    eval.bound = with_lambda(&eval.bound, l)?;
                }
                match (&eval.state, &eval.state_file) {
                    (Some(_), Some(_)) => return Err(Error::config("give either eval.state or eval.state_file")),
                    (None, None) => return Err(Error::config("eval needs eval.state or eval.state_file")),
                    (None, Some(path)) => {
                        eval.state = Some(StateRecord::load(path)?);
                        eval.state_file = None;
                    }
                    _ => {}
                }
                out.eval = Some(eval);
            }
            Command::Figure => {
                unused("--trials", &o.trials, "figure")?;
                let mut fig = self.figure.clone().unwrap_or_default();
                let id = o
                    .figure_id
                    .or(fig.figure_id)
                    .ok_or_else(|| Error::config("figure needs --figure-id or figure.figure_id"))?;
                let defaults = FigureSpec::defaults(id);
                let mut scenario = fig.scenario.take().unwrap_or(defaults.scenario);
                if let Some(s) = seed {
                    scenario.seed = s;
                }
                if let Some(h) = o.horizon {
                    scenario.horizon = h;
                }
                if let Some(l) = o.lambda {
                    fig.lambdas = Some(vec![l]);
                }
                fig.figure_id = Some(id);
                fig.c = Some(fig.c.unwrap_or(defaults.c));
                fig.whitehouse_a = Some(fig.whitehouse_a.unwrap_or(defaults.whitehouse_a));
                fig.whitehouse_b = Some(fig.whitehouse_b.unwrap_or(defaults.whitehouse_b));
                fig.scenario = Some(scenario);
                fig.out = o.out.clone().or(fig.out);
                out.seed = fig.scenario.as_ref().map(|s| s.seed);
                out.figure = Some(fig);
                out.figure_spec()?.validate()?;
            }
            Command::Coverage => {
                unused("--figure-id", &o.figure_id, "coverage")?;
                let mut cov = self.coverage.clone().ok_or_else(|| Error::config("missing [coverage] section"))?;
                if let Some(s) = seed {
                    cov.scenario.seed = s;
                }
                if let Some(l) = o.lambda {
                    cov.bound = with_lambda(&cov.bound, l)?;
                }
                cov.trials = Some(o.trials.or(cov.trials).unwrap_or(DEFAULT_TRIALS));
                cov.horizon = Some(o.horizon.or(cov.horizon).unwrap_or(cov.scenario.horizon));
                cov.scenario.horizon = cov.horizon.unwrap_or(cov.scenario.horizon);
                cov.out = o.out.clone().or(cov.out);
                if cov.trials < Some(MIN_TRIALS) {
                    return Err(Error::config(format!("coverage needs at least {MIN_TRIALS} trials")));
                }
                cov.scenario.validate()?;
                out.seed = Some(cov.scenario.seed);
                out.coverage = Some(cov);
            }
            Command::Compare => {
                unused("--figure-id", &o.figure_id, "compare")?;
                unused("--trials", &o.trials, "compare")?;
                unused("--lambda", &o.lambda, "compare")?;
                let mut cmp = self.compare.clone().ok_or_else(|| Error::config("missing [compare] section"))?;
                if let Some(s) = seed {
                    cmp.scenario.seed = s;
                }
                if let Some(h) = o.horizon {
                    cmp.scenario.horizon = h;
                }
                if let Some([lo, hi]) = cmp.window {
                    if lo > hi {
                        return Err(Error::config(format!("compare window [{lo}, {hi}] is empty")));
                    }
                }
                cmp.out = o.out.clone().or(cmp.out);
                cmp.scenario.validate()?;
                out.seed = Some(cmp.scenario.seed);
                out.compare = Some(cmp);
            }
        }
        Ok(out)
    }

    /// Figure spec of a resolved figure configuration.
    pub fn figure_spec(&self) -> Result<FigureSpec> {
        let fig = self.figure.as_ref().ok_or_else(|| Error::config("missing [figure] section"))?;
        let id = fig.figure_id.ok_or_else(|| Error::config("figure_id is not set"))?;
        let d = FigureSpec::defaults(id);
        Ok(FigureSpec {
            figure_id: id,
            scenario: fig.scenario.clone().unwrap_or(d.scenario),
            delta: self.effective_delta(),
            c: fig.c.unwrap_or(d.c),
            lambdas: fig.lambdas.clone(),
            whitehouse_a: fig.whitehouse_a.unwrap_or(d.whitehouse_a),
            whitehouse_b: fig.whitehouse_b.unwrap_or(d.whitehouse_b),
        })
    }
}
