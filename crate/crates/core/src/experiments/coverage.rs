//! Monte Carlo coverage of time-uniform bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundSpec;
use crate::error::{Error, Result};
use crate::processes::{run_scenario_with, NoiseSource, ProcessState, ScenarioConfig};

pub const MIN_TRIALS: u64 = 100;

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959964;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub bound: String,
    pub trials: u64,
    pub violations: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub delta: f64,
    /// δ + 3·√(δ(1−δ)/trials).
    pub threshold: f64,
    /// Snapshots at which the bound was undefined (e.g. outside its domain) and skipped.
    pub skipped_evaluations: u64,
}

impl CoverageReport {
    pub fn passes(&self) -> bool {
        self.rate <= self.threshold
    }

    pub fn csv_header() -> Vec<String> {
        ["bound", "trials", "violations", "rate", "wilson_lo", "wilson_hi", "delta", "threshold", "skipped_evaluations"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn csv_record(&self) -> Vec<String> {
        use crate::bounds::format_value as f;
        vec![
            self.bound.clone(),
            self.trials.to_string(),
            self.violations.to_string(),
            f(self.rate),
            f(self.wilson_lo),
            f(self.wilson_hi),
            f(self.delta),
            f(self.threshold),
            self.skipped_evaluations.to_string(),
        ]
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn coverage_threshold(delta: f64, trials: u64) -> f64 {
    delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt()
}

/// Checks that `bound` can be evaluated on states produced by `scenario`, using a probe state
/// with `V = e²·U0` at `t = 1`.
pub fn check_compatible(bound: &BoundSpec, scenario: &ScenarioConfig, delta: f64) -> Result<()> {
    scenario.validate()?;
    let mut probe_cfg = scenario.clone();
    probe_cfg.horizon = 1;
    let mut initial = None;
    run_scenario_with(&probe_cfg, NoiseSource::new(0), |s| {
        if initial.is_none() {
            initial = Some(s.clone());
        }
        Ok(())
    })?;
    let s0 = initial.expect("scenario visits t = 0");
    let v = s0.u0().scaled(std::f64::consts::E.powi(2))?;
    let probe = ProcessState::from_parts(1, s0.s().clone(), v, s0.u0().clone(), s0.psi().clone())?;
    let probe = match s0.mu_hat() {
        Some(m) => probe.with_mean(m.clone())?,
        None => probe,
    };
    bound.evaluate(&probe, delta).map(|_| ()).map_err(|e| {
        Error::config(format!(
            "bound {} cannot be evaluated on a sub-{} scenario: {e}",
            bound.label(),
            s0.psi().label()
        ))
    })
}

struct TrialOutcome {
    violated: bool,
    skipped: u64,
}

fn run_trial(bound: &BoundSpec, scenario: &ScenarioConfig, delta: f64, trial: u64) -> Result<TrialOutcome> {
    let mut out = TrialOutcome { violated: false, skipped: 0 };
    run_scenario_with(scenario, NoiseSource::for_trial(scenario.seed, trial), |state| {
        if out.violated || state.t() == 0 {
            return Ok(());
        }
        match bound.evaluate(state, delta) {
            Ok(r) => {
                if r.is_violated_by(state.self_norm()?) {
                    out.violated = true;
                }
                Ok(())
            }
            Err(Error::Domain(_)) => {
                out.skipped += 1;
                Ok(())
            }
            Err(e) => Err(e),
        }
    })?;
    Ok(out)
}

/// Simulates `trials` independent paths of `scenario` (with its horizon replaced by `horizon`)
/// and counts those on which `bound` is violated at some recorded `t ≥ 1`.
pub fn run_coverage(
    bound: &BoundSpec,
    scenario: &ScenarioConfig,
    delta: f64,
    trials: u64,
    horizon: u64,
) -> Result<CoverageReport> {
    if trials < MIN_TRIALS {
        return Err(Error::config(format!("coverage needs at least {MIN_TRIALS} trials, got {trials}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::config(format!("delta must lie in (0, 1], got {delta}")));
    }
    let mut cfg = scenario.clone();
    cfg.horizon = horizon;
    check_compatible(bound, &cfg, delta)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| run_trial(bound, &cfg, delta, trial))
        .collect::<Result<Vec<_>>>()?;
    let violations = outcomes.iter().filter(|o| o.violated).count() as u64;
    let skipped_evaluations = outcomes.iter().map(|o| o.skipped).sum();
    let (wilson_lo, wilson_hi) = wilson_interval(violations, trials, WILSON_Z);
    Ok(CoverageReport {
        bound: bound.label(),
        trials,
        violations,
        rate: violations as f64 / trials as f64,
        wilson_lo,
        wilson_hi,
        delta,
        threshold: coverage_threshold(delta, trials),
        skipped_evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{Noise, UpdateRule};

    #[test]
    fn wilson_matches_hand_values() {
        let (lo, hi) = wilson_interval(0, 100, WILSON_Z);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, WILSON_Z);
        assert!((lo - 0.403832).abs() < 1e-5 && (hi - 0.596168).abs() < 1e-5);
    }

    #[test]
    fn threshold_for_two_thousand_trials() {
        assert!((coverage_threshold(0.05, 2000) - 0.0646).abs() < 1e-4);
    }

    #[test]
    fn mismatched_psi_is_a_config_error() {
        let cfg = ScenarioConfig::new(3, 10, 1, UpdateRule::IidIsotropic, Noise::BoundedSphere { b: 1.0 });
        let err = run_coverage(&BoundSpec::SubGaussian, &cfg, 0.05, 100, 10).unwrap_err();
        assert_eq!(err.code(), "CONFIG");
    }

    #[test]
    fn delta_one_is_well_formed() {
        let cfg = ScenarioConfig::new(2, 20, 3, UpdateRule::IidIsotropic, Noise::Gaussian { sigma: 1.0 });
        let r = run_coverage(&BoundSpec::SubGaussian, &cfg, 1.0, 100, 20).unwrap();
        assert!(r.rate >= 0.0 && r.rate <= 1.0);
        assert!(r.violations <= r.trials);
        assert_eq!(r.threshold, 1.0);
    }

    #[test]
    fn too_few_trials_rejected() {
        let cfg = ScenarioConfig::new(2, 20, 3, UpdateRule::IidIsotropic, Noise::Gaussian { sigma: 1.0 });
        assert!(run_coverage(&BoundSpec::SubGaussian, &cfg, 0.05, 10, 20).is_err());
    }
}
