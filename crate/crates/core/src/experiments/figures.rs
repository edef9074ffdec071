//! Figure tables: one row per snapshot (or per grid point for the ψ-curve figures).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::table::Table;
use crate::bounds::{
    format_value, g_factor, lambda_lower_bound, line_crossing_radius_for, stitched_subgamma_simplified,
    subgaussian_radius_sq, whitehouse_baseline, BoundResult, WhitehouseParams,
};
use crate::error::{Error, Result};
use crate::matstats::{rayleigh_max, SymPosDef};
use crate::processes::{run_scenario, Noise, ProcessState, ScenarioConfig, UpdateRule};
use crate::psi::PsiSpec;

/// Number of λ values in a figure grid.
pub const LAMBDA_GRID_SIZE: usize = 8;

/// For unbounded ψ the grid tops out at λ = ψ(10), i.e. ψ^{-1}(λ) = 10.
pub const UNBOUNDED_GRID_TOP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    Fig1Left,
    Fig1Right,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3,
    Fig4Left,
    Fig4Right,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1Left,
        FigureId::Fig1Right,
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig2c,
        FigureId::Fig3,
        FigureId::Fig4Left,
        FigureId::Fig4Right,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig1Left => "fig1_left",
            FigureId::Fig1Right => "fig1_right",
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig2c => "fig2c",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4Left => "fig4_left",
            FigureId::Fig4Right => "fig4_right",
        }
    }

    /// Whether the table is driven by a simulated scenario (rather than a ψ grid).
    pub fn uses_scenario(self) -> bool {
        !matches!(self, FigureId::Fig4Left | FigureId::Fig4Right)
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown figure id '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub figure_id: FigureId,
    pub scenario: ScenarioConfig,
    pub delta: f64,
    /// Sub-gamma scale used by the stitched, line-crossing and baseline columns.
    pub c: f64,
    /// Explicit λ grid; derived from the admissible interval when absent.
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    pub whitehouse_a: f64,
    pub whitehouse_b: f64,
}

impl FigureSpec {
    pub fn defaults(figure_id: FigureId) -> Self {
        let gaussian = Noise::Gaussian { sigma: 1.0 };
        let damped = |k| ScenarioConfig::new(20, 2000, 0, UpdateRule::DampedFullRankThenRankK { k }, gaussian.clone());
        let (scenario, c) = match figure_id {
            FigureId::Fig1Left | FigureId::Fig1Right => {
                (ScenarioConfig::new(10, 1000, 0, UpdateRule::UcbEigvec, gaussian.clone()), 0.25)
            }
            FigureId::Fig2a => (damped(1), 1.0),
            FigureId::Fig2b => (damped(4), 1.0),
            FigureId::Fig2c => (damped(8), 1.0),
            FigureId::Fig3 => (damped(5), 0.25),
            FigureId::Fig4Left | FigureId::Fig4Right => {
                (ScenarioConfig::new(1, 1, 0, UpdateRule::IidIsotropic, gaussian.clone()), 1.0)
            }
        };
        FigureSpec { figure_id, scenario, delta: 0.05, c, lambdas: None, whitehouse_a: 1.0, whitehouse_b: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::config(format!("c must be finite and > 0, got {}", self.c)));
        }
        if let Some(l) = &self.lambdas {
            if l.is_empty() || l.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::config("lambdas must be a nonempty list of positive numbers"));
            }
        }
        if self.figure_id.uses_scenario() {
            self.scenario.validate()?;
        }
        Ok(())
    }

    fn grid_for(&self, psi: &PsiSpec, u0: &SymPosDef) -> Result<Vec<f64>> {
        match &self.lambdas {
            Some(l) => Ok(l.clone()),
            None => lambda_grid(psi, u0),
        }
    }
}

/// [`LAMBDA_GRID_SIZE`] log-spaced λ from ψ^{-1}(1/γ_min(U0)) to 0.95·λ_max (or ψ(10) if λ_max = ∞).
pub fn lambda_grid(psi: &PsiSpec, u0: &SymPosDef) -> Result<Vec<f64>> {
    let lo = lambda_lower_bound(psi, u0)?;
    let hi = if psi.lambda_max().is_finite() {
        0.95 * psi.lambda_max()
    } else {
        psi.eval(UNBOUNDED_GRID_TOP)?
    };
    if !(hi > lo) {
        return Err(Error::config(format!(
            "empty lambda grid for {}: lower end {lo} is not below upper end {hi}",
            psi.label()
        )));
    }
    let n = LAMBDA_GRID_SIZE - 1;
    Ok((0..=n)
        .map(|i| if i == n { hi } else { lo * (hi / lo).powf(i as f64 / n as f64) })
        .collect())
}

/// Threshold on ‖S‖_{V^{-1}} for plotting: vacuous results and domain failures become ∞.
pub fn threshold_or_inf(result: Result<BoundResult>) -> Result<f64> {
    match result {
        Ok(r) if r.valid => Ok(r.norm_threshold()),
        Ok(_) | Err(Error::Domain(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

pub(crate) fn base_header() -> Vec<String> {
    ["t", "log_det_V", "gamma_min", "gamma_max", "kappa", "self_norm"].iter().map(|s| s.to_string()).collect()
}

pub(crate) fn base_row(state: &ProcessState) -> Result<Vec<String>> {
    let (lo, hi) = state.v().eigen_extremes()?;
    Ok(vec![
        state.t().to_string(),
        format_value(state.v().log_det()),
        format_value(lo),
        format_value(hi),
        format_value(state.v().kappa()?),
        format_value(state.self_norm()?),
    ])
}

fn curve_label(prefix: &str, psi: &PsiSpec, lambda: f64) -> String {
    format!("{prefix}[{};lambda={}]", psi.label(), format_value(lambda))
}

type Column = Box<dyn Fn(&ProcessState) -> Result<f64>>;

fn scenario_columns(spec: &FigureSpec, u0: &SymPosDef) -> Result<Vec<(String, Column)>> {
    let delta = spec.delta;
    let c = spec.c;
    let mut cols: Vec<(String, Column)> = Vec::new();
    match spec.figure_id {
        FigureId::Fig1Left => {
            cols.push(("alpha".into(), Box::new(|s: &ProcessState| rayleigh_max(s.u0(), s.v()))));
            let family = [
                PsiSpec::normal(),
                PsiSpec::gamma(c)?,
                PsiSpec::poisson(c)?,
                PsiSpec::neg_exp(c)?,
            ];
            for psi in family {
                for lambda in spec.grid_for(&psi, u0)? {
                    let p = psi.clone();
                    cols.push((
                        curve_label("g", &psi, lambda),
                        Box::new(move |s: &ProcessState| g_factor(&p, rayleigh_max(s.u0(), s.v())?.min(1.0), lambda)),
                    ));
                }
            }
        }
        FigureId::Fig1Right => {
            cols.push((
                "sub_gaussian".into(),
                Box::new(move |s: &ProcessState| threshold_or_inf(subgaussian_radius_sq(s, delta))),
            ));
            let psi = PsiSpec::normal();
            for lambda in spec.grid_for(&psi, u0)? {
                let p = psi.clone();
                cols.push((
                    curve_label("line_crossing", &psi, lambda),
                    Box::new(move |s: &ProcessState| threshold_or_inf(line_crossing_radius_for(s, &p, delta, lambda))),
                ));
            }
        }
        FigureId::Fig2a | FigureId::Fig2b | FigureId::Fig2c => {
            let params = WhitehouseParams::new(c, spec.whitehouse_a, spec.whitehouse_b);
            cols.push((
                "stitched_preset".into(),
                Box::new(move |s: &ProcessState| threshold_or_inf(stitched_subgamma_simplified(s, delta, c))),
            ));
            cols.push((
                "whitehouse".into(),
                Box::new(move |s: &ProcessState| threshold_or_inf(whitehouse_baseline(s, delta, &params))),
            ));
        }
        FigureId::Fig3 => {
            let psi = PsiSpec::gamma(c)?;
            for lambda in spec.grid_for(&psi, u0)? {
                let p = psi.clone();
                cols.push((
                    curve_label("line_crossing", &psi, lambda),
                    Box::new(move |s: &ProcessState| threshold_or_inf(line_crossing_radius_for(s, &p, delta, lambda))),
                ));
            }
            cols.push((
                "stitched_preset".into(),
                Box::new(move |s: &ProcessState| threshold_or_inf(stitched_subgamma_simplified(s, delta, c))),
            ));
        }
        FigureId::Fig4Left | FigureId::Fig4Right => {}
    }
    Ok(cols)
}

/// Builds the figure table. Deterministic given the spec (including its seed).
pub fn run_figure(spec: &FigureSpec) -> Result<Table> {
    spec.validate()?;
    match spec.figure_id {
        FigureId::Fig4Left => return psi_curves(),
        FigureId::Fig4Right => return psi_inverse_curves(),
        _ => {}
    }
    let run = run_scenario(&spec.scenario)?;
    let u0 = run.snapshots[0].u0().clone();
    let cols = scenario_columns(spec, &u0)?;
    let mut header = base_header();
    header.extend(cols.iter().map(|(name, _)| name.clone()));
    let mut table = Table::new(header);
    for state in &run.snapshots {
        let mut row = base_row(state)?;
        for (_, f) in &cols {
            row.push(format_value(f(state)?));
        }
        table.push(row);
    }
    Ok(table)
}

fn psi_curves() -> Result<Table> {
    let family = [PsiSpec::neg_exp(1.0)?, PsiSpec::gamma(1.0)?, PsiSpec::poisson(1.0)?];
    let mut header = vec!["lambda".to_string()];
    header.extend(family.iter().map(|p| format!("psi[{}]", p.label())));
    let mut table = Table::new(header);
    for i in 0..100 {
        let lambda = i as f64 / 100.0;
        let mut row = vec![format_value(lambda)];
        for p in &family {
            row.push(format_value(p.eval(lambda)?));
        }
        table.push(row);
    }
    Ok(table)
}

fn psi_inverse_curves() -> Result<Table> {
    let family = [PsiSpec::poisson(1.0)?, PsiSpec::gamma(1.0)?];
    let mut header = vec!["z".to_string()];
    header.extend(family.iter().map(|p| format!("psi_inv[{}]", p.label())));
    let mut table = Table::new(header);
    for i in 0..=100 {
        let z = i as f64 / 10.0;
        let mut row = vec![format_value(z)];
        for p in &family {
            row.push(format_value(p.inverse(z)?));
        }
        table.push(row);
    }
    Ok(table)
}
