//! Straight-line recomputation of every radius from raw matrices, sharing no numerics with
//! the library beyond nalgebra's dense eigen/LU routines.

#![allow(dead_code)]

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use snconc::bounds::BoundSpec;
use snconc::psi::Family;
use snconc::ProcessState;

#[derive(Debug, Clone, Copy)]
pub enum Tag {
    Normal,
    Gamma(f64),
    NegExp(f64),
    Poisson(f64),
}

impl Tag {
    pub fn of(state: &ProcessState) -> Tag {
        let c = state.psi().scale().unwrap_or(1.0);
        match state.psi().family() {
            Family::Normal => Tag::Normal,
            Family::Gamma => Tag::Gamma(c),
            Family::NegExp => Tag::NegExp(c),
            Family::Poisson => Tag::Poisson(c),
            Family::Custom => panic!("oracle covers named families only"),
        }
    }

    pub fn psi(self, l: f64) -> f64 {
        match self {
            Tag::Normal => l * l / 2.0,
            Tag::Gamma(c) => l * l / (2.0 * (1.0 - c * l)),
            Tag::NegExp(c) => (-(1.0 - c * l).ln() - c * l) / (c * c),
            Tag::Poisson(c) => ((c * l).exp() - c * l - 1.0) / (c * c),
        }
    }

    pub fn lambda_max(self) -> f64 {
        match self {
            Tag::Gamma(c) | Tag::NegExp(c) => 1.0 / c,
            _ => f64::INFINITY,
        }
    }

    pub fn psi_inv(self, z: f64) -> f64 {
        match self {
            Tag::Normal => (2.0 * z).sqrt(),
            Tag::Gamma(c) => 2.0 / (c + (c * c + 2.0 / z).sqrt()),
            _ => {
                let hi = if self.lambda_max().is_finite() { self.lambda_max() } else { 1e3 };
                bisect(|l| self.psi(l), z, 0.0, hi)
            }
        }
    }

    /// ψ* in closed form.
    pub fn conj(self, u: f64) -> f64 {
        match self {
            Tag::Normal => u * u / 2.0,
            Tag::Gamma(c) => u * u / (1.0 + c * u + (1.0 + 2.0 * c * u).sqrt()),
            Tag::NegExp(c) => (c * u - (c * u).ln_1p()) / (c * c),
            Tag::Poisson(c) => ((1.0 + c * u) * (c * u).ln_1p() - c * u) / (c * c),
        }
    }

    pub fn conj_inv(self, y: f64) -> f64 {
        match self {
            Tag::Normal => (2.0 * y).sqrt(),
            Tag::Gamma(c) => (2.0 * y).sqrt() + c * y,
            _ => bisect(|u| self.conj(u), y, 0.0, 1e6),
        }
    }
}

pub fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub struct Raw {
    pub d: usize,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
    pub u0: DMatrix<f64>,
    pub tag: Tag,
}

fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

impl Raw {
    pub fn of(state: &ProcessState) -> Raw {
        Raw {
            d: state.dim(),
            s: state.s().clone(),
            v: state.v().matrix().clone(),
            u0: state.u0().matrix().clone(),
            tag: Tag::of(state),
        }
    }

    pub fn log_det_v(&self) -> f64 {
        self.v.clone().lu().determinant().ln()
    }

    pub fn log_det_ratio(&self) -> f64 {
        self.log_det_v() - self.u0.clone().lu().determinant().ln()
    }

    pub fn v_extremes(&self) -> (f64, f64) {
        let e = eigenvalues(&self.v);
        (e[0], e[e.len() - 1])
    }

    pub fn u0_extremes(&self) -> (f64, f64) {
        let e = eigenvalues(&self.u0);
        (e[0], e[e.len() - 1])
    }

    pub fn self_norm(&self) -> f64 {
        let inv = self.v.clone().try_inverse().unwrap();
        (self.s.transpose() * inv * &self.s)[(0, 0)].sqrt()
    }

    /// max_x xᵀU0x / xᵀVx via V^{-1/2} U0 V^{-1/2}.
    pub fn alpha(&self) -> f64 {
        let eig = SymmetricEigen::new(self.v.clone());
        let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
        let w = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
        let m = &w * &self.u0 * &w;
        let m = (&m + m.transpose()) * 0.5;
        *eigenvalues(&m).last().unwrap()
    }
}

/// Fixed-λ line-crossing radius for ψ = `tag`; `None` when g = 0.
pub fn line_crossing(raw: &Raw, tag: Tag, delta: f64, lambda: f64) -> Option<f64> {
    let alpha = raw.alpha().min(1.0);
    let z = tag.psi_inv(lambda);
    let g = (1.0 - alpha) / ((alpha * z + 1.0 - alpha).sqrt() + (alpha * z).sqrt());
    if g <= 0.0 {
        return None;
    }
    let root_norm = raw.u0_extremes().1.sqrt();
    let d = 0.5 * raw.log_det_ratio() + 1.0 + (1.0 / delta).ln();
    Some(root_norm / (lambda * g) * d + g * tag.psi(lambda) / (lambda * root_norm))
}

fn stitched(raw: &Raw, delta: f64, c: f64, eta: f64, preset: bool) -> Option<f64> {
    let ldv = raw.log_det_v();
    let lid = (1.0 / delta).ln();
    let (rho, u0_max) = raw.u0_extremes();
    let (v_min, _) = raw.v_extremes();
    let (d, coef) = if preset {
        (0.5 * raw.log_det_ratio() + 1.5 + 2.0 * (ldv / 2f64.ln() + 1.0).ln() + lid, 1.60)
    } else {
        let k = (ldv / eta.ln()).max(0.0);
        let ell = (k + 1.0).powi(2) * PI * PI / 6.0;
        let alpha = 1.0 + eta.ln() / (1.0 + lid - eta.ln() / 2.0) + 9.0 / 4.0;
        (0.5 * raw.log_det_ratio() + 1.0 + ell.ln() + lid, (alpha / 2.0).sqrt())
    };
    let r = u0_max / v_min;
    let h = if r >= 1.0 { 0.0 } else { (1.0 - r).sqrt() - (r * 2.0 / (c + (c * c + 2.0 * c).sqrt())).sqrt() };
    if h <= 0.0 {
        return None;
    }
    let max_term = ((c + (c * c + 2.0 * rho).sqrt()) / (2.0 * rho)).max((d / 2.0).sqrt());
    Some((c * d + coef * d.sqrt() + max_term) / h)
}

fn conjugate_rate(raw: &Raw, delta: f64, constant: f64, corollary: bool) -> Option<f64> {
    let (v_min, _) = raw.v_extremes();
    if v_min <= 1.0 {
        return None;
    }
    let lid = (1.0 / delta).ln();
    let loglog = if corollary { 0.0 } else { raw.self_norm().max(E).ln().ln() };
    let arg = (raw.log_det_v() + loglog + lid) / (1.0 - 1.0 / v_min).sqrt();
    let mut pre = 1.0;
    if corollary {
        let rho = raw.u0_extremes().0;
        let s = (1.0 - 1.0 / rho).sqrt();
        let h = 1e-6;
        let slope = (raw.tag.conj_inv(lid + h) - raw.tag.conj_inv(lid - h)) / (2.0 * h);
        pre = s / (s - slope);
    }
    Some(constant * pre * raw.tag.conj_inv(arg))
}

fn whitehouse(raw: &Raw, delta: f64, c: f64, a: f64, b: f64) -> Option<f64> {
    let (beta, eta2, eps) = (2.0f64, 2.0f64, 0.5f64);
    let rho = raw.u0_extremes().0;
    let (v_min, v_max) = raw.v_extremes();
    let m1 = b * (a * ((v_max / rho).ln() / eta2.ln())).ln();
    let m2 = (1.0 / (delta * (1.0 - 1.0 / beta))).ln();
    let m3 = (raw.d as f64 + 1.0) * (beta * (v_max / v_min).sqrt() / eps).ln();
    let m = m1 + m2 + m3;
    if m < 0.0 {
        return None;
    }
    Some((4.0 * m).sqrt() / (1.0 - eps) + c * eta2 / v_min.sqrt() * m)
}

/// Oracle norm threshold for `spec` on `raw`; `None` means vacuous.
pub fn replay(raw: &Raw, spec: &BoundSpec, delta: f64) -> Option<f64> {
    match spec {
        BoundSpec::SubGaussian => Some((raw.log_det_ratio() + 2.0 * (1.0 / delta).ln()).sqrt()),
        BoundSpec::LineCrossing { lambda } => line_crossing(raw, raw.tag, delta, *lambda),
        BoundSpec::Bennett { lambda, b } => line_crossing(raw, Tag::Poisson(*b), delta, *lambda),
        BoundSpec::Bernstein { lambda, c } => line_crossing(raw, Tag::Gamma(*c), delta, *lambda),
        BoundSpec::EmpiricalBernstein { lambda, .. } => line_crossing(raw, Tag::NegExp(1.0), delta, *lambda),
        BoundSpec::StitchedGeneral { c, eta } => stitched(raw, delta, *c, *eta, false),
        BoundSpec::StitchedPreset { c } => stitched(raw, delta, *c, 2.0, true),
        BoundSpec::EmpiricalBernsteinStitched { .. } => stitched(raw, delta, 1.0, 2.0, true),
        BoundSpec::ConjugateRate { constant } => conjugate_rate(raw, delta, *constant, false),
        BoundSpec::ConjugateRateCorollary { constant } => conjugate_rate(raw, delta, *constant, true),
        BoundSpec::Whitehouse(p) => whitehouse(raw, delta, p.c, p.a, p.b),
    }
}

use snconc::bounds::WhitehouseParams;
use snconc::processes::{run_scenario, Noise, ProcessKind, ScenarioConfig, UpdateRule};

pub const REPLAY_TIMES: [u64; 5] = [20, 150, 400, 700, 1000];

fn snapshots_at(cfg: &ScenarioConfig) -> Vec<ProcessState> {
    let run = run_scenario(cfg).expect("scenario runs");
    REPLAY_TIMES
        .iter()
        .map(|&t| run.snapshots.iter().find(|s| s.t() == t).expect("dense snapshot").clone())
        .collect()
}

/// Twenty states from four scenarios, each with the bounds applicable to it.
pub fn replay_cases() -> Vec<(&'static str, ProcessState, Vec<BoundSpec>)> {
    let gaussian = Noise::Gaussian { sigma: 1.0 };
    let ucb = ScenarioConfig::new(10, 1000, 11, UpdateRule::UcbEigvec, gaussian.clone());
    let mut sphere = ScenarioConfig::new(6, 1000, 12, UpdateRule::IidIsotropic, Noise::BoundedSphere { b: 0.25 });
    sphere.u0_scale = 4.0;
    let damped = ScenarioConfig::new(20, 1000, 13, UpdateRule::DampedFullRankThenRankK { k: 5 }, gaussian);
    let mut eb = ScenarioConfig::new(3, 1000, 14, UpdateRule::IidIsotropic, Noise::BoundedSphere { b: 0.5 });
    eb.process = ProcessKind::EmpiricalBernstein { rho: 2.0 };

    let families: Vec<(&'static str, ScenarioConfig, Vec<BoundSpec>)> = vec![
        (
            "ucb_gaussian",
            ucb,
            vec![
                BoundSpec::SubGaussian,
                BoundSpec::LineCrossing { lambda: 2.0 },
                BoundSpec::Bennett { lambda: 2.0, b: 0.25 },
                BoundSpec::Bernstein { lambda: 2.0, c: 0.25 },
                BoundSpec::StitchedGeneral { c: 0.25, eta: 2.0 },
                BoundSpec::StitchedPreset { c: 0.25 },
                BoundSpec::Whitehouse(WhitehouseParams::new(0.25, 1.0, 1.0)),
            ],
        ),
        (
            "bounded_sphere",
            sphere,
            vec![
                BoundSpec::LineCrossing { lambda: 1.0 },
                BoundSpec::Bernstein { lambda: 1.0, c: 0.25 },
                BoundSpec::StitchedGeneral { c: 0.25, eta: 2.0 },
                BoundSpec::ConjugateRate { constant: 1.0 },
                BoundSpec::ConjugateRateCorollary { constant: 1.0 },
            ],
        ),
        (
            "damped_rank5",
            damped,
            vec![
                BoundSpec::StitchedPreset { c: 1.0 },
                BoundSpec::Whitehouse(WhitehouseParams::new(1.0, 1.0, 1.0)),
                BoundSpec::StitchedGeneral { c: 1.0, eta: 2.0 },
                BoundSpec::LineCrossing { lambda: 2.0 },
            ],
        ),
        (
            "empirical_bernstein",
            eb,
            vec![
                BoundSpec::EmpiricalBernstein { lambda: 0.9, rho: 2.0 },
                BoundSpec::EmpiricalBernsteinStitched { rho: 2.0 },
                BoundSpec::ConjugateRate { constant: 1.0 },
            ],
        ),
    ];
    families
        .into_iter()
        .flat_map(|(name, cfg, specs)| snapshots_at(&cfg).into_iter().map(move |s| (name, s, specs.clone())))
        .collect()
}

/// Relative discrepancy, with matching infinities counted as agreement.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }
}
