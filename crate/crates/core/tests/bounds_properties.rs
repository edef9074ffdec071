mod common;

use std::f64::consts::LN_2;

use nalgebra::DVector;
use snconc::bounds::{
    bennett_radius, conjugate_rate_argument, corollary_prefactor, g_factor, line_crossing_radius,
    line_crossing_radius_for, stitched_subgamma_simplified, stitching_alpha, subgaussian_radius_sq,
    whitehouse_baseline, WhitehouseParams, ZetaStitching,
};
use snconc::{BoundSpec, ProcessState, PsiSpec, SymPosDef};

use common::{rel_err, replay, replay_cases, Raw};

fn state(t: u64, s: &[f64], v: &[f64], u0: &[f64], psi: PsiSpec) -> ProcessState {
    ProcessState::from_parts(
        t,
        DVector::from_row_slice(s),
        SymPosDef::diagonal(v).unwrap(),
        SymPosDef::diagonal(u0).unwrap(),
        psi,
    )
    .unwrap()
}

#[test]
fn evaluators_match_straight_line_replay() {
    for (name, st, specs) in replay_cases() {
        let raw = Raw::of(&st);
        for spec in &specs {
            let got = spec.evaluate(&st, 0.05).unwrap();
            let want = replay(&raw, spec, 0.05);
            assert_eq!(got.valid, want.is_some(), "{name} t={} {}", st.t(), spec.label());
            if let Some(w) = want {
                let err = rel_err(got.norm_threshold(), w);
                assert!(err < 1e-10, "{name} t={} {}: {} vs {w} ({err:e})", st.t(), spec.label(), got.norm_threshold());
            }
        }
    }
}

#[test]
fn smaller_delta_never_shrinks_the_radius() {
    for (name, st, specs) in replay_cases() {
        for spec in &specs {
            let loose = spec.evaluate(&st, 0.1).unwrap();
            let tight = spec.evaluate(&st, 0.01).unwrap();
            // The corollary prefactor falls as δ shrinks; only its conjugate term is monotone.
            let (a, b) = match spec {
                BoundSpec::ConjugateRateCorollary { .. } => {
                    (loose.component("conjugate_term").unwrap(), tight.component("conjugate_term").unwrap())
                }
                _ => (loose.radius, tight.radius),
            };
            assert!(b >= a, "{name} t={} {}: {b} < {a}", st.t(), spec.label());
        }
    }
}

#[test]
fn components_reassemble_and_stay_in_range() {
    for (name, st, specs) in replay_cases() {
        for spec in &specs {
            let r = spec.evaluate(&st, 0.05).unwrap();
            assert!(rel_err(r.reassemble(), r.radius) < 1e-12, "{name} {}", spec.label());
            if let Some(g) = r.component("g") {
                assert!((0.0..=1.0).contains(&g), "g = {g}");
            }
            if let Some(h) = r.component("H") {
                assert!((0.0..1.0).contains(&h), "H = {h}");
            }
        }
    }
}

#[test]
fn general_stitching_is_dominated_by_the_preset() {
    for (_, st, specs) in replay_cases() {
        for spec in &specs {
            if let BoundSpec::StitchedGeneral { c, .. } = spec {
                let general = spec.evaluate(&st, 0.05).unwrap().radius;
                let preset = BoundSpec::StitchedPreset { c: *c }.evaluate(&st, 0.05).unwrap().radius;
                assert!(general <= preset, "t={}: {general} > {preset}", st.t());
            }
        }
    }
}

#[test]
fn g_factor_examples() {
    let n = PsiSpec::normal();
    assert_eq!(g_factor(&n, 0.0, 0.7).unwrap(), 1.0);
    assert_eq!(g_factor(&n, 1.0, 0.7).unwrap(), 0.0);
    // α = 1/2 and ψ^{-1}(λ) = 1/2: √(3/4) − 1/2
    let g = g_factor(&n, 0.5, 0.125).unwrap();
    assert!((g - 0.36603).abs() < 1e-5);
}

#[test]
fn subgaussian_scalar_example() {
    let st = state(1, &[0.0], &[2.0], &[1.0], PsiSpec::normal());
    let r = subgaussian_radius_sq(&st, (-1.0f64).exp()).unwrap();
    assert!((r.radius - (LN_2 + 2.0)).abs() < 1e-15);
    assert!(subgaussian_radius_sq(&state(1, &[0.0], &[2.0], &[1.0], PsiSpec::gamma(1.0).unwrap()), 0.1).is_err());
}

#[test]
fn line_crossing_scalar_example() {
    let st = state(3, &[0.0], &[4.0], &[1.0], PsiSpec::normal());
    let r = line_crossing_radius(&st, (-1.0f64).exp(), 2.0).unwrap();
    let alpha = r.component("alpha").unwrap();
    assert!((alpha - 0.25).abs() < 1e-15);
    // ψ^{-1}(2) = 2, g = (3/4)/(√(1/2 + 3/4) + √(1/2)), D = ½ log 4 + 2
    let g = 0.75 / (1.25f64.sqrt() + 0.5f64.sqrt());
    let d = 0.5 * 4f64.ln() + 2.0;
    let want = d / (2.0 * g) + g * 2.0 / 2.0;
    assert!(rel_err(r.radius, want) < 1e-14, "{} vs {want}", r.radius);

    let flat = state(3, &[0.0], &[1.0], &[1.0], PsiSpec::normal());
    let vac = line_crossing_radius(&flat, 0.05, 2.0).unwrap();
    assert!(!vac.valid && vac.radius.is_infinite());
    assert!(line_crossing_radius(&st, 0.05, 0.5).is_err(), "lambda below psi^-1(1/gamma_min(U0))");
}

#[test]
fn bennett_is_line_crossing_with_poisson_psi() {
    let st = state(9, &[1.0, -2.0], &[5.0, 9.0], &[1.0, 1.0], PsiSpec::normal());
    let a = bennett_radius(&st, 0.05, 2.0, 0.5).unwrap();
    let b = line_crossing_radius_for(&st, &PsiSpec::poisson(0.5).unwrap(), 0.05, 2.0).unwrap();
    assert_eq!(a.radius.to_bits(), b.radius.to_bits());
}

#[test]
fn preset_offsets_and_vacuous_h() {
    let st = state(0, &[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0], PsiSpec::gamma(1.0).unwrap());
    let r = stitched_subgamma_simplified(&st, 0.05, 1.0).unwrap();
    assert!((r.component("D").unwrap() - (1.5 + 20f64.ln())).abs() < 1e-14);
    assert_eq!(r.component("H").unwrap(), 0.0);
    assert!(!r.valid);

    assert!(stitched_subgamma_simplified(&st, 0.8, 1.0).is_err(), "delta above 1/sqrt(2)");
    let small_u0 = state(5, &[0.0], &[4.0], &[0.5], PsiSpec::gamma(1.0).unwrap());
    assert!(stitched_subgamma_simplified(&small_u0, 0.05, 1.0).is_err(), "U0 below I");
}

#[test]
fn stitching_alpha_calibration() {
    for delta in [0.05, 1.0 / 2f64.sqrt()] {
        assert!(stitching_alpha(delta, 2.0, &ZetaStitching).unwrap() <= 5.07);
    }
    assert!(stitching_alpha(0.05, 1.0, &ZetaStitching).is_err());
}

#[test]
fn empirical_bernstein_stitched_h_grows_with_gamma_min() {
    let rho = 2.0;
    let mut last = f64::NEG_INFINITY;
    for scale in [2.5, 4.0, 8.0, 32.0] {
        let st = ProcessState::from_parts(
            10,
            DVector::zeros(3),
            SymPosDef::scaled_identity(3, scale).unwrap(),
            SymPosDef::scaled_identity(3, rho).unwrap(),
            PsiSpec::neg_exp(1.0).unwrap(),
        )
        .unwrap();
        let r = BoundSpec::EmpiricalBernsteinStitched { rho }.evaluate(&st, 0.05).unwrap();
        let h = r.component("H").unwrap();
        assert!(h < 1.0 && h >= last, "H = {h} after {last}");
        last = h;
    }
    let start = ProcessState::empirical_bernstein(3, rho).unwrap();
    let r = BoundSpec::EmpiricalBernsteinStitched { rho }.evaluate(&start, 0.05).unwrap();
    assert!((r.component("log_det_v").unwrap() - 3.0 * rho.ln()).abs() < 1e-14);
    let d = 1.5 + 2.0 * (3.0 * rho.ln() / LN_2 + 1.0).ln() + 20f64.ln();
    assert!((r.component("D").unwrap() - d).abs() < 1e-13);
    assert!(!r.valid);
}

#[test]
fn whitehouse_terms() {
    let params = WhitehouseParams::new(1.0, 1.0, 1.0);
    let st = state(4, &[0.0, 0.0, 0.0], &[6.0, 6.0, 6.0], &[1.0, 1.0, 1.0], PsiSpec::gamma(1.0).unwrap());
    let r = whitehouse_baseline(&st, 0.5, &params).unwrap();
    assert!((r.component("M3").unwrap() - 4.0 * 4f64.ln()).abs() < 1e-14);
    assert!((r.component("M2").unwrap() - 4f64.ln()).abs() < 1e-14);
    let flat = state(4, &[0.0], &[1.0], &[1.0], PsiSpec::gamma(1.0).unwrap());
    assert_eq!(whitehouse_baseline(&flat, 0.05, &params).unwrap_err().code(), "DOMAIN");
}

#[test]
fn conjugate_rate_argument_and_monotonicity() {
    let a = conjugate_rate_argument(1.0, 0.0, 1.0, 2.0).unwrap();
    assert!((a - 2.0 / 0.5f64.sqrt()).abs() < 1e-15);
    let spec = BoundSpec::ConjugateRate { constant: 1.0 };
    let mut last = 0.0;
    for v in [2.0, 4.0, 16.0, 256.0] {
        let st = state(7, &[0.5, 0.5], &[v, v], &[1.5, 1.5], PsiSpec::gamma(0.25).unwrap());
        let r = spec.evaluate(&st, 0.05).unwrap().radius;
        assert!(r > last, "{r} <= {last} at V = {v} I");
        last = r;
    }
    let normal = state(7, &[0.5], &[4.0], &[1.5], PsiSpec::normal());
    assert!(spec.evaluate(&normal, 0.05).is_err(), "needs a finite lambda_max");
}

#[test]
fn corollary_prefactor_is_not_monotone_in_delta() {
    let psi = PsiSpec::gamma(0.25).unwrap();
    let loose = corollary_prefactor(&psi, 0.1, 4.0).unwrap();
    let tight = corollary_prefactor(&psi, 0.01, 4.0).unwrap();
    assert!(tight < loose, "{tight} vs {loose}");
}

#[test]
fn corollary_prefactor_decreases_in_rho() {
    let psi = PsiSpec::gamma(0.25).unwrap();
    let values: Vec<f64> = [10.0, 100.0, 1e4].iter().map(|&rho| corollary_prefactor(&psi, 0.05, rho).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    assert!(values.iter().all(|&p| p > 1.0));
    assert!(corollary_prefactor(&psi, 0.05, 1.0).is_err());
}

#[test]
fn invalid_delta_is_a_domain_error() {
    let st = state(1, &[0.0], &[2.0], &[1.0], PsiSpec::normal());
    for delta in [0.0, -0.1, 1.5, f64::NAN] {
        assert_eq!(BoundSpec::SubGaussian.evaluate(&st, delta).unwrap_err().code(), "DOMAIN");
    }
    assert!(BoundSpec::SubGaussian.evaluate(&st, 1.0).is_ok());
}
