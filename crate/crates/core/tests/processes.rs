use nalgebra::{DMatrix, DVector};
use snconc::bounds::line_crossing_radius;
use snconc::processes::{
    run_scenario, run_scenario_with, Noise, NoiseSource, ProcessKind, ProcessState, ScenarioConfig, UpdateRule,
};
use snconc::psi::PsiSpec;
use snconc::SymPosDef;

fn all_configs() -> Vec<ScenarioConfig> {
    let g = Noise::Gaussian { sigma: 1.0 };
    let mut eb = ScenarioConfig::new(3, 150, 5, UpdateRule::IidIsotropic, Noise::BoundedSphere { b: 0.5 });
    eb.process = ProcessKind::EmpiricalBernstein { rho: 2.0 };
    vec![
        ScenarioConfig::new(4, 150, 1, UpdateRule::UcbEigvec, g.clone()),
        ScenarioConfig::new(4, 150, 2, UpdateRule::DampedFullRankThenRankK { k: 2 }, g.clone()),
        ScenarioConfig::new(4, 150, 3, UpdateRule::IidIsotropic, g),
        ScenarioConfig::new(4, 150, 4, UpdateRule::IidIsotropic, Noise::RademacherSymmetric),
        ScenarioConfig::new(4, 150, 4, UpdateRule::UcbEigvec, Noise::RademacherSymmetric),
        ScenarioConfig::new(4, 150, 6, UpdateRule::IidIsotropic, Noise::BoundedSphere { b: 1.0 }),
        eb,
    ]
}

#[test]
fn v_dominates_u0_and_det_is_monotone() {
    for cfg in all_configs() {
        let run = run_scenario(&cfg).unwrap();
        for s in &run.snapshots {
            assert!(s.v().loewner_gap(s.u0()).unwrap() >= -1e-10, "{cfg:?}");
        }
        for w in run.snapshots.windows(2) {
            assert!(w[1].v().log_det() >= w[0].v().log_det() - 1e-12, "{cfg:?}");
        }
    }
}

#[test]
fn identical_seeds_give_identical_paths() {
    for cfg in all_configs() {
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a.snapshots.len(), b.snapshots.len());
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(x.s(), y.s());
            assert_eq!(x.v().matrix(), y.v().matrix());
        }
        let mut other = cfg.clone();
        other.seed += 100;
        let c = run_scenario(&other).unwrap();
        assert_ne!(a.snapshots.last().unwrap().s(), c.snapshots.last().unwrap().s());
    }
}

#[test]
fn ucb_first_step_uses_tie_break() {
    let cfg = ScenarioConfig::new(2, 1, 0, UpdateRule::UcbEigvec, Noise::RademacherSymmetric);
    let run = run_scenario(&cfg).unwrap();
    let v = run.snapshots[1].v().matrix().clone();
    let e1 = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
    assert!((v - e1).amax() < 1e-12);
}

#[test]
fn rank_one_det_strictly_increases_and_rank_eight_grows_faster() {
    let g = Noise::Gaussian { sigma: 1.0 };
    let one = run_scenario(&ScenarioConfig::new(20, 500, 0, UpdateRule::DampedFullRankThenRankK { k: 1 }, g.clone())).unwrap();
    let eight = run_scenario(&ScenarioConfig::new(20, 500, 0, UpdateRule::DampedFullRankThenRankK { k: 8 }, g)).unwrap();
    for w in one.snapshots.windows(2) {
        assert!(w[1].v().log_det() > w[0].v().log_det());
    }
    let last = |r: &snconc::processes::ScenarioRun| r.snapshots.last().unwrap().v().log_det();
    assert!(last(&eight) > last(&one));
}

#[test]
fn snapshots_are_dense_then_strided() {
    let cfg = ScenarioConfig::new(2, 1200, 0, UpdateRule::IidIsotropic, Noise::RademacherSymmetric);
    let mut ts = Vec::new();
    run_scenario_with(&cfg, NoiseSource::new(0), |s| {
        ts.push(s.t());
        Ok(())
    })
    .unwrap();
    assert_eq!(ts.len(), 1001 + 20);
    assert_eq!(&ts[..3], &[0, 1, 2]);
    assert_eq!(*ts.last().unwrap(), 1200);
}

#[test]
fn empirical_bernstein_replay_is_bit_exact() {
    let d = 3;
    let rho = 2.0;
    let mut noise = NoiseSource::new(77);
    let xs: Vec<DVector<f64>> = (0..200).map(|_| noise.uniform_sphere(d, 0.5)).collect();
    let mut state = ProcessState::empirical_bernstein(d, rho).unwrap();
    for x in &xs {
        state.step_empirical_bernstein(x).unwrap();
    }
    let mut v = DMatrix::<f64>::identity(d, d) * rho;
    let mut s = DVector::<f64>::zeros(d);
    let mut mu = DVector::<f64>::zeros(d);
    for (t, x) in xs.iter().enumerate() {
        let c = x - &mu;
        for j in 0..d {
            for i in 0..d {
                v[(i, j)] += 1.0 * (c[i] * c[j]);
            }
        }
        s += x;
        mu = &s / (t + 1) as f64;
    }
    assert_eq!(state.v().matrix(), &v);
    assert_eq!(state.s(), &s);
    assert_eq!(state.mu_hat().unwrap(), &mu);
    assert_eq!(state.psi(), &PsiSpec::neg_exp(1.0).unwrap());
}

#[test]
fn empirical_bernstein_rejects_large_increments() {
    let mut state = ProcessState::empirical_bernstein(2, 2.0).unwrap();
    let err = state.step_empirical_bernstein(&DVector::from_vec(vec![0.6, 0.0])).unwrap_err();
    assert_eq!(err.code(), "BOUND_VIOLATION");
    assert!(ProcessState::empirical_bernstein(2, 1.0).is_err());
}

#[test]
fn gram_sum_oracle_for_bandit_steps() {
    let mut noise = NoiseSource::new(5);
    let d = 4;
    let sigma = 0.7;
    let mut state = ProcessState::new(SymPosDef::identity(d), PsiSpec::normal());
    let mut v = DMatrix::<f64>::identity(d, d);
    let mut s = DVector::<f64>::zeros(d);
    for _ in 0..100 {
        let x = noise.uniform_sphere(d, 1.0);
        let eta = sigma * noise.normal();
        state.step_subgaussian_bandit(&x, eta, sigma).unwrap();
        v += &x * x.transpose() * (sigma * sigma);
        s += &x * eta;
    }
    assert!((state.v().matrix() - v).amax() < 1e-12);
    assert!((state.s() - s).amax() < 1e-12);
}

#[test]
fn rescaling_keeps_line_crossing_available() {
    let cfg = ScenarioConfig::new(3, 200, 9, UpdateRule::IidIsotropic, Noise::Gaussian { sigma: 2.0 });
    let run = run_scenario(&cfg).unwrap();
    let last = run.snapshots.last().unwrap();
    assert!(last.rescale(1.0).unwrap().v().matrix() == last.v().matrix());
    let beta = 4.0;
    let scaled = last.rescale(beta).unwrap();
    // ‖S/√β‖ in (V/β)^{-1} equals ‖S‖ in V^{-1}.
    assert!((scaled.self_norm().unwrap() - last.self_norm().unwrap()).abs() < 1e-10);
    for l in [0.5, 1.0, 2.0] {
        let want = beta * PsiSpec::normal().eval(l / beta.sqrt()).unwrap();
        assert!((scaled.psi().eval(l).unwrap() - want).abs() < 1e-12);
    }
    let lambda = 1.0 / scaled.u0().gamma_min().unwrap();
    let lambda = scaled.psi().inverse(lambda).unwrap() * 1.5;
    let r = line_crossing_radius(&scaled, 0.05, lambda).unwrap();
    assert!(r.radius.is_finite() || !r.valid);
    let too_big = last.v().gamma_min().unwrap() * 2.0;
    assert_eq!(last.rescale(too_big).unwrap_err().code(), "DOMAIN");
}

#[test]
fn invalid_configs_are_config_errors() {
    let g = Noise::Gaussian { sigma: 1.0 };
    let bad = [
        ScenarioConfig::new(0, 10, 0, UpdateRule::UcbEigvec, g.clone()),
        ScenarioConfig::new(3, 10, 0, UpdateRule::DampedFullRankThenRankK { k: 4 }, g.clone()),
        ScenarioConfig::new(3, 10, 0, UpdateRule::UcbEigvec, Noise::BoundedSphere { b: 1.0 }),
        ScenarioConfig::new(3, 10, 0, UpdateRule::UcbEigvec, Noise::Gaussian { sigma: -1.0 }),
    ];
    for cfg in bad {
        assert_eq!(run_scenario(&cfg).unwrap_err().code(), "CONFIG");
    }
}
