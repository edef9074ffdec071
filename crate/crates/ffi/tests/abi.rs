use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use snconc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(snc_last_error_message()) }.to_string_lossy().into_owned()
}

fn gamma(c: f64) -> *mut SncPsi {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { snc_psi_new(SncFamily::Gamma, c, &mut p) }, SncStatus::Ok);
    p
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(snc_version()) }.to_str().unwrap();
    assert_eq!(v, snconc::VERSION);
}

#[test]
fn psi_scalars_through_the_abi() {
    let p = gamma(1.0);
    let mut z = f64::NAN;
    assert_eq!(unsafe { snc_psi_inverse(p, 1.0, &mut z) }, SncStatus::Ok);
    assert!((z - (3f64.sqrt() - 1.0)).abs() < 1e-12);
    assert_eq!(unsafe { snc_psi_lambda_max(p) }, 1.0);
    let status = unsafe { snc_psi_eval(p, 2.0, &mut z) };
    assert_eq!(status, SncStatus::Domain);
    assert!(last_error().starts_with("DOMAIN"));
    unsafe { snc_psi_free(p) };

    let mut n = ptr::null_mut();
    assert_eq!(unsafe { snc_psi_new(SncFamily::Normal, 0.0, &mut n) }, SncStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { snc_psi_conjugate(n, 1.0, &mut v) }, SncStatus::Ok);
    assert!((v - 0.5).abs() < 1e-10);
    unsafe { snc_psi_free(n) };
}

#[test]
fn bound_matches_library_call() {
    let p = gamma(0.25);
    let u0 = [1.0, 0.0, 0.0, 1.0];
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { snc_state_new(2, u0.as_ptr(), p, &mut st) }, SncStatus::Ok);
    for x in [[1.0, 0.0], [0.0, 1.0], [0.6, -0.8]] {
        assert_eq!(unsafe { snc_state_step_symmetric(st, x.as_ptr()) }, SncStatus::Ok);
    }
    assert_eq!(unsafe { snc_state_t(st) }, 3);
    assert_eq!(unsafe { snc_state_dim(st) }, 2);

    let mut spec = snc_bound_spec_default(SncBoundKind::StitchedPreset);
    spec.c = 0.25;
    let mut r = SncBoundResult { kind: SncBoundKind::SubGaussian, radius: 0.0, norm_threshold: 0.0, valid: false };
    assert_eq!(unsafe { snc_bound_eval(st, &spec, 0.05, &mut r) }, SncStatus::Ok);
    assert_eq!(r.kind, SncBoundKind::StitchedPreset);

    let mut state = snconc::ProcessState::new(snconc::SymPosDef::identity(2), snconc::PsiSpec::gamma(0.25).unwrap());
    for x in [[1.0, 0.0], [0.0, 1.0], [0.6, -0.8]] {
        state.step_symmetric(&nalgebra::DVector::from_column_slice(&x)).unwrap();
    }
    let expected = snconc::BoundSpec::StitchedPreset { c: 0.25 }.evaluate(&state, 0.05).unwrap();
    assert_eq!(r.radius.to_bits(), expected.radius.to_bits());
    assert_eq!(r.valid, expected.valid);

    let mut norm = 0.0;
    assert_eq!(unsafe { snc_state_self_norm(st, &mut norm) }, SncStatus::Ok);
    assert_eq!(norm.to_bits(), state.self_norm().unwrap().to_bits());
    unsafe {
        snc_state_free(st);
        snc_psi_free(p);
    }
}

#[test]
fn vacuous_is_success_with_invalid_flag() {
    let mut n = ptr::null_mut();
    unsafe { snc_psi_new(SncFamily::Normal, 0.0, &mut n) };
    let u0 = [1.0];
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { snc_state_new(1, u0.as_ptr(), n, &mut st) }, SncStatus::Ok);
    let mut spec = snc_bound_spec_default(SncBoundKind::LineCrossing);
    spec.lambda = 2.0;
    let mut r = SncBoundResult { kind: SncBoundKind::SubGaussian, radius: 0.0, norm_threshold: 0.0, valid: true };
    assert_eq!(unsafe { snc_bound_eval(st, &spec, 0.05, &mut r) }, SncStatus::Ok);
    assert!(!r.valid);
    assert!(r.radius.is_infinite());
    unsafe {
        snc_state_free(st);
        snc_psi_free(n);
    }
}

#[test]
fn error_codes() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { snc_state_new(2, ptr::null(), ptr::null(), &mut out) }, SncStatus::NullPointer);
    assert!(last_error().contains("u0"));
    let p = gamma(1.0);
    let bad = [1.0, 2.0, 2.0, 1.0];
    assert_eq!(unsafe { snc_state_new(2, bad.as_ptr(), p, &mut out) }, SncStatus::Factorization);
    let v = [1.0, 0.0, 0.0, 1.0];
    let u0 = [2.0, 0.0, 0.0, 2.0];
    let s = [0.0, 0.0];
    let status = unsafe { snc_state_from_parts(1, 2, s.as_ptr(), v.as_ptr(), u0.as_ptr(), p, &mut out) };
    assert_eq!(status, SncStatus::Domain);
    assert_eq!(unsafe { snc_psi_new(SncFamily::Gamma, -1.0, &mut ptr::null_mut()) }, SncStatus::Domain);
    let name = unsafe { CStr::from_ptr(snc_status_name(SncStatus::DimensionMismatch)) };
    assert_eq!(name.to_str().unwrap(), "DIMENSION_MISMATCH");
    unsafe {
        snc_psi_free(p);
        snc_state_free(ptr::null_mut());
    }
}

#[test]
fn empirical_bernstein_state() {
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { snc_state_empirical_bernstein(2, 2.0, &mut st) }, SncStatus::Ok);
    let x = [0.3, 0.1];
    assert_eq!(unsafe { snc_state_step_empirical_bernstein(st, x.as_ptr()) }, SncStatus::Ok);
    let big = [1.0, 0.0];
    assert_eq!(unsafe { snc_state_step_empirical_bernstein(st, big.as_ptr()) }, SncStatus::BoundViolation);
    let mut spec = snc_bound_spec_default(SncBoundKind::EmpiricalBernsteinStitched);
    spec.rho = 2.0;
    let mut r = SncBoundResult { kind: SncBoundKind::SubGaussian, radius: 0.0, norm_threshold: 0.0, valid: false };
    assert_eq!(unsafe { snc_bound_eval(st, &spec, 0.05, &mut r) }, SncStatus::Ok);
    assert_eq!(r.kind, SncBoundKind::EmpiricalBernsteinStitched);
    unsafe { snc_state_free(st) };
}

#[test]
fn generated_header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include").join("snconc.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["snc_version", "snc_bound_eval", "snc_state_new", "SNC_STATUS_NULL_POINTER", "typedef struct SncState"] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let probe = std::env::temp_dir().join(format!("snconc_probe_{}.c", std::process::id()));
    std::fs::write(&probe, "#include \"snconc.h\"\nint main(void) { SncBoundSpec s = snc_bound_spec_default(SNC_BOUND_KIND_SUB_GAUSSIAN); return (int)s.kind; }\n").unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match Command::new(&cc).arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(dir.join("include")).arg(&probe).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(e) => eprintln!("skipping C syntax check, no compiler ({cc}): {e}"),
    }
    let _ = std::fs::remove_file(probe);
}
