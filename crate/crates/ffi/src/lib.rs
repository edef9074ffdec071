//! C ABI over `snconc`.
//!
//! Conventions:
//! * every fallible call returns an [`SncStatus`]; outputs go through pointer arguments;
//! * on failure, [`snc_last_error_message`] describes the error on the calling thread;
//! * handles are created by `*_new` and released by the matching `*_free` (null is ignored);
//! * matrices are row-major `dim × dim` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use nalgebra::DVector;
use snconc::bounds::WhitehouseParams;
use snconc::{BoundKind, BoundSpec, Error, Family, ProcessState, PsiSpec, SymPosDef};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SncStatus {
    Ok = 0,
    Domain = 1,
    Convergence = 2,
    Factorization = 3,
    DimensionMismatch = 4,
    BoundViolation = 5,
    Config = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SncFamily {
    Normal = 0,
    Gamma = 1,
    NegExp = 2,
    Poisson = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SncBoundKind {
    SubGaussian = 0,
    LineCrossing = 1,
    Bennett = 2,
    Bernstein = 3,
    EmpiricalBernstein = 4,
    StitchedGeneral = 5,
    StitchedPreset = 6,
    EmpiricalBernsteinStitched = 7,
    ConjugateRate = 8,
    ConjugateRateCorollary = 9,
    Whitehouse = 10,
}

/// Bound choice. Only the fields used by `kind` are read:
/// `lambda` (fixed-λ bounds), `c` (Bernstein, stitched, Whitehouse), `b` (Bennett),
/// `rho` (empirical Bernstein; optional Whitehouse ρ when finite), `eta` (general stitching),
/// `constant` (conjugate-rate forms), `whitehouse_a` / `whitehouse_b`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SncBoundSpec {
    pub kind: SncBoundKind,
    pub lambda: f64,
    pub c: f64,
    pub b: f64,
    pub rho: f64,
    pub eta: f64,
    pub constant: f64,
    pub whitehouse_a: f64,
    pub whitehouse_b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SncBoundResult {
    pub kind: SncBoundKind,
    /// Radius as reported by the bound (squared for the sub-Gaussian form); +inf when vacuous.
    pub radius: f64,
    /// Threshold on the self-normalized norm.
    pub norm_threshold: f64,
    pub valid: bool,
}

/// Opaque ψ handle.
pub struct SncPsi(PsiSpec);

/// Opaque process-state handle.
pub struct SncState(ProcessState);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SncStatus {
    match e {
        Error::Domain(_) => SncStatus::Domain,
        Error::Convergence(_) => SncStatus::Convergence,
        Error::Factorization(_) => SncStatus::Factorization,
        Error::DimensionMismatch { .. } => SncStatus::DimensionMismatch,
        Error::BoundViolation(_) => SncStatus::BoundViolation,
        Error::Config(_) => SncStatus::Config,
        Error::Io(_) => SncStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SncStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SncStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(&format!("{}: {e}", e.code()));
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_last_error(&format!("NULL_POINTER: {what} is null"));
            SncStatus::NullPointer
        }
        Err(_) => {
            set_last_error("PANIC: internal panic caught at the FFI boundary");
            SncStatus::Panic
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn nonnull_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn array<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    // SAFETY: caller guarantees `out` points to writable storage for a `T`.
    unsafe { out.write(value) };
    Ok(())
}

fn to_kind(k: BoundKind) -> SncBoundKind {
    match k {
        BoundKind::SubGaussian => SncBoundKind::SubGaussian,
        BoundKind::LineCrossing => SncBoundKind::LineCrossing,
        BoundKind::Bennett => SncBoundKind::Bennett,
        BoundKind::Bernstein => SncBoundKind::Bernstein,
        BoundKind::EmpiricalBernstein => SncBoundKind::EmpiricalBernstein,
        BoundKind::StitchedGeneral => SncBoundKind::StitchedGeneral,
        BoundKind::StitchedPreset => SncBoundKind::StitchedPreset,
        BoundKind::EmpiricalBernsteinStitched => SncBoundKind::EmpiricalBernsteinStitched,
        BoundKind::ConjugateRate => SncBoundKind::ConjugateRate,
        BoundKind::ConjugateRateCorollary => SncBoundKind::ConjugateRateCorollary,
        BoundKind::Whitehouse => SncBoundKind::Whitehouse,
    }
}

fn to_spec(s: &SncBoundSpec) -> BoundSpec {
    match s.kind {
        SncBoundKind::SubGaussian => BoundSpec::SubGaussian,
        SncBoundKind::LineCrossing => BoundSpec::LineCrossing { lambda: s.lambda },
        SncBoundKind::Bennett => BoundSpec::Bennett { lambda: s.lambda, b: s.b },
        SncBoundKind::Bernstein => BoundSpec::Bernstein { lambda: s.lambda, c: s.c },
        SncBoundKind::EmpiricalBernstein => BoundSpec::EmpiricalBernstein { lambda: s.lambda, rho: s.rho },
        SncBoundKind::StitchedGeneral => BoundSpec::StitchedGeneral { c: s.c, eta: s.eta },
        SncBoundKind::StitchedPreset => BoundSpec::StitchedPreset { c: s.c },
        SncBoundKind::EmpiricalBernsteinStitched => BoundSpec::EmpiricalBernsteinStitched { rho: s.rho },
        SncBoundKind::ConjugateRate => BoundSpec::ConjugateRate { constant: s.constant },
        SncBoundKind::ConjugateRateCorollary => BoundSpec::ConjugateRateCorollary { constant: s.constant },
        SncBoundKind::Whitehouse => {
            let mut p = WhitehouseParams::new(s.c, s.whitehouse_a, s.whitehouse_b);
            p.rho = s.rho.is_finite().then_some(s.rho);
            BoundSpec::Whitehouse(p)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn snc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last failed call on this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn snc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Stable upper-case name of a status code.
#[no_mangle]
pub extern "C" fn snc_status_name(status: SncStatus) -> *const c_char {
    let s: &'static str = match status {
        SncStatus::Ok => "OK\0",
        SncStatus::Domain => "DOMAIN\0",
        SncStatus::Convergence => "CONVERGENCE\0",
        SncStatus::Factorization => "FACTORIZATION\0",
        SncStatus::DimensionMismatch => "DIMENSION_MISMATCH\0",
        SncStatus::BoundViolation => "BOUND_VIOLATION\0",
        SncStatus::Config => "CONFIG\0",
        SncStatus::Io => "IO\0",
        SncStatus::NullPointer => "NULL_POINTER\0",
        SncStatus::Panic => "PANIC\0",
    };
    s.as_ptr().cast()
}

/// ψ of a named family; `c` is ignored for `Normal`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn snc_psi_new(family: SncFamily, c: f64, out: *mut *mut SncPsi) -> SncStatus {
    guard(|| {
        let family = match family {
            SncFamily::Normal => Family::Normal,
            SncFamily::Gamma => Family::Gamma,
            SncFamily::NegExp => Family::NegExp,
            SncFamily::Poisson => Family::Poisson,
        };
        let psi = PsiSpec::named(family, c)?;
        write_out(out, Box::into_raw(Box::new(SncPsi(psi))), "out")
    })
}

/// # Safety
/// `psi` must be null or a handle from [`snc_psi_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn snc_psi_free(psi: *mut SncPsi) {
    if !psi.is_null() {
        drop(Box::from_raw(psi));
    }
}

/// Right end of the domain of ψ (`+inf` when unbounded); NaN for a null handle.
///
/// # Safety
/// `psi` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn snc_psi_lambda_max(psi: *const SncPsi) -> f64 {
    psi.as_ref().map_or(f64::NAN, |p| p.0.lambda_max())
}

macro_rules! psi_scalar {
    ($(#[$doc:meta])* $name:ident, $method:ident) => {
        $(#[$doc])*
        ///
        /// # Safety
        /// `psi` must be a live handle and `out` writable.
        #[no_mangle]
        pub unsafe extern "C" fn $name(psi: *const SncPsi, x: f64, out: *mut f64) -> SncStatus {
            guard(|| {
                let p = nonnull(psi, "psi")?;
                let v = p.0.$method(x)?;
                write_out(out, v, "out")
            })
        }
    };
}

psi_scalar!(
    /// ψ(λ).
    snc_psi_eval, eval
);
psi_scalar!(
    /// ψ'(λ).
    snc_psi_derivative, derivative
);
psi_scalar!(
    /// ψ^{-1}(z) for z ≥ 0.
    snc_psi_inverse, inverse
);
psi_scalar!(
    /// ψ*(u) = sup_λ (λu − ψ(λ)).
    snc_psi_conjugate, conjugate
);
psi_scalar!(
    /// (ψ*)^{-1}(y).
    snc_psi_conjugate_inverse, conjugate_inverse
);

/// Fresh state `S = 0`, `V = U0`, tagged with a copy of `psi`.
///
/// # Safety
/// `u0` must point to `dim*dim` doubles, `psi` must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snc_state_new(
    dim: usize,
    u0: *const f64,
    psi: *const SncPsi,
    out: *mut *mut SncState,
) -> SncStatus {
    guard(|| {
        let u0 = SymPosDef::from_row_major(dim, array(u0, dim.saturating_mul(dim), "u0")?)?;
        let psi = nonnull(psi, "psi")?.0.clone();
        write_out(out, Box::into_raw(Box::new(SncState(ProcessState::new(u0, psi)))), "out")
    })
}

/// State from recorded parts; requires `V ⪰ U0`.
///
/// # Safety
/// `s` must hold `dim` doubles, `v` and `u0` `dim*dim` each; `psi` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snc_state_from_parts(
    t: u64,
    dim: usize,
    s: *const f64,
    v: *const f64,
    u0: *const f64,
    psi: *const SncPsi,
    out: *mut *mut SncState,
) -> SncStatus {
    guard(|| {
        let n = dim.saturating_mul(dim);
        let s = DVector::from_column_slice(array(s, dim, "s")?);
        let v = SymPosDef::from_row_major(dim, array(v, n, "v")?)?;
        let u0 = SymPosDef::from_row_major(dim, array(u0, n, "u0")?)?;
        let psi = nonnull(psi, "psi")?.0.clone();
        let state = ProcessState::from_parts(t, s, v, u0, psi)?;
        write_out(out, Box::into_raw(Box::new(SncState(state))), "out")
    })
}

/// Empirical-Bernstein accumulator with `U0 = ρI`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn snc_state_empirical_bernstein(dim: usize, rho: f64, out: *mut *mut SncState) -> SncStatus {
    guard(|| {
        let state = ProcessState::empirical_bernstein(dim, rho)?;
        write_out(out, Box::into_raw(Box::new(SncState(state))), "out")
    })
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn snc_state_free(state: *mut SncState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of increments absorbed; 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn snc_state_t(state: *const SncState) -> u64 {
    state.as_ref().map_or(0, |s| s.0.t())
}

/// Dimension; 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn snc_state_dim(state: *const SncState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// `S += η x`, `V += σ² x xᵀ`.
///
/// # Safety
/// `state` live, `x` holds `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn snc_state_step_bandit(state: *mut SncState, x: *const f64, eta: f64, sigma: f64) -> SncStatus {
    guard(|| {
        let st = nonnull_mut(state, "state")?;
        let x = DVector::from_column_slice(array(x, st.0.dim(), "x")?);
        Ok(st.0.step_subgaussian_bandit(&x, eta, sigma)?)
    })
}

/// `S += x`, `V += x xᵀ` for conditionally symmetric increments.
///
/// # Safety
/// `state` live, `x` holds `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn snc_state_step_symmetric(state: *mut SncState, x: *const f64) -> SncStatus {
    guard(|| {
        let st = nonnull_mut(state, "state")?;
        let x = DVector::from_column_slice(array(x, st.0.dim(), "x")?);
        Ok(st.0.step_symmetric(&x)?)
    })
}

/// Empirical-Bernstein update with the running mean.
///
/// # Safety
/// `state` live, `x` holds `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn snc_state_step_empirical_bernstein(state: *mut SncState, x: *const f64) -> SncStatus {
    guard(|| {
        let st = nonnull_mut(state, "state")?;
        let x = DVector::from_column_slice(array(x, st.0.dim(), "x")?);
        Ok(st.0.step_empirical_bernstein(&x)?)
    })
}

/// ‖S‖_{V^{-1}}.
///
/// # Safety
/// `state` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snc_state_self_norm(state: *const SncState, out: *mut f64) -> SncStatus {
    guard(|| {
        let v = nonnull(state, "state")?.0.self_norm()?;
        write_out(out, v, "out")
    })
}

/// log det V − log det U0.
///
/// # Safety
/// `state` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snc_state_log_det_ratio(state: *const SncState, out: *mut f64) -> SncStatus {
    guard(|| {
        let v = nonnull(state, "state")?.0.log_det_ratio();
        write_out(out, v, "out")
    })
}

/// Spec with defaults: η = 2, constant = 1, c = 1, A = B = 1, the rest NaN.
#[no_mangle]
pub extern "C" fn snc_bound_spec_default(kind: SncBoundKind) -> SncBoundSpec {
    SncBoundSpec {
        kind,
        lambda: f64::NAN,
        c: 1.0,
        b: f64::NAN,
        rho: f64::NAN,
        eta: 2.0,
        constant: 1.0,
        whitehouse_a: 1.0,
        whitehouse_b: 1.0,
    }
}

/// Evaluates a bound. A vacuous bound is a success with `valid = false` and infinite radius.
///
/// # Safety
/// `state` live, `spec` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snc_bound_eval(
    state: *const SncState,
    spec: *const SncBoundSpec,
    delta: f64,
    out: *mut SncBoundResult,
) -> SncStatus {
    guard(|| {
        let st = nonnull(state, "state")?;
        let spec = to_spec(nonnull(spec, "spec")?);
        let r = spec.evaluate(&st.0, delta)?;
        let res = SncBoundResult {
            kind: to_kind(r.kind),
            radius: r.radius,
            norm_threshold: r.norm_threshold(),
            valid: r.valid,
        };
        write_out(out, res, "out")
    })
}
