//! C ABI over the gradsys laboratory.
//!
//! Conventions: every fallible function returns a [`GradsysStatus`] and
//! writes its results through out-pointers; `GRADSYS_STATUS_OK` is 0.
//! Trajectories are opaque handles created by [`gradsys_integrate`] and
//! released with [`gradsys_trajectory_free`]. The last error message of the
//! calling thread is available through [`gradsys_last_error`]. All entry
//! points catch panics and report them as `GRADSYS_STATUS_PANIC`.

use gradsys::error::Error;
use gradsys::model::{self, BallClassification};
use gradsys::ode::OdeOptions;
use gradsys::phase::{self, LimitVerdict, WhichEquilibrium};
use gradsys::shooter::{self, IntegrationControls, Outcome, RadialTrajectory};
use gradsys::SystemParams;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradsysStatus {
    Ok = 0,
    /// Parameter validation failed (dimension, signs, guard).
    InvalidParams = 1,
    /// The requested quantity needs p < 1 and ps + q < 1.
    HypothesisViolated = 2,
    /// A null out-pointer or handle was passed.
    NullPointer = 3,
    /// Integration failed (step underflow, monotonicity loss).
    IntegrationFailed = 4,
    /// No finite-radius blow-up for these inputs.
    NotABlowUp = 5,
    /// The trajectory cannot support the requested fit window.
    WindowTooShort = 6,
    /// Other invalid input (thresholds, grids, spans).
    InvalidInput = 7,
    /// A panic was caught at the boundary.
    Panic = 8,
}

fn status_for(e: &Error) -> GradsysStatus {
    match e {
        Error::HypothesisViolated { .. } => GradsysStatus::HypothesisViolated,
        Error::NonPositiveExponent { .. }
        | Error::NegativeWeight { .. }
        | Error::GradientExponentTooSmall { .. }
        | Error::DimensionTooSmall { .. }
        | Error::NonFiniteParameter { .. }
        | Error::GuardViolation { .. }
        | Error::NonPositiveInitialData { .. } => GradsysStatus::InvalidParams,
        Error::StepSizeUnderflow { .. }
        | Error::MonotonicityViolation { .. }
        | Error::PhaseDivergence { .. } => GradsysStatus::IntegrationFailed,
        Error::NotABlowUp { .. } => GradsysStatus::NotABlowUp,
        Error::WindowTooShort { .. } => GradsysStatus::WindowTooShort,
        _ => GradsysStatus::InvalidInput,
    }
}

fn fail(e: &Error) -> GradsysStatus {
    set_error(&e.to_string());
    status_for(e)
}

fn guarded<F: FnOnce() -> GradsysStatus>(body: F) -> GradsysStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic caught at the FFI boundary");
            GradsysStatus::Panic
        }
    }
}

/// System parameters (N, a, b, p, q, s).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GradsysParams {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl GradsysParams {
    fn validate(&self) -> Result<SystemParams, Error> {
        SystemParams::new(self.n, self.a, self.b, self.p, self.q, self.s)
    }
}

/// Three-way boundary classification (plus the out-of-theory marker).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradsysClass {
    AllBounded = 0,
    UBoundedVBlowsUp = 1,
    BothBlowUp = 2,
    OutOfTheory = 3,
}

impl From<BallClassification> for GradsysClass {
    fn from(c: BallClassification) -> Self {
        match c {
            BallClassification::AllBounded => GradsysClass::AllBounded,
            BallClassification::UBoundedVBlowsUp => GradsysClass::UBoundedVBlowsUp,
            BallClassification::BothBlowUp => GradsysClass::BothBlowUp,
            BallClassification::OutOfTheory(_) => GradsysClass::OutOfTheory,
        }
    }
}

/// Asymptotic exponents and log amplitudes.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GradsysProfile {
    pub a_lim: f64,
    pub b_lim: f64,
    pub k_lim: f64,
    pub d_lim: f64,
    pub rho_u_reported: f64,
    pub ln_c_v: f64,
    pub ln_c_u_derived: f64,
    pub ln_c_u_reported: f64,
}

/// Linear stability data at the attracting equilibrium.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GradsysStability {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub hurwitz_margin: f64,
    pub eigenvalues_re: [f64; 3],
    pub eigenvalues_im: [f64; 3],
    pub asymptotically_stable: bool,
}

/// Integrator controls; any field set to 0 selects the default
/// (r0 = 1e-6, r_max = 1e6, v_cap = 1e12, rel_tol = 1e-10, abs_tol = 1e-12).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GradsysControls {
    pub r0: f64,
    pub r_max: f64,
    pub v_cap: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

fn controls_from(c: Option<&GradsysControls>) -> IntegrationControls {
    let defaults = IntegrationControls::default();
    match c {
        None => defaults,
        Some(c) => {
            let pick = |v: f64, d: f64| if v > 0.0 { v } else { d };
            IntegrationControls {
                r0: pick(c.r0, defaults.r0),
                r_max: pick(c.r_max, defaults.r_max),
                v_cap: pick(c.v_cap, defaults.v_cap),
                rel_tol: pick(c.rel_tol, defaults.rel_tol),
                abs_tol: pick(c.abs_tol, defaults.abs_tol),
                ..defaults
            }
        }
    }
}

/// How an integration ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradsysOutcomeKind {
    GlobalUpTo = 0,
    BlowUp = 1,
    Aborted = 2,
}

/// Terminal report of a trajectory: for blow-ups, `radius` and
/// `uncertainty` localize the singularity; for global runs `radius` is the
/// radius reached.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GradsysOutcome {
    pub kind: GradsysOutcomeKind,
    pub radius: f64,
    pub uncertainty: f64,
}

/// Trailing log-log growth fit.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GradsysGrowthFit {
    pub slope_u: f64,
    pub slope_v: f64,
    pub log_amp_u: f64,
    pub log_amp_v: f64,
    pub slope_stderr_u: f64,
    pub slope_stderr_v: f64,
    pub rms_residual_u: f64,
    pub rms_residual_v: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub n_samples: usize,
}

/// Convergent / divergent / inconclusive.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradsysVerdict {
    Convergent = 0,
    Divergent = 1,
    Inconclusive = 2,
}

impl From<gradsys::ko::Verdict> for GradsysVerdict {
    fn from(v: gradsys::ko::Verdict) -> Self {
        match v {
            gradsys::ko::Verdict::Convergent => GradsysVerdict::Convergent,
            gradsys::ko::Verdict::Divergent => GradsysVerdict::Divergent,
            gradsys::ko::Verdict::Inconclusive => GradsysVerdict::Inconclusive,
        }
    }
}

/// Keller-Osserman verdicts on the plain and weighted integrals, plus the
/// classification they imply.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GradsysKoReport {
    pub plain_verdict: GradsysVerdict,
    pub plain_slope: f64,
    pub weighted_verdict: GradsysVerdict,
    pub weighted_slope: f64,
    pub classification: GradsysClass,
}

/// Where a phase flow settled.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradsysLimit {
    Undecided = 0,
    Xi1 = 1,
    Xi2 = 2,
}

/// Opaque handle to a completed radial trajectory.
pub struct GradsysTrajectory {
    inner: RadialTrajectory,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gradsys_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf` (truncated to
/// `cap - 1` bytes, always NUL-terminated) and returns the full length.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null (in which
/// case only the length is returned).
#[no_mangle]
pub unsafe extern "C" fn gradsys_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Closed-form boundary classification in a ball.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gradsys_classify_ball(
    params: GradsysParams,
    out: *mut GradsysClass,
) -> GradsysStatus {
    guarded(|| {
        if out.is_null() {
            return GradsysStatus::NullPointer;
        }
        match params.validate() {
            Ok(sp) => {
                *out = model::classify_ball(&sp).into();
                GradsysStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Whole-space existence predicate (ps + q - 1 <= 0).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gradsys_global_existence(
    params: GradsysParams,
    out: *mut bool,
) -> GradsysStatus {
    guarded(|| {
        if out.is_null() {
            return GradsysStatus::NullPointer;
        }
        match params.validate() {
            Ok(sp) => {
                *out = model::global_existence(&sp);
                GradsysStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Asymptotic exponents A, B, K, D and log amplitudes.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gradsys_asymptotic_profile(
    params: GradsysParams,
    out: *mut GradsysProfile,
) -> GradsysStatus {
    guarded(|| {
        if out.is_null() {
            return GradsysStatus::NullPointer;
        }
        let profile = match params.validate().and_then(|sp| model::asymptotic_profile(&sp)) {
            Ok(p) => p,
            Err(e) => return fail(&e),
        };
        *out = GradsysProfile {
            a_lim: profile.a_lim,
            b_lim: profile.b_lim,
            k_lim: profile.k_lim,
            d_lim: profile.d_lim,
            rho_u_reported: profile.rho_u_reported,
            ln_c_v: profile.ln_c_v,
            ln_c_u_derived: profile.ln_c_u_derived,
            ln_c_u_reported: profile.ln_c_u_reported,
        };
        GradsysStatus::Ok
    })
}

/// Linearization data at the attracting equilibrium.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gradsys_stability(
    params: GradsysParams,
    out: *mut GradsysStability,
) -> GradsysStatus {
    guarded(|| {
        if out.is_null() {
            return GradsysStatus::NullPointer;
        }
        let rep = match params.validate().and_then(|sp| model::stability_report(&sp)) {
            Ok(r) => r,
            Err(e) => return fail(&e),
        };
        let mut re = [0.0; 3];
        let mut im = [0.0; 3];
        for i in 0..3 {
            re[i] = rep.eigenvalues[i].re;
            im[i] = rep.eigenvalues[i].im;
        }
        *out = GradsysStability {
            alpha: rep.alpha,
            beta: rep.beta,
            gamma: rep.gamma,
            hurwitz_margin: rep.hurwitz_margin,
            eigenvalues_re: re,
            eigenvalues_im: im,
            asymptotically_stable: rep.asymptotically_stable,
        };
        GradsysStatus::Ok
    })
}

/// The two equilibria as length-3 arrays (Y, Z, W).
///
/// # Safety
/// `xi1` and `xi2` must point to at least 3 writable doubles each.
#[no_mangle]
pub unsafe extern "C" fn gradsys_equilibria(
    params: GradsysParams,
    xi1: *mut f64,
    xi2: *mut f64,
) -> GradsysStatus {
    guarded(|| {
        if xi1.is_null() || xi2.is_null() {
            return GradsysStatus::NullPointer;
        }
        let sp = match params.validate() {
            Ok(sp) => sp,
            Err(e) => return fail(&e),
        };
        let (e1, e2) = model::equilibria(&sp);
        std::ptr::copy_nonoverlapping(e1.as_array().as_ptr(), xi1, 3);
        match e2 {
            Some(e2) => {
                std::ptr::copy_nonoverlapping(e2.as_array().as_ptr(), xi2, 3);
                GradsysStatus::Ok
            }
            None => fail(&Error::HypothesisViolated {
                what: "xi2 exists only for ps + q < 1".into(),
            }),
        }
    })
}

/// Exact min/max of the field divergence over the box [xi1, xi2], and
/// whether the closed-form divergence condition holds.
///
/// # Safety
/// All out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gradsys_divergence_box(
    params: GradsysParams,
    out_min: *mut f64,
    out_max: *mut f64,
    out_condition: *mut bool,
) -> GradsysStatus {
    guarded(|| {
        if out_min.is_null() || out_max.is_null() || out_condition.is_null() {
            return GradsysStatus::NullPointer;
        }
        let dbox = match params.validate().and_then(|sp| phase::divergence_box(&sp)) {
            Ok(d) => d,
            Err(e) => return fail(&e),
        };
        *out_min = dbox.min;
        *out_max = dbox.max;
        *out_condition = dbox.condition_holds;
        GradsysStatus::Ok
    })
}

/// Integrates the radial IVP and returns an owned trajectory handle.
///
/// # Safety
/// `controls` may be null (defaults); `out` must be a valid pointer. The
/// handle must be released with [`gradsys_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn gradsys_integrate(
    params: GradsysParams,
    u0: f64,
    v0: f64,
    controls: *const GradsysControls,
    out: *mut *mut GradsysTrajectory,
) -> GradsysStatus {
    guarded(|| {
        if out.is_null() {
            return GradsysStatus::NullPointer;
        }
        let sp = match params.validate() {
            Ok(sp) => sp,
            Err(e) => return fail(&e),
        };
        let ctrl = controls_from(controls.as_ref());
        match shooter::integrate(&sp, u0, v0, &ctrl) {
            Ok(traj) => {
                *out = Box::into_raw(Box::new(GradsysTrajectory { inner: traj }));
                GradsysStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of samples in a trajectory (0 for a null handle).
///
/// # Safety
/// `traj` must be a live handle from [`gradsys_integrate`] or null.
#[no_mangle]
pub unsafe extern "C" fn gradsys_trajectory_len(traj: *const GradsysTrajectory) -> usize {
    match traj.as_ref() {
        Some(t) => t.inner.samples.len(),
        None => 0,
    }
}

/// Terminal outcome of a trajectory.
///
/// # Safety
/// `traj` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gradsys_trajectory_outcome(
    traj: *const GradsysTrajectory,
    out: *mut GradsysOutcome,
) -> GradsysStatus {
    guarded(|| {
        let (Some(t), false) = (traj.as_ref(), out.is_null()) else {
            return GradsysStatus::NullPointer;
        };
        *out = match &t.inner.outcome {
            Outcome::GlobalUpTo(r) => GradsysOutcome {
                kind: GradsysOutcomeKind::GlobalUpTo,
                radius: *r,
                uncertainty: 0.0,
            },
            Outcome::BlowUp { radius, uncertainty } => GradsysOutcome {
                kind: GradsysOutcomeKind::BlowUp,
                radius: *radius,
                uncertainty: *uncertainty,
            },
            Outcome::Aborted(msg) => {
                set_error(msg);
                GradsysOutcome {
                    kind: GradsysOutcomeKind::Aborted,
                    radius: f64::NAN,
                    uncertainty: f64::NAN,
                }
            }
        };
        GradsysStatus::Ok
    })
}

/// Copies up to `cap` samples into the provided column buffers; null column
/// pointers are skipped. Returns the number of samples written.
///
/// # Safety
/// Non-null columns must point to at least `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gradsys_trajectory_samples(
    traj: *const GradsysTrajectory,
    r: *mut f64,
    u: *mut f64,
    du: *mut f64,
    v: *mut f64,
    dv: *mut f64,
    cap: usize,
) -> usize {
    let Some(t) = traj.as_ref() else {
        return 0;
    };
    let n = t.inner.samples.len().min(cap);
    for (i, s) in t.inner.samples.iter().take(n).enumerate() {
        if !r.is_null() {
            *r.add(i) = s.r;
        }
        if !u.is_null() {
            *u.add(i) = s.u;
        }
        if !du.is_null() {
            *du.add(i) = s.du;
        }
        if !v.is_null() {
            *v.add(i) = s.v;
        }
        if !dv.is_null() {
            *dv.add(i) = s.dv;
        }
    }
    n
}

/// Empirical boundary classification of a finished trajectory.
///
/// # Safety
/// `traj` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gradsys_trajectory_classify(
    traj: *const GradsysTrajectory,
    out: *mut GradsysClass,
) -> GradsysStatus {
    guarded(|| {
        let (Some(t), false) = (traj.as_ref(), out.is_null()) else {
            return GradsysStatus::NullPointer;
        };
        *out = shooter::empirical_classification(&t.inner).into();
        GradsysStatus::Ok
    })
}

/// Trailing log-log growth fit over `window_decades` decades.
///
/// # Safety
/// `traj` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gradsys_trajectory_fit_growth(
    traj: *const GradsysTrajectory,
    window_decades: f64,
    out: *mut GradsysGrowthFit,
) -> GradsysStatus {
    guarded(|| {
        let (Some(t), false) = (traj.as_ref(), out.is_null()) else {
            return GradsysStatus::NullPointer;
        };
        match shooter::fit_growth(&t.inner, window_decades) {
            Ok(fit) => {
                *out = GradsysGrowthFit {
                    slope_u: fit.slope_u,
                    slope_v: fit.slope_v,
                    log_amp_u: fit.log_amp_u,
                    log_amp_v: fit.log_amp_v,
                    slope_stderr_u: fit.slope_stderr_u,
                    slope_stderr_v: fit.slope_stderr_v,
                    rms_residual_u: fit.rms_residual_u,
                    rms_residual_v: fit.rms_residual_v,
                    window_lo: fit.window.0,
                    window_hi: fit.window.1,
                    n_samples: fit.n_samples,
                };
                GradsysStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a trajectory handle (null is a no-op).
///
/// # Safety
/// `traj` must have come from [`gradsys_integrate`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gradsys_trajectory_free(traj: *mut GradsysTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Localizes the blow-up radius through the given ascending thresholds.
///
/// # Safety
/// `thresholds` must point to `n_thresholds` doubles; out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn gradsys_blowup_radius(
    params: GradsysParams,
    u0: f64,
    v0: f64,
    thresholds: *const f64,
    n_thresholds: usize,
    out_radius: *mut f64,
    out_uncertainty: *mut f64,
) -> GradsysStatus {
    guarded(|| {
        if thresholds.is_null() || out_radius.is_null() || out_uncertainty.is_null() {
            return GradsysStatus::NullPointer;
        }
        let sp = match params.validate() {
            Ok(sp) => sp,
            Err(e) => return fail(&e),
        };
        let levels = std::slice::from_raw_parts(thresholds, n_thresholds);
        match shooter::estimate_blowup_radius(&sp, u0, v0, levels, &IntegrationControls::default()) {
            Ok(est) => {
                *out_radius = est.radius;
                *out_uncertainty = est.uncertainty;
                GradsysStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Keller-Osserman verdicts for the power-law nonlinearity f(t) = t^s.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gradsys_ko_power(
    s: f64,
    p: f64,
    q: f64,
    out: *mut GradsysKoReport,
) -> GradsysStatus {
    guarded(|| {
        if out.is_null() {
            return GradsysStatus::NullPointer;
        }
        let run = || -> Result<GradsysKoReport, Error> {
            let f = gradsys::ko::Nonlinearity::power(s)?;
            let verdicts = gradsys::ko::ko_verdicts(&f, p, q)?;
            Ok(GradsysKoReport {
                plain_verdict: verdicts.plain.verdict.into(),
                plain_slope: verdicts.plain.tail_exponent_estimate,
                weighted_verdict: verdicts.weighted.verdict.into(),
                weighted_slope: verdicts.weighted.tail_exponent_estimate,
                classification: gradsys::ko::classify_from_verdicts(&verdicts).into(),
            })
        };
        match run() {
            Ok(report) => {
                *out = report;
                GradsysStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Integrates the reduced (Y, Z, W) flow from the given point and reports
/// where it settled plus the terminal point.
///
/// # Safety
/// `out_limit` must be valid; `out_terminal` must point to 3 writable
/// doubles or be null.
#[no_mangle]
pub unsafe extern "C" fn gradsys_phase_limit(
    params: GradsysParams,
    y0: f64,
    z0: f64,
    w0: f64,
    t_span: f64,
    out_limit: *mut GradsysLimit,
    out_terminal: *mut f64,
) -> GradsysStatus {
    guarded(|| {
        if out_limit.is_null() {
            return GradsysStatus::NullPointer;
        }
        let sp = match params.validate() {
            Ok(sp) => sp,
            Err(e) => return fail(&e),
        };
        match phase::integrate_phase(&sp, [y0, z0, w0], (0.0, t_span), &OdeOptions::default()) {
            Ok(traj) => {
                *out_limit = match traj.limit_verdict {
                    LimitVerdict::ConvergedTo(WhichEquilibrium::Xi1) => GradsysLimit::Xi1,
                    LimitVerdict::ConvergedTo(WhichEquilibrium::Xi2) => GradsysLimit::Xi2,
                    LimitVerdict::Undecided => GradsysLimit::Undecided,
                };
                if !out_terminal.is_null() {
                    if let Some(last) = traj.samples.last() {
                        std::ptr::copy_nonoverlapping([last.y, last.z, last.w].as_ptr(), out_terminal, 3);
                    }
                }
                GradsysStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
