//! Exercises the C ABI through the exported symbols.

use gradsys_ffi::*;

fn p1() -> GradsysParams {
    GradsysParams {
        n: 3,
        a: 0.0,
        b: 0.0,
        p: 0.5,
        q: 0.2,
        s: 1.0,
    }
}

#[test]
fn version_is_nul_terminated() {
    let ptr = gradsys_version();
    let s = unsafe { std::ffi::CStr::from_ptr(ptr) };
    assert_eq!(s.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn classify_and_existence() {
    let mut class = GradsysClass::OutOfTheory;
    let status = unsafe { gradsys_classify_ball(p1(), &mut class) };
    assert_eq!(status, GradsysStatus::Ok);
    assert_eq!(class, GradsysClass::AllBounded);

    let mut exists = false;
    let status = unsafe { gradsys_global_existence(p1(), &mut exists) };
    assert_eq!(status, GradsysStatus::Ok);
    assert!(exists);

    let both = GradsysParams {
        p: 1.0,
        q: 1.0,
        s: 2.0,
        ..p1()
    };
    let status = unsafe { gradsys_classify_ball(both, &mut class) };
    assert_eq!(status, GradsysStatus::Ok);
    assert_eq!(class, GradsysClass::BothBlowUp);
}

#[test]
fn invalid_params_set_error_message() {
    let bad = GradsysParams { n: 1, ..p1() };
    let mut class = GradsysClass::OutOfTheory;
    let status = unsafe { gradsys_classify_ball(bad, &mut class) };
    assert_eq!(status, GradsysStatus::InvalidParams);

    let mut buf = [0i8; 128];
    let len = unsafe { gradsys_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 0);
    let msg = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) };
    assert!(msg.to_str().unwrap().contains("dimension"));
}

#[test]
fn null_pointers_are_rejected() {
    let status = unsafe { gradsys_classify_ball(p1(), std::ptr::null_mut()) };
    assert_eq!(status, GradsysStatus::NullPointer);
}

#[test]
fn profile_and_stability() {
    let mut profile = GradsysProfile {
        a_lim: 0.0,
        b_lim: 0.0,
        k_lim: 0.0,
        d_lim: 0.0,
        rho_u_reported: 0.0,
        ln_c_v: 0.0,
        ln_c_u_derived: 0.0,
        ln_c_u_reported: 0.0,
    };
    let status = unsafe { gradsys_asymptotic_profile(p1(), &mut profile) };
    assert_eq!(status, GradsysStatus::Ok);
    assert!((profile.a_lim - 10.0).abs() < 1e-12);
    assert!((profile.d_lim - 7.0).abs() < 1e-12);
    assert!((profile.ln_c_v + 22.5997).abs() < 1e-3);

    let mut stab = GradsysStability {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
        hurwitz_margin: 0.0,
        eigenvalues_re: [0.0; 3],
        eigenvalues_im: [0.0; 3],
        asymptotically_stable: false,
    };
    let status = unsafe { gradsys_stability(p1(), &mut stab) };
    assert_eq!(status, GradsysStatus::Ok);
    assert!((stab.alpha - 29.0).abs() < 1e-12);
    assert!((stab.beta - 256.0).abs() < 1e-12);
    assert!(stab.asymptotically_stable);
    assert!(stab.eigenvalues_re.iter().all(|re| *re < 0.0));

    // Hypothesis violation propagates as a status code.
    let bad = GradsysParams {
        p: 1.0,
        q: 1.0,
        s: 2.0,
        ..p1()
    };
    let status = unsafe { gradsys_asymptotic_profile(bad, &mut profile) };
    assert_eq!(status, GradsysStatus::HypothesisViolated);
}

#[test]
fn equilibria_and_divergence() {
    let mut xi1 = [0.0; 3];
    let mut xi2 = [0.0; 3];
    let status = unsafe { gradsys_equilibria(p1(), xi1.as_mut_ptr(), xi2.as_mut_ptr()) };
    assert_eq!(status, GradsysStatus::Ok);
    assert_eq!(xi1, [0.0, 3.0, 4.0]);
    assert!((xi2[0] - 10.0).abs() < 1e-12);

    let (mut lo, mut hi, mut cond) = (0.0, 0.0, false);
    let status = unsafe { gradsys_divergence_box(p1(), &mut lo, &mut hi, &mut cond) };
    assert_eq!(status, GradsysStatus::Ok);
    assert!(cond);
    assert!(hi < 0.0 && lo <= hi);
    assert!((lo + 29.0).abs() < 1e-9);
}

#[test]
fn trajectory_lifecycle() {
    let controls = GradsysControls {
        r0: 0.0,
        r_max: 1e4,
        v_cap: 0.0,
        rel_tol: 0.0,
        abs_tol: 0.0,
    };
    let mut handle: *mut GradsysTrajectory = std::ptr::null_mut();
    let status = unsafe { gradsys_integrate(p1(), 1.0, 1.0, &controls, &mut handle) };
    assert_eq!(status, GradsysStatus::Ok);
    assert!(!handle.is_null());

    let n = unsafe { gradsys_trajectory_len(handle) };
    assert!(n > 100);

    let mut outcome = GradsysOutcome {
        kind: GradsysOutcomeKind::Aborted,
        radius: 0.0,
        uncertainty: 0.0,
    };
    let status = unsafe { gradsys_trajectory_outcome(handle, &mut outcome) };
    assert_eq!(status, GradsysStatus::Ok);
    assert_eq!(outcome.kind, GradsysOutcomeKind::GlobalUpTo);
    assert_eq!(outcome.radius, 1e4);

    let mut r = vec![0.0; n];
    let mut v = vec![0.0; n];
    let written = unsafe {
        gradsys_trajectory_samples(
            handle,
            r.as_mut_ptr(),
            std::ptr::null_mut(),
            std::ptr::null_mut(),
            v.as_mut_ptr(),
            std::ptr::null_mut(),
            n,
        )
    };
    assert_eq!(written, n);
    assert!(r.windows(2).all(|w| w[1] > w[0]));
    assert!(v.windows(2).all(|w| w[1] >= w[0]));

    let mut fit = GradsysGrowthFit {
        slope_u: 0.0,
        slope_v: 0.0,
        log_amp_u: 0.0,
        log_amp_v: 0.0,
        slope_stderr_u: 0.0,
        slope_stderr_v: 0.0,
        rms_residual_u: 0.0,
        rms_residual_v: 0.0,
        window_lo: 0.0,
        window_hi: 0.0,
        n_samples: 0,
    };
    let status = unsafe { gradsys_trajectory_fit_growth(handle, 1.0, &mut fit) };
    assert_eq!(status, GradsysStatus::Ok);
    assert!((fit.slope_v - 10.0).abs() < 0.1);
    assert!((fit.slope_u - 7.0).abs() < 0.1);

    let mut class = GradsysClass::OutOfTheory;
    let status = unsafe { gradsys_trajectory_classify(handle, &mut class) };
    assert_eq!(status, GradsysStatus::Ok);
    assert_eq!(class, GradsysClass::AllBounded);

    unsafe { gradsys_trajectory_free(handle) };
    unsafe { gradsys_trajectory_free(std::ptr::null_mut()) };
}

#[test]
fn blowup_and_ko_and_phase() {
    let both = GradsysParams {
        p: 1.0,
        q: 1.0,
        s: 2.0,
        ..p1()
    };
    let thresholds = [1e4, 1e6, 1e8];
    let (mut radius, mut unc) = (0.0, 0.0);
    let status = unsafe {
        gradsys_blowup_radius(both, 1.0, 1.0, thresholds.as_ptr(), 3, &mut radius, &mut unc)
    };
    assert_eq!(status, GradsysStatus::Ok);
    assert!((radius - 4.8178).abs() < 0.01);
    assert!(unc < 0.01 * radius);

    // Bounded parameters report NotABlowUp.
    let status = unsafe {
        gradsys_blowup_radius(p1(), 1.0, 1.0, thresholds.as_ptr(), 3, &mut radius, &mut unc)
    };
    assert_eq!(status, GradsysStatus::NotABlowUp);

    let mut ko = GradsysKoReport {
        plain_verdict: GradsysVerdict::Inconclusive,
        plain_slope: 0.0,
        weighted_verdict: GradsysVerdict::Inconclusive,
        weighted_slope: 0.0,
        classification: GradsysClass::OutOfTheory,
    };
    let status = unsafe { gradsys_ko_power(5.0, 1.0, 1.0, &mut ko) };
    assert_eq!(status, GradsysStatus::Ok);
    assert_eq!(ko.classification, GradsysClass::UBoundedVBlowsUp);
    assert!((ko.weighted_slope + 2.5).abs() < 0.01);

    let mut limit = GradsysLimit::Undecided;
    let mut terminal = [0.0; 3];
    let status = unsafe {
        gradsys_phase_limit(p1(), 0.1, 3.0, 4.0, 50.0, &mut limit, terminal.as_mut_ptr())
    };
    assert_eq!(status, GradsysStatus::Ok);
    assert_eq!(limit, GradsysLimit::Xi2);
    assert!((terminal[0] - 10.0).abs() < 1e-6);
}
