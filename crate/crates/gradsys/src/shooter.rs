//! Radial initial-value integration, blow-up detection, empirical boundary
//! classification, growth fits, and the scaling family.
//!
//! The IVP
//!
//! ```text
//!   u'' + (N-1)/r u' = r^a v^p,    v'' + (N-1)/r v' = r^b v^q (u')^s,
//!   u(0) = u0 > 0,  v(0) = v0 > 0,  u'(0) = v'(0) = 0
//! ```
//!
//! is started just off the removable singularity at r0 (default 1e-6) with
//! the leading-order series of the integral form, then advanced in t = ln r
//! on the log variables (ln u, ln u', ln v, ln v'). In these variables the
//! right-hand side is built from the bounded phase quantities, so runs over
//! many decades of r stay well-scaled, and a step of the integrator is a
//! fixed fraction of a decade.

use crate::error::{Error, Result};
use crate::fit::{self, LineFit};
use crate::model::{self, BallClassification, OutOfTheoryReason};
use crate::ode::{self, Control, OdeOptions};
use crate::params::SystemParams;
use serde::{Deserialize, Serialize};

/// One sample of the radial solution. `du` and `dv` are u' and v'.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
}

/// How an integration ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Reached r_max with no blow-up.
    GlobalUpTo(f64),
    /// v crossed the cap; carries the extrapolated blow-up radius and its
    /// spread across the trailing threshold triples.
    BlowUp { radius: f64, uncertainty: f64 },
    /// Integration stopped early (step-size underflow or step budget).
    Aborted(String),
}

/// Integrator controls. Defaults: r0 = 1e-6, r_max = 1e6, v_cap = 1e12,
/// rel_tol = 1e-10, abs_tol = 1e-12, about 24 samples per decade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationControls {
    pub r0: f64,
    pub r_max: f64,
    pub v_cap: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on the step in t = ln r; also the sampling interval.
    pub max_step_t: f64,
}

impl Default for IntegrationControls {
    fn default() -> Self {
        Self {
            r0: 1e-6,
            r_max: 1e6,
            v_cap: 1e12,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step_t: std::f64::consts::LN_10 / 24.0,
        }
    }
}

/// A completed radial run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTrajectory {
    pub params: SystemParams,
    /// Initial data (u(0), v(0)).
    pub initial: (f64, f64),
    pub controls: IntegrationControls,
    pub samples: Vec<RadialState>,
    pub outcome: Outcome,
}

impl RadialTrajectory {
    pub fn last(&self) -> &RadialState {
        self.samples.last().expect("trajectory has at least the startup sample")
    }

    /// CSV export, header `r,u,du,v,dv`, 17 significant digits per field.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 120 + 16);
        out.push_str("r,u,du,v,dv\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.r, s.u, s.du, s.v, s.dv
            ));
        }
        out
    }
}

/// Leading-order startup state at radius r0.
///
/// u'(r0) and v'(r0) come from the first terms of the integral form; the
/// divisor of v' is N + s(a+1) + b (the L'Hopital limit of W at the origin),
/// so the phase image starts on the lower corner of the admissible box.
/// Startup truncation error is O(r0^2) relative.
pub fn init_state(params: &SystemParams, u0: f64, v0: f64, r0: f64) -> Result<RadialState> {
    if !(u0.is_finite() && v0.is_finite() && r0.is_finite()) || u0 <= 0.0 || v0 <= 0.0 || r0 <= 0.0 {
        return Err(Error::NonPositiveInitialData { u0, v0, r0 });
    }
    let SystemParams { a, b, p, q, s, .. } = *params;
    let nf = params.nf();
    let lr = r0.ln();
    let lv0 = v0.ln();

    let ln_du = (a + 1.0) * lr + p * lv0 - (nf + a).ln();
    let ln_dv = (b + 1.0) * lr + q * lv0 + s * ln_du - params.ell().ln();
    let du = ln_du.exp();
    let dv = ln_dv.exp();
    Ok(RadialState {
        r: r0,
        u: u0 + du * r0 / (a + 2.0),
        du,
        v: v0 + dv * r0 / ((a + 1.0) * s + b + 2.0),
        dv,
    })
}

/// Log-variable vector [ln u, ln u', ln v, ln v'] of a state.
fn log_state(state: &RadialState) -> [f64; 4] {
    [state.u.ln(), state.du.ln(), state.v.ln(), state.dv.ln()]
}

fn state_from_log(t: f64, y: &[f64; 4]) -> RadialState {
    RadialState {
        r: t.exp(),
        u: y[0].exp(),
        du: y[1].exp(),
        v: y[2].exp(),
        dv: y[3].exp(),
    }
}

/// RHS of the log system in t = ln r. The four terms are the phase
/// quantities X, Z, Y, W of the trajectory.
fn log_rhs(params: &SystemParams) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    let SystemParams { a, b, p, q, s, .. } = *params;
    let nf = params.nf();
    move |t: f64, y: &[f64; 4]| {
        let x = (t + y[1] - y[0]).exp();
        let z = ((a + 1.0) * t + p * y[2] - y[1]).exp();
        let yy = (t + y[3] - y[2]).exp();
        let w = ((b + 1.0) * t + q * y[2] + s * y[1] - y[3]).exp();
        [x, z - (nf - 1.0), yy, w - (nf - 1.0)]
    }
}

struct LadderRun {
    trajectory: RadialTrajectory,
    /// (threshold value, crossing radius), in crossing order.
    crossings: Vec<(f64, f64)>,
}

const MONOTONE_COMPONENTS: [&str; 4] = ["u", "u'", "v", "v'"];

/// Materialized samples overflow f64 beyond this v; runs are cut there.
const LN_RANGE_LIMIT: f64 = 290.0 * std::f64::consts::LN_10;

/// Geometric convergence ratio of the trailing crossing triple, when the
/// triple is uniformly log-spaced. Ratios below 1 mean the crossing radii
/// accumulate at a finite blow-up radius; ratios at or above 1 are the
/// signature of a global solution whose v merely grows without bound.
fn trailing_ratio(crossings: &[(f64, f64)]) -> Option<f64> {
    let n = crossings.len();
    if n < 3 {
        return None;
    }
    let [(v1, r1), (v2, r2), (v3, r3)] = [crossings[n - 3], crossings[n - 2], crossings[n - 1]];
    let d1 = v2.log10() - v1.log10();
    let d2 = v3.log10() - v2.log10();
    if (d1 - d2).abs() > 1e-9 * d1.abs().max(1.0) || r2 <= r1 {
        return None;
    }
    Some((r3 - r2) / (r2 - r1))
}

/// Core run: integrates, samples every accepted step, and records the
/// crossing radius of each v threshold on the (dynamically extended) ladder.
///
/// Crossing the v cap declares a blow-up only when the trailing crossing
/// radii converge geometrically (ratio < 1); a global solution grows through
/// any fixed level, with crossing radii running off geometrically instead,
/// and the run then continues toward r_max.
fn integrate_with_ladder(
    params: &SystemParams,
    u0: f64,
    v0: f64,
    controls: &IntegrationControls,
    ladder: &[f64],
) -> Result<LadderRun> {
    let start = init_state(params, u0, v0, controls.r0)?;
    if controls.r_max <= controls.r0 {
        return Err(Error::InvalidInput(format!(
            "r_max = {} must exceed r0 = {}",
            controls.r_max, controls.r0
        )));
    }
    let t0 = controls.r0.ln();
    let t_end = controls.r_max.ln();
    let ln_cap = controls.v_cap.ln();
    let mut ladder = ladder.to_vec();
    if ladder.is_empty() {
        ladder.push(10f64.powf((3.0 * v0).log10().ceil()));
    }

    let opts = OdeOptions {
        rel_tol: controls.rel_tol,
        abs_tol: controls.abs_tol,
        h_max: controls.max_step_t,
        ..Default::default()
    };

    let mut samples = vec![start];
    let mut crossings: Vec<(f64, f64)> = Vec::new();
    let mut next_rung = 0usize;
    let mut blowup_confirmed = false;
    let mut range_exhausted = false;
    let mut monotonicity_error: Option<Error> = None;

    let rhs = log_rhs(params);
    let result = ode::integrate(rhs, t0, log_state(&start), t_end, &opts, |step| {
        // Monotonicity of u, u', v, v' in log space, with slack for rounding.
        for (i, &component) in MONOTONE_COMPONENTS.iter().enumerate() {
            let slack = 10.0 * controls.rel_tol * step.y0[i].abs().max(1.0);
            if step.y1[i] < step.y0[i] - slack {
                monotonicity_error = Some(Error::MonotonicityViolation {
                    component,
                    r: step.t1.exp(),
                    drop: step.y0[i] - step.y1[i],
                });
                return Control::Stop;
            }
        }
        // Threshold crossings of ln v within this step (possibly several);
        // the ladder keeps a decade rung ahead of the current level.
        loop {
            while next_rung >= ladder.len() {
                let top = *ladder.last().unwrap();
                ladder.push(top * 10.0);
            }
            if step.y1[2] < ladder[next_rung].ln() {
                break;
            }
            if let Some(theta) = step.crossing(2, ladder[next_rung].ln()) {
                let tc = step.t0 + theta * (step.t1 - step.t0);
                crossings.push((ladder[next_rung], tc.exp()));
            }
            next_rung += 1;
        }
        samples.push(state_from_log(step.t1, &step.y1));
        if step.y1[2] >= ln_cap {
            if let Some(m) = trailing_ratio(&crossings) {
                if m < 0.99 {
                    blowup_confirmed = true;
                    return Control::Stop;
                }
            }
        }
        if step.y1[2] >= LN_RANGE_LIMIT || step.y1[0] >= LN_RANGE_LIMIT {
            range_exhausted = true;
            return Control::Stop;
        }
        Control::Continue
    });

    if let Some(err) = monotonicity_error {
        return Err(err);
    }

    let outcome = match result {
        Ok(_) if blowup_confirmed => {
            let (radius, uncertainty) = extrapolate_radius(&crossings);
            Outcome::BlowUp { radius, uncertainty }
        }
        Ok(_) if range_exhausted => Outcome::Aborted(format!(
            "solution exceeded the f64 range at r = {:.6e} with no blow-up signature",
            samples.last().map_or(f64::NAN, |s| s.r)
        )),
        Ok(_) => Outcome::GlobalUpTo(controls.r_max),
        Err(Error::StepSizeUnderflow { t, h }) => Outcome::Aborted(format!(
            "step size underflow at r = {:.6e} (h = {h:.3e})",
            t.exp()
        )),
        Err(Error::InvalidInput(msg)) => Outcome::Aborted(msg),
        Err(e) => return Err(e),
    };

    Ok(LadderRun {
        trajectory: RadialTrajectory {
            params: *params,
            initial: (u0, v0),
            controls: *controls,
            samples,
            outcome,
        },
        crossings,
    })
}

/// Decade thresholds of v between ~3*v0 and the cap.
fn decade_ladder(v0: f64, v_cap: f64) -> Vec<f64> {
    let mut ladder = Vec::new();
    let k_min = (3.0 * v0).log10().ceil() as i32;
    let k_max = v_cap.log10().floor() as i32;
    for k in k_min..=k_max {
        ladder.push(10f64.powi(k));
    }
    ladder
}

/// Geometric extrapolation r_k = R - c m^k over the last crossings.
///
/// Consecutive triples with uniform log10 spacing give
/// m = (r3 - r2)/(r2 - r1) and R = r3 + (r3 - r2) m / (1 - m). Returns the
/// last triple's estimate and the spread across the trailing three triples.
fn extrapolate_radius(crossings: &[(f64, f64)]) -> (f64, f64) {
    let estimates = triple_estimates(crossings);
    match estimates.last() {
        None => {
            // Too few crossings; fall back to the last crossing radius.
            let r = crossings.last().map_or(f64::NAN, |c| c.1);
            (r, f64::NAN)
        }
        Some(&(_, last)) => {
            let tail: Vec<f64> = estimates.iter().rev().take(3).map(|e| e.1).collect();
            let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (last, hi - lo)
        }
    }
}

/// Per-triple extrapolated radii, keyed by the triple's top threshold.
fn triple_estimates(crossings: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in crossings.windows(3) {
        let [(v1, r1), (v2, r2), (v3, r3)] = [w[0], w[1], w[2]];
        let d1 = v2.log10() - v1.log10();
        let d2 = v3.log10() - v2.log10();
        if (d1 - d2).abs() > 1e-9 * d1.abs().max(1.0) {
            continue;
        }
        let num = r3 - r2;
        let den = r2 - r1;
        if den <= 0.0 {
            continue;
        }
        let m = num / den;
        if m <= 0.0 || m >= 1.0 - 1e-12 {
            continue;
        }
        out.push((v3, r3 + num * m / (1.0 - m)));
    }
    out
}

/// Integrates the radial IVP with the default decade ladder.
///
/// Terminates at `controls.r_max` (outcome `GlobalUpTo`), or once v has
/// passed `controls.v_cap` with the finite-radius blow-up signature
/// (outcome `BlowUp` with the extrapolated radius). Step-size underflow
/// truncates the trajectory with outcome `Aborted`; a monotonicity
/// violation beyond tolerance is a hard error.
pub fn integrate(
    params: &SystemParams,
    u0: f64,
    v0: f64,
    controls: &IntegrationControls,
) -> Result<RadialTrajectory> {
    let ladder = decade_ladder(v0, controls.v_cap);
    Ok(integrate_with_ladder(params, u0, v0, controls, &ladder)?.trajectory)
}

/// Blow-up radius estimate from a threshold ladder.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupEstimate {
    pub radius: f64,
    /// Spread of the estimates across the trailing requested thresholds.
    pub uncertainty: f64,
    /// (threshold, extrapolated radius using crossings up to it).
    pub per_threshold: Vec<(f64, f64)>,
}

/// Localizes the blow-up radius by integrating through the ascending
/// `thresholds` of v and extrapolating the crossing radii with the power
/// model r_k = R - c 10^{-k/gamma}.
///
/// Each requested threshold gets its own estimate from the crossings
/// recorded up to it, so agreement across thresholds is a self-consistency
/// check of the extrapolation.
pub fn estimate_blowup_radius(
    params: &SystemParams,
    u0: f64,
    v0: f64,
    thresholds: &[f64],
    controls: &IntegrationControls,
) -> Result<BlowupEstimate> {
    if model::classify_ball(params) == BallClassification::AllBounded {
        return Err(Error::NotABlowUp {
            why: "all positive radial solutions are bounded for these parameters".into(),
        });
    }
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.is_empty() || sorted[0] <= 3.0 * v0 {
        return Err(Error::InvalidInput(
            "thresholds must be an ascending list well above v0".into(),
        ));
    }
    let top = *sorted.last().unwrap();

    let mut ladder = decade_ladder(v0, top);
    ladder.extend_from_slice(&sorted);
    ladder.sort_by(f64::total_cmp);
    ladder.dedup();

    let run_controls = IntegrationControls {
        v_cap: top,
        ..*controls
    };
    let run = integrate_with_ladder(params, u0, v0, &run_controls, &ladder)?;
    match &run.trajectory.outcome {
        Outcome::BlowUp { .. } => {}
        Outcome::GlobalUpTo(_) => {
            return Err(Error::NotABlowUp {
                why: format!(
                    "v stayed below {top:.3e} up to r_max = {:.3e}",
                    run_controls.r_max
                ),
            })
        }
        Outcome::Aborted(msg) => {
            return Err(Error::NotABlowUp {
                why: format!("integration aborted before localization: {msg}"),
            })
        }
    }

    let estimates = triple_estimates(&run.crossings);
    let mut per_threshold = Vec::with_capacity(sorted.len());
    for &thr in &sorted {
        // Last triple whose top threshold does not exceed thr.
        let est = estimates
            .iter()
            .rev()
            .find(|(top_thr, _)| *top_thr <= thr * (1.0 + 1e-12))
            .map(|&(_, r)| r)
            .or_else(|| {
                run.crossings
                    .iter()
                    .rev()
                    .find(|(t, _)| *t <= thr * (1.0 + 1e-12))
                    .map(|&(_, r)| r)
            })
            .unwrap_or(f64::NAN);
        per_threshold.push((thr, est));
    }

    let tail: Vec<f64> = per_threshold.iter().rev().take(3).map(|e| e.1).collect();
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let radius = per_threshold.last().unwrap().1;
    Ok(BlowupEstimate {
        radius,
        uncertainty: hi - lo,
        per_threshold,
    })
}

/// Decides the boundary behavior actually realized by a trajectory.
///
/// For blow-up runs the question is whether u stays bounded as r -> R. The
/// primary discriminant is the fitted slope of ln u' against ln(R - r): a
/// slope above -1 + margin means u' is integrable (u bounded); below
/// -1 - margin it is not. Inside the margin band, where the logarithmic
/// divergence u ~ C ln 1/(R-r) lives, the per-decade increments of u decide:
/// geometrically decaying increments mean a finite limit, steady or growing
/// increments mean divergence. Disagreement is reported, never guessed away.
pub fn empirical_classification(traj: &RadialTrajectory) -> BallClassification {
    const SLOPE_MARGIN: f64 = 0.2;
    match &traj.outcome {
        // Reaching r_max with no blow-up signature certifies boundedness on
        // every ball the run covered.
        Outcome::GlobalUpTo(_) => BallClassification::AllBounded,
        Outcome::Aborted(_) => BallClassification::OutOfTheory(OutOfTheoryReason::TrajectoryAborted),
        Outcome::BlowUp { radius, .. } => {
            let radius = *radius;
            let v_end = traj.last().v;
            let cut = v_end.powf(0.5);
            let window: Vec<&RadialState> = traj
                .samples
                .iter()
                .filter(|s| s.v >= cut && s.r < radius)
                .collect();
            if window.len() < 10 {
                return BallClassification::OutOfTheory(OutOfTheoryReason::FitsDisagree);
            }
            let xs: Vec<f64> = window.iter().map(|s| (radius - s.r).ln()).collect();
            let ys: Vec<f64> = window.iter().map(|s| s.du.ln()).collect();
            let Some(fitted) = fit::line_fit(&xs, &ys) else {
                return BallClassification::OutOfTheory(OutOfTheoryReason::FitsDisagree);
            };
            if fitted.slope >= -1.0 + SLOPE_MARGIN {
                BallClassification::UBoundedVBlowsUp
            } else if fitted.slope <= -1.0 - SLOPE_MARGIN {
                BallClassification::BothBlowUp
            } else {
                decide_marginal_u(traj, radius)
            }
        }
    }
}

/// Tie-breaker near slope -1: compares u's increments across geometric
/// shells R - eps, eps = R * 10^{-j}. Ratios near 1 are the log-divergent
/// signature; clearly decaying ratios mean a finite limit.
fn decide_marginal_u(traj: &RadialTrajectory, radius: f64) -> BallClassification {
    let mut ln_eps: Vec<f64> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    for s in &traj.samples {
        if s.r < radius {
            ln_eps.push((radius - s.r).ln());
            u.push(s.u);
        }
    }
    if ln_eps.len() < 4 {
        return BallClassification::OutOfTheory(OutOfTheoryReason::FitsDisagree);
    }
    // Samples run toward the radius, so ln_eps is decreasing; u at the
    // decade marks eps = R 10^{-j} by linear interpolation in ln eps.
    let interp_u = |target: f64| -> Option<f64> {
        if target > ln_eps[0] || target < *ln_eps.last().unwrap() {
            return None;
        }
        let idx = ln_eps.partition_point(|&x| x > target);
        if idx == 0 || idx >= ln_eps.len() {
            return None;
        }
        let (x0, x1) = (ln_eps[idx - 1], ln_eps[idx]);
        let (y0, y1) = (u[idx - 1], u[idx]);
        let frac = if x1 == x0 { 0.0 } else { (target - x0) / (x1 - x0) };
        Some(y0 + frac * (y1 - y0))
    };

    let ln10 = std::f64::consts::LN_10;
    let j_lo = ((radius.ln() - ln_eps[0]) / ln10).ceil().max(1.0) as i32;
    let j_hi = ((radius.ln() - ln_eps.last().unwrap()) / ln10).floor() as i32;
    let marks: Vec<f64> = (j_lo..=j_hi)
        .filter_map(|j| interp_u(radius.ln() - f64::from(j) * ln10))
        .collect();
    if marks.len() < 3 {
        return BallClassification::OutOfTheory(OutOfTheoryReason::FitsDisagree);
    }
    let increments: Vec<f64> = marks.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = increments
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return BallClassification::OutOfTheory(OutOfTheoryReason::FitsDisagree);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if mean >= 0.8 {
        // Steady (log-divergent) or growing (power-divergent) increments.
        BallClassification::BothBlowUp
    } else if mean < 0.5 {
        BallClassification::UBoundedVBlowsUp
    } else {
        BallClassification::OutOfTheory(OutOfTheoryReason::FitsDisagree)
    }
}

/// Scaling exponents of the invariance family: U_l(r) = l^{e_u} U(l r),
/// V_l(r) = l^{e_v} V(l r).
pub fn scaling_exponents(params: &SystemParams) -> Result<(f64, f64)> {
    let SystemParams { a, b, p, q, s, .. } = *params;
    let denom = s * p + q - 1.0;
    if denom == 0.0 {
        return Err(Error::DegenerateScaling);
    }
    let e_u = (p * (b + 2.0 - s) - (a + 2.0) * (q - 1.0)) / denom;
    let e_v = (b + 2.0 + s * (a + 1.0)) / denom;
    Ok((e_u, e_v))
}

/// Applies the scaling family to a finished trajectory.
pub fn scale_solution(traj: &RadialTrajectory, lambda: f64) -> Result<RadialTrajectory> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let (e_u, e_v) = scaling_exponents(&traj.params)?;
    let ll = lambda.ln();
    let fu = (e_u * ll).exp();
    let fu1 = ((e_u + 1.0) * ll).exp();
    let fv = (e_v * ll).exp();
    let fv1 = ((e_v + 1.0) * ll).exp();

    let samples = traj
        .samples
        .iter()
        .map(|s| RadialState {
            r: s.r / lambda,
            u: fu * s.u,
            du: fu1 * s.du,
            v: fv * s.v,
            dv: fv1 * s.dv,
        })
        .collect();
    let outcome = match &traj.outcome {
        Outcome::GlobalUpTo(r) => Outcome::GlobalUpTo(r / lambda),
        Outcome::BlowUp { radius, uncertainty } => Outcome::BlowUp {
            radius: radius / lambda,
            uncertainty: uncertainty / lambda,
        },
        Outcome::Aborted(msg) => Outcome::Aborted(msg.clone()),
    };
    Ok(RadialTrajectory {
        params: traj.params,
        initial: (fu * traj.initial.0, fv * traj.initial.1),
        controls: IntegrationControls {
            r0: traj.controls.r0 / lambda,
            r_max: traj.controls.r_max / lambda,
            v_cap: fv * traj.controls.v_cap,
            ..traj.controls
        },
        samples,
        outcome,
    })
}

/// Pointwise relative residual of both radial equations for the lambda-scaled
/// image of a trajectory, maximized over its samples.
///
/// The second derivatives transport as u'' -> l^{e_u+2} u'' and
/// v'' -> l^{e_v+2} v''; the scaled tuple satisfies the system exactly when
/// the scaling exponents are the invariance exponents, so any error in them
/// shows up as a nonzero residual on the resampled grid.
pub fn scaling_residual(traj: &RadialTrajectory, lambda: f64) -> Result<f64> {
    let (e_u, e_v) = scaling_exponents(&traj.params)?;
    let SystemParams { a, b, p, q, s, .. } = traj.params;
    let nf = traj.params.nf();
    let ll = lambda.ln();
    let mut worst: f64 = 0.0;
    for st in &traj.samples {
        let lr = st.r.ln();
        let udd = (a * lr + p * st.v.ln()).exp() - (nf - 1.0) * st.du / st.r;
        let vdd = (b * lr + q * st.v.ln() + s * st.du.ln()).exp() - (nf - 1.0) * st.dv / st.r;

        let lr_s = lr - ll;
        let l_w = (e_u + 1.0) * ll + st.du.ln();
        let l_v = e_v * ll + st.v.ln();
        let l_z = (e_v + 1.0) * ll + st.dv.ln();

        // First equation at the scaled sample.
        let lap_u = ((e_u + 2.0) * ll).exp() * udd + (nf - 1.0) * (l_w - lr_s).exp();
        let rhs_u = (a * lr_s + p * l_v).exp();
        worst = worst.max((lap_u - rhs_u).abs() / lap_u.abs().max(rhs_u.abs()));

        // Second equation at the scaled sample.
        let lap_v = ((e_v + 2.0) * ll).exp() * vdd + (nf - 1.0) * (l_z - lr_s).exp();
        let rhs_v = (b * lr_s + q * l_v + s * l_w).exp();
        worst = worst.max((lap_v - rhs_v).abs() / lap_v.abs().max(rhs_v.abs()));
    }
    Ok(worst)
}

/// Verifies that a candidate trajectory satisfies the radial system:
/// re-integrates from its first sample, landing on every sample radius
/// exactly, and returns the worst relative deviation of (u, u', v, v').
///
/// This is the dynamical oracle for the scaling family: a wrongly scaled
/// trajectory is not a solution and drifts away from the re-integration.
pub fn verify_against_system(params: &SystemParams, traj: &RadialTrajectory) -> Result<f64> {
    if traj.samples.len() < 2 {
        return Err(Error::InvalidInput("trajectory too short to verify".into()));
    }
    let rhs = log_rhs(params);
    let opts = OdeOptions {
        rel_tol: traj.controls.rel_tol,
        abs_tol: traj.controls.abs_tol,
        h_max: traj.controls.max_step_t,
        ..Default::default()
    };
    let mut y = log_state(&traj.samples[0]);
    let mut t = traj.samples[0].r.ln();
    let mut worst: f64 = 0.0;
    for s in &traj.samples[1..] {
        let t_target = s.r.ln();
        if t_target <= t {
            continue;
        }
        let end = ode::integrate(&rhs, t, y, t_target, &opts, |_| Control::Continue)?;
        t = end.t;
        y = end.y;
        let reference = log_state(s);
        for i in 0..4 {
            // Absolute difference of logs == relative difference of values.
            worst = worst.max((y[i] - reference[i]).abs());
        }
    }
    Ok(worst)
}

/// Trailing log-log growth fit of a global trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub slope_u: f64,
    pub slope_v: f64,
    pub log_amp_u: f64,
    pub log_amp_v: f64,
    pub window: (f64, f64),
    pub rms_residual_u: f64,
    pub rms_residual_v: f64,
    pub slope_stderr_u: f64,
    pub slope_stderr_v: f64,
    pub n_samples: usize,
}

/// Least-squares fit of (ln r, ln u) and (ln r, ln v) over the trailing
/// `window_decades` decades of a `GlobalUpTo` trajectory.
pub fn fit_growth(traj: &RadialTrajectory, window_decades: f64) -> Result<GrowthFit> {
    let r_hi = match traj.outcome {
        Outcome::GlobalUpTo(r) => r,
        _ => {
            return Err(Error::WindowTooShort {
                why: "growth fits need a GlobalUpTo trajectory".into(),
            })
        }
    };
    if r_hi < 1e4 {
        return Err(Error::WindowTooShort {
            why: format!("r_max = {r_hi:.3e} < 1e4"),
        });
    }
    if window_decades < 1.0 {
        return Err(Error::WindowTooShort {
            why: format!("window of {window_decades} decades spans less than one decade"),
        });
    }
    let r_lo = r_hi / 10f64.powf(window_decades);
    let window: Vec<&RadialState> = traj.samples.iter().filter(|s| s.r >= r_lo).collect();
    if window.len() < 20 {
        return Err(Error::WindowTooShort {
            why: format!("only {} samples in the fit window", window.len()),
        });
    }
    let lr: Vec<f64> = window.iter().map(|s| s.r.ln()).collect();
    let lu: Vec<f64> = window.iter().map(|s| s.u.ln()).collect();
    let lv: Vec<f64> = window.iter().map(|s| s.v.ln()).collect();
    let (fu, fv) = match (fit::line_fit(&lr, &lu), fit::line_fit(&lr, &lv)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::WindowTooShort {
                why: "degenerate fit window".into(),
            })
        }
    };
    Ok(growth_fit_from(fu, fv, (window[0].r, r_hi), window.len()))
}

fn growth_fit_from(fu: LineFit, fv: LineFit, window: (f64, f64), n: usize) -> GrowthFit {
    GrowthFit {
        slope_u: fu.slope,
        slope_v: fv.slope,
        log_amp_u: fu.intercept,
        log_amp_v: fv.intercept,
        window,
        rms_residual_u: fu.rms_residual,
        rms_residual_v: fv.rms_residual,
        slope_stderr_u: fu.slope_stderr,
        slope_stderr_v: fv.slope_stderr,
        n_samples: n,
    }
}

/// Worst relative violation of the derivative sandwich bounds along a
/// trajectory (0 when every sample satisfies them).
///
/// Checked at each sample, in log space:
///   r^{a+1} v(0)^p / (N+a)          <= u' <= r^{a+1} v^p / (N+a)
///   r^{(a+1)s+b+1} v(0)^{ps+q} / ((N+a)^s (N+s(a+1)+b))
///                                   <= v' <= r^{b+1} v^q u'^s / (N+b)
/// together with the second-derivative bounds
///   (1+a)/(N+a) r^a v^p <= u'' <= r^a v^p
///   (1+b)/(N+b) r^b v^q u'^s <= v'' <= r^b v^q u'^s.
pub fn sandwich_violation(params: &SystemParams, traj: &RadialTrajectory) -> f64 {
    let SystemParams { a, b, p, q, s, .. } = *params;
    let nf = params.nf();
    let lv0 = traj.initial.1.ln();
    let mut worst: f64 = 0.0;
    // Positive when the log inequality lo <= hi is violated.
    fn check(worst: &mut f64, lo: f64, hi: f64) {
        *worst = worst.max(lo - hi);
    }
    for st in &traj.samples {
        let lr = st.r.ln();
        let (lv, ldu, ldv) = (st.v.ln(), st.du.ln(), st.dv.ln());

        // u' bounds.
        let lo = (a + 1.0) * lr + p * lv0 - (nf + a).ln();
        let hi = (a + 1.0) * lr + p * lv - (nf + a).ln();
        check(&mut worst, lo, ldu);
        check(&mut worst, ldu, hi);

        // v' bounds (the lower one with the exact startup divisor).
        let lo = ((a + 1.0) * s + b + 1.0) * lr + (p * s + q) * lv0
            - s * (nf + a).ln()
            - params.ell().ln();
        let hi = (b + 1.0) * lr + q * lv + s * ldu - (nf + b).ln();
        check(&mut worst, lo, ldv);
        check(&mut worst, ldv, hi);

        // Second derivatives from the system itself.
        let rhs_u = (a * lr + p * lv).exp();
        let udd = rhs_u - (nf - 1.0) * st.du / st.r;
        if udd > 0.0 {
            check(&mut worst, (1.0 + a).ln() - (nf + a).ln() + a * lr + p * lv, udd.ln());
            check(&mut worst, udd.ln(), a * lr + p * lv);
        } else {
            worst = worst.max(1.0);
        }
        let rhs_v = (b * lr + q * lv + s * ldu).exp();
        let vdd = rhs_v - (nf - 1.0) * st.dv / st.r;
        if vdd > 0.0 {
            check(&mut worst, (1.0 + b).ln() - (nf + b).ln() + b * lr + q * lv + s * ldu, vdd.ln());
            check(&mut worst, vdd.ln(), b * lr + q * lv + s * ldu);
        } else {
            worst = worst.max(1.0);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exact_power_solution;

    fn p1() -> SystemParams {
        SystemParams::new(3, 0.0, 0.0, 0.5, 0.2, 1.0).unwrap()
    }

    fn blowup_params() -> SystemParams {
        SystemParams::new(3, 0.0, 0.0, 1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn init_state_leading_term() {
        // N = 3, a = 0, v0 = 1: u'(r0) = r0 / 3.
        let sp = p1();
        let st = init_state(&sp, 1.0, 1.0, 1e-3).unwrap();
        assert!((st.du - 1e-3 / 3.0).abs() < 1e-18);

        // r0 -> 0: u', v' -> 0 and u, v -> initial data.
        let st = init_state(&sp, 2.0, 5.0, 1e-12).unwrap();
        assert!(st.du < 1e-11 && st.dv < 1e-11);
        assert!((st.u - 2.0).abs() < 1e-12 && (st.v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn init_state_sandwich() {
        let sp = p1();
        let st = init_state(&sp, 1.0, 1.0, 1e-6).unwrap();
        let lo = st.r.powf(sp.a + 1.0) * traj_v0p(&sp, 1.0) / (sp.nf() + sp.a);
        let hi = st.r.powf(sp.a + 1.0) * st.v.powf(sp.p) / (sp.nf() + sp.a);
        assert!(st.du >= lo * (1.0 - 1e-12));
        assert!(st.du <= hi * (1.0 + 1e-12));
    }

    fn traj_v0p(sp: &SystemParams, v0: f64) -> f64 {
        v0.powf(sp.p)
    }

    #[test]
    fn init_state_rejects_nonpositive() {
        let sp = p1();
        assert!(matches!(
            init_state(&sp, 0.0, 1.0, 1e-6),
            Err(Error::NonPositiveInitialData { .. })
        ));
        assert!(matches!(
            init_state(&sp, 1.0, -2.0, 1e-6),
            Err(Error::NonPositiveInitialData { .. })
        ));
    }

    #[test]
    fn global_run_monotone_and_sandwiched() {
        let sp = p1();
        let controls = IntegrationControls {
            r_max: 10.0,
            ..Default::default()
        };
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        assert_eq!(traj.outcome, Outcome::GlobalUpTo(10.0));
        for w in traj.samples.windows(2) {
            assert!(w[1].r > w[0].r);
            assert!(w[1].u >= w[0].u && w[1].v >= w[0].v);
            assert!(w[1].du >= w[0].du * (1.0 - 1e-9));
            assert!(w[1].dv >= w[0].dv * (1.0 - 1e-9));
        }
        assert!(sandwich_violation(&sp, &traj) < 1e-9);
    }

    #[test]
    fn exact_power_trajectory_fits_exactly() {
        // Sample the closed-form power solution and fit: slopes must be D
        // and A to rounding.
        let sp = p1();
        let sol = exact_power_solution(&sp).unwrap();
        let controls = IntegrationControls {
            r_max: 1e6,
            ..Default::default()
        };
        let samples: Vec<RadialState> = (0..=600)
            .map(|i| {
                let r = 10f64.powf(i as f64 / 100.0);
                RadialState {
                    r,
                    u: sol.u(r),
                    du: sol.du(r),
                    v: sol.v(r),
                    dv: sol.dv(r),
                }
            })
            .collect();
        let traj = RadialTrajectory {
            params: sp,
            initial: (sol.u(controls.r0), sol.v(controls.r0)),
            controls,
            samples,
            outcome: Outcome::GlobalUpTo(1e6),
        };
        let fit = fit_growth(&traj, 1.0).unwrap();
        assert!((fit.slope_u - 7.0).abs() < 1e-12);
        assert!((fit.slope_v - 10.0).abs() < 1e-12);
        assert!(fit.rms_residual_u < 1e-12 && fit.rms_residual_v < 1e-12);
        assert!((fit.log_amp_u - sol.ln_c_u).abs() < 1e-9);
        assert!((fit.log_amp_v - sol.ln_c_v).abs() < 1e-9);
    }

    #[test]
    fn p1_growth_slopes() {
        let sp = p1();
        let controls = IntegrationControls {
            r_max: 1e5,
            ..Default::default()
        };
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        assert_eq!(traj.outcome, Outcome::GlobalUpTo(1e5));
        let fit = fit_growth(&traj, 1.0).unwrap();
        assert!((fit.slope_v - 10.0).abs() < 0.1, "slope_v = {}", fit.slope_v);
        assert!((fit.slope_u - 7.0).abs() < 0.1, "slope_u = {}", fit.slope_u);
    }

    #[test]
    fn p3_growth_slopes() {
        let sp = SystemParams::new(3, 0.0, 0.0, 0.3, 0.2, 2.0).unwrap();
        let traj = integrate(&sp, 1.0, 1.0, &IntegrationControls::default()).unwrap();
        let fit = fit_growth(&traj, 1.0).unwrap();
        assert!((fit.slope_v - 20.0).abs() < 0.2, "slope_v = {}", fit.slope_v);
        assert!((fit.slope_u - 8.0).abs() < 0.1, "slope_u = {}", fit.slope_u);
    }

    #[test]
    fn p2_growth_adjudicates_u_exponent_with_weights() {
        // Nonzero weights separate the two u-exponent variants further:
        // D = 10.5 while the alternative reported numerator gives 8.5.
        let sp = SystemParams::new(4, 1.0, 2.0, 0.5, 0.1, 1.0).unwrap();
        let profile = crate::model::asymptotic_profile(&sp).unwrap();
        assert!((profile.rho_u_reported - 8.5).abs() < 1e-12);
        let traj = integrate(&sp, 1.0, 1.0, &IntegrationControls::default()).unwrap();
        let fit = fit_growth(&traj, 1.0).unwrap();
        assert!((fit.slope_u - 10.5).abs() < 0.1, "slope_u = {}", fit.slope_u);
        assert!((fit.slope_v - 15.0).abs() < 0.15, "slope_v = {}", fit.slope_v);
        let to_derived = (fit.log_amp_u - profile.ln_c_u_derived).abs();
        let to_reported = (fit.log_amp_u - profile.ln_c_u_reported).abs();
        assert!(to_derived < to_reported);
    }

    #[test]
    fn scaling_exponents_match_growth_exponents() {
        // In the rate regime the invariance exponents are (-D, -A), so the
        // exact power pair is a fixed point of the scaling family.
        for sp in [
            p1(),
            SystemParams::new(4, 1.0, 2.0, 0.5, 0.1, 1.0).unwrap(),
            SystemParams::new(3, 0.0, 0.0, 0.3, 0.2, 2.0).unwrap(),
            SystemParams::new(5, 0.7, 1.3, 0.25, 0.3, 1.5).unwrap(),
        ] {
            let (e_u, e_v) = scaling_exponents(&sp).unwrap();
            let profile = crate::model::asymptotic_profile(&sp).unwrap();
            assert!((e_u + profile.d_lim).abs() < 1e-10, "{sp:?}");
            assert!((e_v + profile.a_lim).abs() < 1e-10, "{sp:?}");
        }
    }

    #[test]
    fn blowup_detected_with_consistent_radius() {
        let sp = blowup_params();
        let controls = IntegrationControls {
            r_max: 1e3,
            v_cap: 1e8,
            ..Default::default()
        };
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        let Outcome::BlowUp { radius, uncertainty } = traj.outcome else {
            panic!("expected blow-up, got {:?}", traj.outcome);
        };
        assert!(radius.is_finite() && radius > 0.0);
        assert!(uncertainty < 0.01 * radius, "uncertainty {uncertainty} vs radius {radius}");
        // The trajectory never passes the estimated radius.
        assert!(traj.last().r < radius);
    }

    #[test]
    fn blowup_estimates_agree_across_thresholds() {
        let sp = blowup_params();
        let est = estimate_blowup_radius(&sp, 1.0, 1.0, &[1e4, 1e6, 1e8], &IntegrationControls::default())
            .unwrap();
        assert_eq!(est.per_threshold.len(), 3);
        for (_, r) in &est.per_threshold {
            assert!((r / est.radius - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn blowup_estimate_rejects_bounded_params() {
        let err = estimate_blowup_radius(&p1(), 1.0, 1.0, &[1e4], &IntegrationControls::default());
        assert!(matches!(err, Err(Error::NotABlowUp { .. })));
    }

    #[test]
    fn empirical_classification_three_regimes() {
        let controls = IntegrationControls {
            v_cap: 1e12,
            r_max: 1e3,
            ..Default::default()
        };
        // (1,1,2): both blow up (log-divergent u, the delicate case).
        let sp = blowup_params();
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        assert_eq!(empirical_classification(&traj), BallClassification::BothBlowUp);

        // (1,1,5): u stays bounded while v blows up.
        let sp = SystemParams::new(3, 0.0, 0.0, 1.0, 1.0, 5.0).unwrap();
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        assert_eq!(empirical_classification(&traj), BallClassification::UBoundedVBlowsUp);

        // (2, 0.5, 1): both blow up, u with a clear power divergence.
        let sp = SystemParams::new(3, 0.0, 0.0, 2.0, 0.5, 1.0).unwrap();
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        assert_eq!(empirical_classification(&traj), BallClassification::BothBlowUp);

        // P1 is globally bounded on any finite ball.
        let controls = IntegrationControls {
            r_max: 10.0,
            ..Default::default()
        };
        let traj = integrate(&p1(), 1.0, 1.0, &controls).unwrap();
        assert_eq!(empirical_classification(&traj), BallClassification::AllBounded);
    }

    #[test]
    fn scaling_identity_and_degenerate_cases() {
        let sp = p1();
        let controls = IntegrationControls {
            r_max: 100.0,
            ..Default::default()
        };
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        let same = scale_solution(&traj, 1.0).unwrap();
        assert_eq!(same.samples, traj.samples);

        // a=b=0, p=1, q=1, s=2: the U exponent vanishes.
        let sp2 = blowup_params();
        let (e_u, e_v) = scaling_exponents(&sp2).unwrap();
        assert!(e_u.abs() < 1e-15);
        assert!((e_v - 2.0).abs() < 1e-15);

        // sp + q - 1 = 0 is degenerate.
        let sp3 = SystemParams::new(3, 0.0, 0.0, 0.5, 0.5, 1.0).unwrap();
        assert!(matches!(scaling_exponents(&sp3), Err(Error::DegenerateScaling)));
    }

    #[test]
    fn scaled_trajectory_solves_system() {
        let sp = p1();
        let controls = IntegrationControls {
            r_max: 1e3,
            ..Default::default()
        };
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        let residual = scaling_residual(&traj, 3.0).unwrap();
        assert!(residual < 1e-8, "residual = {residual}");

        // The dynamical route agrees: re-integrating the scaled samples
        // reproduces them, while a corrupted scaling drifts away.
        let scaled = scale_solution(&traj, 3.0).unwrap();
        let drift = verify_against_system(&sp, &scaled).unwrap();
        assert!(drift < 1e-6, "drift = {drift}");
        let mut broken = scaled.clone();
        for s in &mut broken.samples {
            s.u *= 1.001;
        }
        assert!(verify_against_system(&sp, &broken).unwrap() > 1e-4);
    }

    #[test]
    fn scaling_covariance() {
        // integrate-then-scale agrees with scale-initial-data-then-integrate.
        let sp = p1();
        let lambda = 3.0;
        let controls = IntegrationControls {
            r_max: 1e3,
            ..Default::default()
        };
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        let scaled = scale_solution(&traj, lambda).unwrap();

        let (e_u, e_v) = scaling_exponents(&sp).unwrap();
        let direct = integrate(
            &sp,
            lambda.powf(e_u),
            lambda.powf(e_v),
            &IntegrationControls {
                r0: controls.r0 / lambda,
                r_max: controls.r_max / lambda,
                ..controls
            },
        )
        .unwrap();

        // Compare ln v at common radii, interpolating the direct run with a
        // cubic Hermite (the slope of ln v in ln r is the stored r v'/v).
        let lr: Vec<f64> = direct.samples.iter().map(|s| s.r.ln()).collect();
        let lv: Vec<f64> = direct.samples.iter().map(|s| s.v.ln()).collect();
        let dv: Vec<f64> = direct.samples.iter().map(|s| s.r * s.dv / s.v).collect();
        let hermite = |x: f64| -> f64 {
            let idx = lr.partition_point(|&v| v < x);
            let (x0, x1) = (lr[idx - 1], lr[idx]);
            let h = x1 - x0;
            let th = (x - x0) / h;
            let (t2, t3) = (th * th, th * th * th);
            lv[idx - 1] * (2.0 * t3 - 3.0 * t2 + 1.0)
                + dv[idx - 1] * h * (t3 - 2.0 * t2 + th)
                + lv[idx] * (-2.0 * t3 + 3.0 * t2)
                + dv[idx] * h * (t3 - t2)
        };
        let mut checked = 0;
        for s in scaled.samples.iter().step_by(10) {
            let x = s.r.ln();
            if x <= lr[0] || x >= *lr.last().unwrap() {
                continue;
            }
            let err = (hermite(x) - s.v.ln()).abs();
            assert!(err < 1e-6, "err = {err} at r = {}", s.r);
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn csv_shape() {
        let sp = p1();
        let controls = IntegrationControls {
            r_max: 2.0,
            ..Default::default()
        };
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("r,u,du,v,dv"));
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 5);
        // 17 significant digits = 16 digits after the point in e-notation.
        assert!(first.split(',').all(|f| f.contains('.') && f.contains('e')));
    }

    #[test]
    fn fit_growth_window_errors() {
        let sp = p1();
        let controls = IntegrationControls {
            r_max: 100.0,
            ..Default::default()
        };
        let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
        assert!(matches!(fit_growth(&traj, 1.0), Err(Error::WindowTooShort { .. })));
    }

    #[test]
    fn refinement_convergence() {
        // Halving tolerances moves the terminal values by less than 10x the
        // finer tolerance.
        let sp = p1();
        let run = |tol: f64| {
            let controls = IntegrationControls {
                r_max: 1e3,
                rel_tol: tol,
                abs_tol: tol * 1e-2,
                ..Default::default()
            };
            let traj = integrate(&sp, 1.0, 1.0, &controls).unwrap();
            let last = traj.last();
            (last.u.ln(), last.v.ln())
        };
        let tol = 1e-8;
        let (u1, v1) = run(tol);
        let (u2, v2) = run(tol / 2.0);
        assert!((u1 - u2).abs() < 10.0 * (tol / 2.0), "du = {}", (u1 - u2).abs());
        assert!((v1 - v2).abs() < 10.0 * (tol / 2.0), "dv = {}", (v1 - v2).abs());
    }
}
