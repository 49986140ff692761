//! The cooperative dynamical system behind the asymptotic rates.
//!
//! In the variables Y = r v'/v, Z = r^{a+1} v^p / u', W = r^{b+1} v^q u'^s / v'
//! (and X = r u'/u for radial images), with t = ln r, radial solutions satisfy
//! the autonomous cubic system
//!
//! ```text
//!   Y' = Y (W - (N-2) - Y)
//!   Z' = Z (N + a + pY - Z)
//!   W' = W (sZ + N - sN + s + b + qY - W)
//! ```
//!
//! This module evaluates the field and its Jacobian, integrates flows,
//! checks the comparison principle and box bounds, detects omega-limit
//! equilibria, and bounds the field divergence over the box
//! L = [xi1, xi2].

use crate::error::{Error, Result};
use crate::model::{self, Equilibrium};
use crate::ode::{self, Control, OdeOptions};
use crate::params::SystemParams;
use crate::shooter::{RadialState, RadialTrajectory};
use serde::{Deserialize, Serialize};

/// Coordinate cap beyond which a phase flow is reported divergent.
pub const DIVERGENCE_CAP: f64 = 1e8;

/// A point of the phase flow. `x` is present only for images of radial
/// trajectories; the reduced system evolves (y, z, w) alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub x: Option<f64>,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

/// Which equilibrium a trajectory settled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhichEquilibrium {
    Xi1,
    Xi2,
}

/// Omega-limit verdict of a phase trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    ConvergedTo(WhichEquilibrium),
    /// Tail did not settle (too short, or a possible cycle); never silently
    /// classified.
    Undecided,
}

/// Flow samples of the reduced system, ordered in t.
#[derive(Debug, Clone)]
pub struct PhaseTrajectory {
    pub params: SystemParams,
    pub samples: Vec<PhasePoint>,
    pub limit_verdict: LimitVerdict,
}

/// The reduced vector field h at (Y, Z, W).
pub fn vector_field(params: &SystemParams, point: [f64; 3]) -> [f64; 3] {
    let [y, z, w] = point;
    let nf = params.nf();
    let SystemParams { a, b, p, q, s, .. } = *params;
    [
        y * (w - (nf - 2.0) - y),
        z * (nf + a + p * y - z),
        w * (s * z + nf - s * nf + s + b + q * y - w),
    ]
}

/// Jacobian of h at (Y, Z, W).
pub fn jacobian(params: &SystemParams, point: [f64; 3]) -> [[f64; 3]; 3] {
    let [y, z, w] = point;
    let nf = params.nf();
    let SystemParams { a, b, p, q, s, .. } = *params;
    [
        [w - (nf - 2.0) - 2.0 * y, 0.0, y],
        [p * z, nf + a + p * y - 2.0 * z, 0.0],
        [q * w, s * w, s * z + nf - s * nf + s + b + q * y - 2.0 * w],
    ]
}

/// Maps a radial state to its phase coordinates (computed in log space).
pub fn to_phase(params: &SystemParams, state: &RadialState) -> Result<PhasePoint> {
    if !(state.du > 0.0 && state.dv > 0.0 && state.u > 0.0 && state.v > 0.0) {
        return Err(Error::DegenerateState);
    }
    let lr = state.r.ln();
    let (lu, lw, lv, lz) = (state.u.ln(), state.du.ln(), state.v.ln(), state.dv.ln());
    let SystemParams { a, b, p, q, s, .. } = *params;
    Ok(PhasePoint {
        t: lr,
        x: Some((lr + lw - lu).exp()),
        y: (lr + lz - lv).exp(),
        z: ((a + 1.0) * lr + p * lv - lw).exp(),
        w: ((b + 1.0) * lr + q * lv + s * lw - lz).exp(),
    })
}

/// Phase image of a whole radial trajectory.
pub fn phase_image(params: &SystemParams, traj: &RadialTrajectory) -> Result<Vec<PhasePoint>> {
    traj.samples.iter().map(|s| to_phase(params, s)).collect()
}

/// Phase image packaged as a trajectory, with its omega-limit verdict.
///
/// Images converge in t = ln r only as far as r_max allows, so the verdict
/// uses a 1% tolerance rather than the flow default.
pub fn image_trajectory(params: &SystemParams, traj: &RadialTrajectory) -> Result<PhaseTrajectory> {
    let samples = phase_image(params, traj)?;
    let mut out = PhaseTrajectory {
        params: *params,
        samples,
        limit_verdict: LimitVerdict::Undecided,
    };
    out.limit_verdict = omega_limit(&out, 0.2, 1e-2);
    Ok(out)
}

/// CSV export of phase samples, header `t,X,Y,Z,W`; the X field is empty
/// for flows that were not images of radial runs.
pub fn phase_csv(points: &[PhasePoint]) -> String {
    let mut out = String::with_capacity(points.len() * 100 + 12);
    out.push_str("t,X,Y,Z,W\n");
    for p in points {
        let x = p.x.map_or(String::new(), |x| format!("{x:.16e}"));
        out.push_str(&format!(
            "{:.16e},{x},{:.16e},{:.16e},{:.16e}\n",
            p.t, p.y, p.z, p.w
        ));
    }
    out
}

/// Integrates the reduced flow from `xi0` over `t_span`.
///
/// Fails with `PhaseDivergence` if any coordinate exceeds [`DIVERGENCE_CAP`]
/// (outside any admissible box). The omega-limit verdict is attached using
/// the default tail window.
pub fn integrate_phase(
    params: &SystemParams,
    xi0: [f64; 3],
    t_span: (f64, f64),
    opts: &OdeOptions,
) -> Result<PhaseTrajectory> {
    if xi0.iter().any(|c| *c < 0.0 || !c.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "phase initial point must be nonnegative and finite, got {xi0:?}"
        )));
    }
    let p = *params;
    let rhs = move |_t: f64, y: &[f64; 3]| vector_field(&p, *y);

    let mut samples = vec![PhasePoint {
        t: t_span.0,
        x: None,
        y: xi0[0],
        z: xi0[1],
        w: xi0[2],
    }];
    let mut diverged_at = None;
    ode::integrate(rhs, t_span.0, xi0, t_span.1, opts, |step| {
        samples.push(PhasePoint {
            t: step.t1,
            x: None,
            y: step.y1[0],
            z: step.y1[1],
            w: step.y1[2],
        });
        if step.y1.iter().any(|c| c.abs() > DIVERGENCE_CAP) {
            diverged_at = Some(step.t1);
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if let Some(t) = diverged_at {
        return Err(Error::PhaseDivergence { cap: DIVERGENCE_CAP, t });
    }

    let mut traj = PhaseTrajectory {
        params: *params,
        samples,
        limit_verdict: LimitVerdict::Undecided,
    };
    traj.limit_verdict = omega_limit(&traj, 0.2, 1e-6);
    Ok(traj)
}

fn within(point: &PhasePoint, eq: &Equilibrium, tol: f64) -> bool {
    let close = |v: f64, e: f64| (v - e).abs() <= tol * e.abs().max(1.0);
    close(point.y, eq.y) && close(point.z, eq.z) && close(point.w, eq.w)
}

/// Decides whether the trailing `tail_fraction` of the trajectory stays
/// within `tol` (relative) of an equilibrium. The tail window must span at
/// least 5 time units, otherwise the verdict is `Undecided`.
pub fn omega_limit(traj: &PhaseTrajectory, tail_fraction: f64, tol: f64) -> LimitVerdict {
    let Some(last) = traj.samples.last() else {
        return LimitVerdict::Undecided;
    };
    let first_t = traj.samples[0].t;
    let window = (last.t - first_t) * tail_fraction.clamp(0.0, 1.0);
    if window < 5.0 {
        return LimitVerdict::Undecided;
    }
    let cut = last.t - window;
    let tail: Vec<&PhasePoint> = traj.samples.iter().filter(|s| s.t >= cut).collect();
    if tail.is_empty() {
        return LimitVerdict::Undecided;
    }

    let (xi1, xi2) = model::equilibria(&traj.params);
    if let Some(xi2) = xi2 {
        if tail.iter().all(|s| within(s, &xi2, tol)) {
            return LimitVerdict::ConvergedTo(WhichEquilibrium::Xi2);
        }
    }
    if tail.iter().all(|s| within(s, &xi1, tol)) {
        return LimitVerdict::ConvergedTo(WhichEquilibrium::Xi1);
    }
    LimitVerdict::Undecided
}

/// Outcome of a comparison-principle check on one ordered pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonReport {
    /// max over time and components of max(0, low_i - high_i).
    pub max_violation: f64,
    pub passes: bool,
    pub n_steps: usize,
}

/// Integrates an ordered pair of initial points jointly and reports the
/// worst componentwise order violation over the time span.
///
/// The pair is stacked into one 6-dimensional system so both flows share an
/// identical time grid; no interpolation enters the comparison.
pub fn comparison_check(
    params: &SystemParams,
    xi_low: [f64; 3],
    xi_high: [f64; 3],
    t_span: (f64, f64),
    opts: &OdeOptions,
) -> Result<ComparisonReport> {
    for i in 0..3 {
        if xi_low[i] > xi_high[i] {
            return Err(Error::InvalidInput(format!(
                "initial points are not ordered in component {i}: {} > {}",
                xi_low[i], xi_high[i]
            )));
        }
    }
    let p = *params;
    let rhs = move |_t: f64, y: &[f64; 6]| {
        let lo = vector_field(&p, [y[0], y[1], y[2]]);
        let hi = vector_field(&p, [y[3], y[4], y[5]]);
        [lo[0], lo[1], lo[2], hi[0], hi[1], hi[2]]
    };
    let y0 = [
        xi_low[0], xi_low[1], xi_low[2], xi_high[0], xi_high[1], xi_high[2],
    ];
    let mut max_violation: f64 = 0.0;
    let mut n_steps = 0usize;
    ode::integrate(rhs, t_span.0, y0, t_span.1, opts, |step| {
        n_steps += 1;
        for i in 0..3 {
            max_violation = max_violation.max(step.y1[i] - step.y1[i + 3]);
        }
        Control::Continue
    })?;
    Ok(ComparisonReport {
        max_violation,
        passes: max_violation <= 1e-9,
        n_steps,
    })
}

/// A sample that left the box L (violations are data, not errors).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoxViolation {
    pub t: f64,
    pub component: char,
    pub excess: f64,
}

/// Checks 0 <= Y <= A, N+a <= Z <= B, N+s(a+1)+b <= W <= K at every point.
///
/// The bounds are proven only for phase images of genuine radial solutions;
/// for arbitrary flows the report is still faithful.
pub fn box_check(params: &SystemParams, points: &[PhasePoint]) -> Result<Vec<BoxViolation>> {
    let (xi1, xi2) = model::equilibria(params);
    let Some(xi2) = xi2 else {
        return Err(Error::HypothesisViolated {
            what: "box bounds need ps + q < 1".into(),
        });
    };
    let mut violations = Vec::new();
    let mut push = |t: f64, component: char, excess: f64| {
        if excess > 0.0 {
            violations.push(BoxViolation { t, component, excess });
        }
    };
    for pt in points {
        push(pt.t, 'Y', (-pt.y).max(pt.y - xi2.y));
        push(pt.t, 'Z', (xi1.z - pt.z).max(pt.z - xi2.z));
        push(pt.t, 'W', (xi1.w - pt.w).max(pt.w - xi2.w));
    }
    Ok(violations)
}

/// Exact range of div h over the closed box L = [xi1, xi2].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DivergenceBox {
    pub min: f64,
    pub max: f64,
    pub argmin: [f64; 3],
    pub argmax: [f64; 3],
    /// Whether the closed-form divergence condition holds.
    pub condition_holds: bool,
    /// max < 0, i.e. the cycle-exclusion hypothesis verified on L.
    pub negative_on_box: bool,
}

/// Evaluates div h at the 8 corners of L and returns its exact min/max
/// (div h is affine, so corners are extremal).
pub fn divergence_box(params: &SystemParams) -> Result<DivergenceBox> {
    let (xi1, xi2) = model::equilibria(params);
    let xi2 = xi2.ok_or_else(|| Error::HypothesisViolated {
        what: "divergence box needs ps + q < 1".into(),
    })?;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut argmin = [0.0; 3];
    let mut argmax = [0.0; 3];
    for iy in 0..2 {
        for iz in 0..2 {
            for iw in 0..2 {
                let corner = [
                    if iy == 0 { xi1.y } else { xi2.y },
                    if iz == 0 { xi1.z } else { xi2.z },
                    if iw == 0 { xi1.w } else { xi2.w },
                ];
                let d = model::div_h(params, corner);
                if d < min {
                    min = d;
                    argmin = corner;
                }
                if d > max {
                    max = d;
                    argmax = corner;
                }
            }
        }
    }
    Ok(DivergenceBox {
        min,
        max,
        argmin,
        argmax,
        condition_holds: model::divergence_condition(params)?,
        negative_on_box: max < 0.0,
    })
}


#[cfg(test)]
mod invariant_tests {
    use super::*;
    use crate::model::exact_power_solution;
    use crate::shooter::{self, IntegrationControls, RadialState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p1() -> SystemParams {
        SystemParams::new(3, 0.0, 0.0, 0.5, 0.2, 1.0).unwrap()
    }

    #[test]
    fn exact_power_image_is_constant() {
        // The phase image of the pure power solution is (D, A, B, K) at
        // every radius.
        for sp in [p1(), SystemParams::new(4, 1.0, 2.0, 0.5, 0.1, 1.0).unwrap()] {
            let sol = exact_power_solution(&sp).unwrap();
            let profile = crate::model::asymptotic_profile(&sp).unwrap();
            for r in [1e-3, 1.0, 1e3, 1e6] {
                let state = RadialState {
                    r,
                    u: sol.u(r),
                    du: sol.du(r),
                    v: sol.v(r),
                    dv: sol.dv(r),
                };
                let pt = to_phase(&sp, &state).unwrap();
                assert!((pt.x.unwrap() - profile.d_lim).abs() < 1e-10 * profile.d_lim);
                assert!((pt.y - profile.a_lim).abs() < 1e-10 * profile.a_lim);
                assert!((pt.z - profile.b_lim).abs() < 1e-10 * profile.b_lim);
                assert!((pt.w - profile.k_lim).abs() < 1e-10 * profile.k_lim);
            }
        }
    }

    #[test]
    fn startup_image_sits_at_the_lower_corner() {
        // As r0 -> 0 the image of the startup state approaches
        // (Y, Z, W) = (0, N+a, N+s(a+1)+b).
        let sp = SystemParams::new(4, 1.5, 0.5, 0.4, 0.3, 2.0).unwrap();
        for r0 in [1e-4, 1e-6, 1e-8] {
            let st = shooter::init_state(&sp, 1.0, 1.0, r0).unwrap();
            let pt = to_phase(&sp, &st).unwrap();
            assert!(pt.y < 1e-3 * (1e-4 / r0));
            assert!((pt.z - (sp.nf() + sp.a)).abs() < 1e-3);
            assert!((pt.w - sp.ell()).abs() < 1e-3);
        }
    }

    #[test]
    fn cooperativity_at_random_box_points() {
        // Off-diagonal Jacobian entries are nonnegative at 100 random
        // points of the box L.
        let sp = p1();
        let (xi1, xi2) = crate::model::equilibria(&sp);
        let xi2 = xi2.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let point = [
                xi1.y + rng.gen::<f64>() * (xi2.y - xi1.y),
                xi1.z + rng.gen::<f64>() * (xi2.z - xi1.z),
                xi1.w + rng.gen::<f64>() * (xi2.w - xi1.w),
            ];
            let jac = jacobian(&sp, point);
            for (i, row) in jac.iter().enumerate() {
                for (j, entry) in row.iter().enumerate() {
                    if i != j {
                        assert!(*entry >= 0.0, "({i},{j}) at {point:?}");
                    }
                }
            }
            // Affine divergence equals the Jacobian trace everywhere.
            let trace: f64 = (0..3).map(|i| jac[i][i]).sum();
            let d = crate::model::div_h(&sp, point);
            assert!((trace - d).abs() <= 1e-12 * trace.abs().max(1.0));
        }
    }

    #[test]
    fn x_equation_consistency_along_radial_image() {
        // X(t) - (Z(t) - (N-2)) -> 0 along images of radial runs; the tail
        // average stays below 1e-3.
        let sp = p1();
        let controls = IntegrationControls {
            r_max: 1e5,
            ..Default::default()
        };
        let traj = shooter::integrate(&sp, 1.0, 1.0, &controls).unwrap();
        let image = phase_image(&sp, &traj).unwrap();
        let t_max = image.last().unwrap().t;
        let tail: Vec<&PhasePoint> = image.iter().filter(|p| p.t >= t_max - 2.3).collect();
        assert!(tail.len() > 20);
        let avg: f64 = tail
            .iter()
            .map(|p| (p.x.unwrap() - (p.z - (sp.nf() - 2.0))).abs())
            .sum::<f64>()
            / tail.len() as f64;
        assert!(avg < 1e-3, "tail average {avg}");
    }
}
