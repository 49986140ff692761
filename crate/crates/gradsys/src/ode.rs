//! Adaptive Dormand-Prince 5(4) integration.
//!
//! Fixed-dimension explicit Runge-Kutta pair with embedded error estimate,
//! FSAL, and the classic PI step-size controller. Callers receive every
//! accepted step through a callback, together with the derivatives at both
//! endpoints so cubic Hermite interpolation inside a step is possible
//! (threshold crossings, dense sampling).

use crate::error::{Error, Result};

/// Error and step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; picked automatically when `None`.
    pub h0: Option<f64>,
    /// Hard cap on the step size (also bounds the sampling interval).
    pub h_max: f64,
    /// Steps below this abort integration with `StepSizeUnderflow`.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h0: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 10_000_000,
        }
    }
}

/// One accepted step, with derivatives at both endpoints.
#[derive(Debug, Clone, Copy)]
pub struct Step<const D: usize> {
    pub t0: f64,
    pub y0: [f64; D],
    pub dy0: [f64; D],
    pub t1: f64,
    pub y1: [f64; D],
    pub dy1: [f64; D],
}

impl<const D: usize> Step<D> {
    /// Cubic Hermite interpolant of component `i` at fraction `theta` of the
    /// step (theta in [0, 1]).
    pub fn hermite(&self, i: usize, theta: f64) -> f64 {
        let h = self.t1 - self.t0;
        let (y0, y1) = (self.y0[i], self.y1[i]);
        let (d0, d1) = (self.dy0[i] * h, self.dy1[i] * h);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + theta)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }

    /// Solves `hermite(i, theta) = target` for theta in [0, 1] by bisection.
    /// Intended for components monotone across the step.
    pub fn crossing(&self, i: usize, target: f64) -> Option<f64> {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let (flo, fhi) = (self.y0[i] - target, self.y1[i] - target);
        if flo == 0.0 {
            return Some(0.0);
        }
        if flo * fhi > 0.0 {
            return None;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let fm = self.hermite(i, mid) - target;
            if fm == 0.0 {
                return Some(mid);
            }
            if flo * fm < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// Callback verdict after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    /// Stop after this step (event reached); integration ends successfully.
    Stop,
}

/// Terminal state of an integration.
#[derive(Debug, Clone, Copy)]
pub struct OdeEnd<const D: usize> {
    pub t: f64,
    pub y: [f64; D],
    pub dy: [f64; D],
    pub n_accepted: usize,
    pub n_rejected: usize,
    /// True when the callback requested a stop before t_end.
    pub stopped_by_callback: bool,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Error coefficients (5th-order weights minus embedded 4th-order weights).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn initial_step<const D: usize>(f0: &[f64; D], y0: &[f64; D], opts: &OdeOptions, span: f64) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..D {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    let h = if d0 >= 1e-10 && d1 >= 1e-10 {
        0.01 * (d0 / d1).sqrt()
    } else {
        1e-6 * span.abs()
    };
    h.min(opts.h_max).min(span.abs()).max(opts.h_min)
}

/// Integrates dy/dt = rhs(t, y) from (t0, y0) toward t_end (t_end > t0),
/// invoking `on_step` after every accepted step.
pub fn integrate<const D: usize, F, CB>(
    rhs: F,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: &OdeOptions,
    mut on_step: CB,
) -> Result<OdeEnd<D>>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    CB: FnMut(&Step<D>) -> Control,
{
    // Hairer's PI controller constants for DOPRI5.
    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FAC_MIN: f64 = 0.2; // max shrink per step
    const FAC_MAX: f64 = 10.0; // max growth per step

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = opts.h0.unwrap_or_else(|| initial_step(&k1, &y, opts, t_end - t0));
    let mut facold: f64 = 1e-4;
    let mut n_accepted = 0usize;
    let mut n_rejected = 0usize;
    let mut k = [[0.0; D]; 7];

    loop {
        let remaining = t_end - t;
        // Done when within a few ulps of the endpoint.
        if remaining <= 4.0 * f64::EPSILON * t_end.abs().max(t.abs()).max(1.0) {
            break;
        }
        if n_accepted + n_rejected >= opts.max_steps {
            return Err(Error::InvalidInput(format!(
                "maximum number of steps ({}) exceeded at t = {t}",
                opts.max_steps
            )));
        }
        h = h.min(opts.h_max);
        let landing = h >= remaining * (1.0 - 1e-12);
        if landing {
            h = remaining;
        }
        if h < opts.h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        k[0] = k1;
        for stage in 1..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let aij = A[stage][j];
                if aij != 0.0 {
                    for i in 0..D {
                        ys[i] += h * aij * kj[i];
                    }
                }
            }
            k[stage] = rhs(t + C[stage] * h, &ys);
        }
        // The last row of A holds the 5th-order weights, so this combination
        // is the solution itself and k[6] = rhs(t + h, y1) gives FSAL.
        let mut y1 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let bj = A[6][j];
            if bj != 0.0 {
                for i in 0..D {
                    y1[i] += h * bj * kj[i];
                }
            }
        }
        let k7 = rhs(t + h, &y1);
        k[6] = k7;

        let mut err: f64 = 0.0;
        for i in 0..D {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / D as f64).sqrt();

        if err.is_finite() && err <= 1.0 {
            let fac11 = err.max(1e-30).powf(EXPO1);
            let fac = (fac11 / facold.powf(BETA)).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let h_new = h / (fac / SAFE).max(1.0 / FAC_MAX);
            facold = err.max(1e-4);

            let t1 = if landing { t_end } else { t + h };
            let step = Step {
                t0: t,
                y0: y,
                dy0: k[0],
                t1,
                y1,
                dy1: k7,
            };
            t = t1;
            y = y1;
            k1 = k7;
            n_accepted += 1;
            if on_step(&step) == Control::Stop {
                return Ok(OdeEnd {
                    t,
                    y,
                    dy: k1,
                    n_accepted,
                    n_rejected,
                    stopped_by_callback: true,
                });
            }
            h = h_new;
        } else {
            let fac11 = if err.is_finite() { err.max(1e-30).powf(EXPO1) } else { 1.0 / FAC_MIN };
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            n_rejected += 1;
        }
    }

    Ok(OdeEnd {
        t,
        y,
        dy: k1,
        n_accepted,
        n_rejected,
        stopped_by_callback: false,
    })
}
