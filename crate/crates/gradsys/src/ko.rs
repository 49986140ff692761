//! Keller-Osserman convergence analysis for general nonlinearities f.
//!
//! The boundary classification in a ball is decided by the improper
//! integrals
//!
//! ```text
//!   I_plain    = integral_1^inf   ds / G(s)^{p/(2p-q+1)}
//!   I_weighted = integral_1^inf s ds / G(s)^{p/(2p-q+1)}
//! ```
//!
//! with F(t) = integral_0^t f and G(s) = integral_0^s F. Convergence is
//! decided numerically: the integrand is evaluated on a log grid up to a
//! cutoff (default 1e12), its local log-log slope is estimated over the last
//! two decades, and a verdict is issued with a symmetric margin around the
//! critical slope -1. Everything slope-related is computed in log space;
//! F and G themselves stay within f64 range for the supported cutoffs.

use crate::error::{Error, Result};
use crate::fit;
use crate::model::{BallClassification, OutOfTheoryReason};
use crate::quad::adaptive_simpson;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Default evaluation cutoff of the improper integrals.
pub const DEFAULT_CUTOFF: f64 = 1e12;
/// Verdict margin around the critical tail slope -1.
pub const SLOPE_MARGIN: f64 = 0.05;
/// Log-grid resolution (points per decade).
const POINTS_PER_DECADE: usize = 8;
/// Quadrature tolerance for the cumulative integrals.
const QUAD_TOL: f64 = 1e-11;

/// A nonlinearity f: monotone increasing on [0, inf), positive on (0, inf).
#[derive(Clone)]
pub enum Nonlinearity {
    /// f(t) = t^s with s >= 1.
    PowerLaw { s: f64 },
    /// Log-log linear interpolation through strictly increasing knots,
    /// extended beyond the grid by extrapolating the boundary segments.
    Tabulated { ln_t: Vec<f64>, ln_f: Vec<f64> },
    /// Arbitrary evaluator (monotonicity spot-checked at construction).
    Callable(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Nonlinearity::PowerLaw { s } => write!(f, "PowerLaw {{ s: {s} }}"),
            Nonlinearity::Tabulated { ln_t, .. } => {
                write!(f, "Tabulated {{ {} knots }}", ln_t.len())
            }
            Nonlinearity::Callable(_) => write!(f, "Callable"),
        }
    }
}

impl Nonlinearity {
    pub fn power(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 1.0 {
            return Err(Error::GradientExponentTooSmall { value: s });
        }
        Ok(Nonlinearity::PowerLaw { s })
    }

    /// Builds a tabulated nonlinearity from (t, f) knots. The t grid must be
    /// strictly increasing and positive past an optional leading t = 0 knot;
    /// f must be positive and nondecreasing.
    pub fn tabulated(ts: &[f64], fs: &[f64]) -> Result<Self> {
        if ts.len() != fs.len() {
            return Err(Error::NonMonotoneInput {
                why: "t and f columns differ in length".into(),
            });
        }
        let skip = usize::from(ts.first() == Some(&0.0));
        let ts = &ts[skip..];
        let fs = &fs[skip..];
        if ts.len() < 2 {
            return Err(Error::NonMonotoneInput {
                why: "need at least two positive knots".into(),
            });
        }
        for i in 0..ts.len() {
            if !(ts[i].is_finite() && fs[i].is_finite()) || ts[i] <= 0.0 || fs[i] <= 0.0 {
                return Err(Error::NonMonotoneInput {
                    why: format!("knot {i} not positive: ({}, {})", ts[i], fs[i]),
                });
            }
            if i > 0 && ts[i] <= ts[i - 1] {
                return Err(Error::NonMonotoneInput {
                    why: format!("t grid not strictly increasing at knot {i}"),
                });
            }
            if i > 0 && fs[i] < fs[i - 1] {
                return Err(Error::NonMonotoneInput {
                    why: format!("f not nondecreasing at knot {i}"),
                });
            }
        }
        Ok(Nonlinearity::Tabulated {
            ln_t: ts.iter().map(|t| t.ln()).collect(),
            ln_f: fs.iter().map(|f| f.ln()).collect(),
        })
    }

    /// Wraps an evaluator, spot-checking positivity and monotonicity on a
    /// log grid over [1e-6, 1e6].
    pub fn callable<F>(f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut prev = 0.0;
        for i in 0..=120 {
            let t = 10f64.powf(-6.0 + f64::from(i) * 0.1);
            let val = f(t);
            if !val.is_finite() || val <= 0.0 {
                return Err(Error::NonMonotoneInput {
                    why: format!("f({t}) = {val} is not positive and finite"),
                });
            }
            if val < prev * (1.0 - 1e-12) {
                return Err(Error::NonMonotoneInput {
                    why: format!("f decreases near t = {t}"),
                });
            }
            prev = val;
        }
        Ok(Nonlinearity::Callable(Arc::new(f)))
    }

    /// Evaluates f(t) for t >= 0.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::PowerLaw { s } => t.powf(*s),
            Nonlinearity::Tabulated { ln_t, ln_f } => {
                if t <= 0.0 {
                    return 0.0;
                }
                let lt = t.ln();
                // Segment index, extrapolating from the boundary segments.
                let idx = match ln_t.partition_point(|&x| x < lt) {
                    0 => 0,
                    i if i >= ln_t.len() => ln_t.len() - 2,
                    i => i - 1,
                };
                let m = (ln_f[idx + 1] - ln_f[idx]) / (ln_t[idx + 1] - ln_t[idx]);
                (ln_f[idx] + m * (lt - ln_t[idx])).exp()
            }
            Nonlinearity::Callable(f) => f(t),
        }
    }

    /// True when evaluation at `t` required extrapolating a tabulated grid.
    pub fn extrapolated_at(&self, t: f64) -> bool {
        match self {
            Nonlinearity::Tabulated { ln_t, .. } => {
                t > 0.0 && (t.ln() < ln_t[0] || t.ln() > *ln_t.last().unwrap())
            }
            _ => false,
        }
    }
}

/// Convergent / divergent / inconclusive, with the slope evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Verdict on one improper integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub verdict: Verdict,
    /// Estimated log-log slope of the integrand over the tail window.
    pub tail_exponent_estimate: f64,
    /// Range of local (two-point) slopes across the tail window.
    pub confidence_band: (f64, f64),
}

fn verdict_from_slope(slope: f64, band: (f64, f64)) -> ConvergenceVerdict {
    let verdict = if slope < -1.0 - SLOPE_MARGIN {
        Verdict::Convergent
    } else if slope > -1.0 + SLOPE_MARGIN {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    ConvergenceVerdict {
        verdict,
        tail_exponent_estimate: slope,
        confidence_band: band,
    }
}

// 20-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
const GL20_X: [f64; 10] = [
    0.0765265211334973,
    0.2277858511416451,
    0.3737060887154195,
    0.5108670019508271,
    0.636053680726515,
    0.7463319064601508,
    0.8391169718222188,
    0.912234428251326,
    0.9639719272779138,
    0.9931285991850949,
];
const GL20_W: [f64; 10] = [
    0.1527533871307258,
    0.1491729864726037,
    0.142096109318382,
    0.1316886384491766,
    0.1181945319615184,
    0.1019301198172404,
    0.0832767415767048,
    0.0626720483341091,
    0.0406014298003869,
    0.0176140071391521,
];

/// Cumulative integrals F(t) = int_0^t f and G(s) = int_0^s F on a grid.
///
/// F accumulates by adaptive quadrature panel by panel; the outer integral
/// for G uses a 20-point Gauss rule per panel, with F at the ordered nodes
/// built up incrementally by adaptive quadrature of f between nodes.
pub fn cumulative(f: &Nonlinearity, t_grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    for (i, &t) in t_grid.iter().enumerate() {
        if !t.is_finite() || t <= 0.0 || (i > 0 && t <= t_grid[i - 1]) {
            return Err(Error::NonMonotoneInput {
                why: format!("grid must be positive and increasing (index {i})"),
            });
        }
    }
    let eval = |t: f64| f.eval(t);
    let mut f_cum = Vec::with_capacity(t_grid.len());
    let mut g_cum = Vec::with_capacity(t_grid.len());
    let mut f_acc = 0.0;
    let mut g_acc = 0.0;
    let mut prev = 0.0;
    for &t in t_grid {
        let center = 0.5 * (prev + t);
        let half = 0.5 * (t - prev);
        let mut nodes = [0.0; 20];
        for i in 0..10 {
            nodes[9 - i] = center - half * GL20_X[i];
            nodes[10 + i] = center + half * GL20_X[i];
        }
        let mut f_at = f_acc;
        let mut x_prev = prev;
        let mut g_panel = 0.0;
        for (j, &x) in nodes.iter().enumerate() {
            f_at += adaptive_simpson(&eval, x_prev, x, QUAD_TOL, 0.0);
            x_prev = x;
            let w = if j < 10 { GL20_W[9 - j] } else { GL20_W[j - 10] };
            g_panel += w * f_at;
        }
        f_acc = f_at + adaptive_simpson(&eval, x_prev, t, QUAD_TOL, 0.0);
        g_acc += half * g_panel;
        f_cum.push(f_acc);
        g_cum.push(g_acc);
        prev = t;
    }
    Ok((f_cum, g_cum))
}

/// Log grid of `POINTS_PER_DECADE` points per decade from 1e-3 to `cutoff`.
fn ko_grid(cutoff: f64) -> Vec<f64> {
    let lo = -3.0;
    let hi = cutoff.log10();
    let n = ((hi - lo) * POINTS_PER_DECADE as f64).ceil() as usize;
    (0..=n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / n as f64))
        .collect()
}

/// Tail slope of ln I against ln s over the last two decades of the grid.
fn tail_slope(grid: &[f64], ln_integrand: &[f64], cutoff: f64) -> (f64, (f64, f64)) {
    let lo = cutoff / 100.0;
    let xs: Vec<f64> = grid
        .iter()
        .zip(ln_integrand)
        .filter(|(s, _)| **s >= lo)
        .map(|(s, _)| s.ln())
        .collect();
    let ys: Vec<f64> = grid
        .iter()
        .zip(ln_integrand)
        .filter(|(s, _)| **s >= lo)
        .map(|(_, v)| *v)
        .collect();
    let fit = fit::line_fit(&xs, &ys).expect("tail window spans two decades");
    let mut band = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 1..xs.len() {
        let local = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
        band.0 = band.0.min(local);
        band.1 = band.1.max(local);
    }
    (fit.slope, band)
}

/// The pair of verdicts for the plain and s-weighted integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KoVerdicts {
    pub plain: ConvergenceVerdict,
    pub weighted: ConvergenceVerdict,
    pub cutoff: f64,
    /// True when a tabulated nonlinearity was extended past its grid by
    /// log-log extrapolation to reach the cutoff.
    pub extrapolated: bool,
}

/// Decides both classification integrals at the default cutoff.
pub fn ko_verdicts(f: &Nonlinearity, p: f64, q: f64) -> Result<KoVerdicts> {
    ko_verdicts_with_cutoff(f, p, q, DEFAULT_CUTOFF)
}

/// Decides both classification integrals, evaluating up to `cutoff`.
pub fn ko_verdicts_with_cutoff(f: &Nonlinearity, p: f64, q: f64, cutoff: f64) -> Result<KoVerdicts> {
    let guard = 2.0 * p - q + 1.0;
    if guard <= 0.0 {
        return Err(Error::GuardViolation { value: guard });
    }
    if !cutoff.is_finite() || cutoff <= 1e6 {
        return Err(Error::InvalidInput("cutoff must exceed 1e6".into()));
    }
    let e = p / guard;
    let grid = ko_grid(cutoff);
    let (_, g) = cumulative(f, &grid)?;
    let ln_plain: Vec<f64> = g.iter().map(|gi| -e * gi.ln()).collect();
    let ln_weighted: Vec<f64> = grid
        .iter()
        .zip(&ln_plain)
        .map(|(s, lp)| s.ln() + lp)
        .collect();
    let (sp, bp) = tail_slope(&grid, &ln_plain, cutoff);
    let (sw, bw) = tail_slope(&grid, &ln_weighted, cutoff);
    Ok(KoVerdicts {
        plain: verdict_from_slope(sp, bp),
        weighted: verdict_from_slope(sw, bw),
        cutoff,
        extrapolated: f.extrapolated_at(cutoff),
    })
}

/// Boundary classification from the numerical verdicts:
/// plain divergent -> all bounded; weighted convergent -> u bounded, v blows
/// up; plain convergent + weighted divergent -> both blow up. Inconclusive
/// verdicts propagate instead of being forced into a clause.
pub fn integral_classify(f: &Nonlinearity, p: f64, q: f64) -> Result<BallClassification> {
    let v = ko_verdicts(f, p, q)?;
    Ok(classify_from_verdicts(&v))
}

/// Classification decision table on an existing verdict pair.
pub fn classify_from_verdicts(v: &KoVerdicts) -> BallClassification {
    match (v.plain.verdict, v.weighted.verdict) {
        (Verdict::Divergent, _) => BallClassification::AllBounded,
        (_, Verdict::Convergent) => BallClassification::UBoundedVBlowsUp,
        (Verdict::Convergent, Verdict::Divergent) => BallClassification::BothBlowUp,
        _ => BallClassification::OutOfTheory(OutOfTheoryReason::KoInconclusive),
    }
}

/// One grid point of the cumulative-form inequality check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InequalityPoint {
    pub s: f64,
    /// ln of (int_0^{2s} F)^{p/(2p-q+1)}.
    pub ln_lhs: f64,
    /// ln of (int_0^s sqrt f)^{2p/(2p-q+1)}.
    pub ln_rhs: f64,
    pub holds: bool,
}

/// Agreement report between the F-form and sqrt(f)-form conditions.
#[derive(Debug, Clone, Serialize)]
pub struct SqrtfEquivalence {
    pub f_form: ConvergenceVerdict,
    pub sqrt_form: ConvergenceVerdict,
    pub verdicts_agree: bool,
    pub inequality: Vec<InequalityPoint>,
}

/// Compares the plain F-form verdict against the sqrt(f)-form
/// (int_0^s sqrt f)^{2p/(2p-q+1)} verdict, and checks the one-sided domination
/// (int_0^{2s} F)^{p/(2p-q+1)} >= (int_0^s sqrt f)^{2p/(2p-q+1)} on a grid.
pub fn sqrtf_equivalence(f: &Nonlinearity, p: f64, q: f64) -> Result<SqrtfEquivalence> {
    let guard = 2.0 * p - q + 1.0;
    if guard <= 0.0 {
        return Err(Error::GuardViolation { value: guard });
    }
    let verdicts = ko_verdicts(f, p, q)?;
    let cutoff = verdicts.cutoff;

    // sqrt-form integrand on the same grid.
    let e2 = 2.0 * p / guard;
    let grid = ko_grid(cutoff);
    let sqrt_eval = |t: f64| f.eval(t).sqrt();
    let mut s_cum = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &t in &grid {
        acc += adaptive_simpson(&sqrt_eval, prev, t, QUAD_TOL, 0.0);
        s_cum.push(acc);
        prev = t;
    }
    let ln_sqrt_integrand: Vec<f64> = s_cum.iter().map(|v| -e2 * v.ln()).collect();
    let (slope, band) = tail_slope(&grid, &ln_sqrt_integrand, cutoff);
    let sqrt_form = verdict_from_slope(slope, band);

    let agree = match (verdicts.plain.verdict, sqrt_form.verdict) {
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => true,
        (a, b) => a == b,
    };

    // Domination inequality at decade points.
    let e1 = p / guard;
    let mut inequality = Vec::new();
    for k in 0..=6 {
        let s = 10f64.powi(k);
        let small = [s, 2.0 * s];
        let (_, g2) = cumulative(f, &small)?;
        let idx = grid.partition_point(|&x| x <= s).saturating_sub(1);
        let s_at = s_cum[idx]
            + adaptive_simpson(&sqrt_eval, grid[idx], s, QUAD_TOL, 0.0);
        let ln_lhs = e1 * g2[1].ln();
        let ln_rhs = e2 * s_at.ln();
        inequality.push(InequalityPoint {
            s,
            ln_lhs,
            ln_rhs,
            holds: ln_lhs >= ln_rhs - 1e-9 * ln_rhs.abs().max(1.0),
        });
    }

    Ok(SqrtfEquivalence {
        f_form: verdicts.plain,
        sqrt_form,
        verdicts_agree: agree,
        inequality,
    })
}

/// Tail function Gamma(t) = int_t^inf ds / G(s)^{p/(2p-q+1)}.
///
/// Quadrature to the cutoff using exact integrals of the log-log linear
/// interpolant, plus a power-slope tail correction. Requires the plain
/// integral to converge.
pub fn gamma_tail(f: &Nonlinearity, p: f64, q: f64, t: f64) -> Result<f64> {
    let guard = 2.0 * p - q + 1.0;
    if guard <= 0.0 {
        return Err(Error::GuardViolation { value: guard });
    }
    let cutoff = DEFAULT_CUTOFF;
    let e = p / guard;
    let grid = ko_grid(cutoff);
    if !t.is_finite() || t < grid[0] || t >= cutoff {
        return Err(Error::InvalidInput(format!(
            "gamma tail supported for t in [{}, {cutoff})",
            grid[0]
        )));
    }
    let (_, g) = cumulative(f, &grid)?;
    let ln_i: Vec<f64> = g.iter().map(|gi| -e * gi.ln()).collect();
    let (slope, _) = tail_slope(&grid, &ln_i, cutoff);
    if slope >= -1.0 - SLOPE_MARGIN {
        return Err(Error::DivergentTail);
    }

    // Exact integral of I_j (s/s_j)^m across one segment.
    let segment = |s0: f64, s1: f64, ln_i0: f64, ln_i1: f64| -> f64 {
        let m = (ln_i1 - ln_i0) / (s1.ln() - s0.ln());
        if (m + 1.0).abs() < 1e-9 {
            ln_i0.exp() * s0 * (s1 / s0).ln()
        } else {
            ln_i0.exp() * s0 * ((s1 / s0).powf(m + 1.0) - 1.0) / (m + 1.0)
        }
    };

    let mut total = 0.0;
    let start = grid.partition_point(|&x| x <= t);
    // Partial piece from t to the next grid node.
    if start > 0 && start < grid.len() {
        let (s0, s1) = (grid[start - 1], grid[start]);
        let m = (ln_i[start] - ln_i[start - 1]) / (s1.ln() - s0.ln());
        let ln_it = ln_i[start - 1] + m * (t.ln() - s0.ln());
        total += segment(t, s1, ln_it, ln_i[start]);
    }
    for j in start..grid.len() - 1 {
        total += segment(grid[j], grid[j + 1], ln_i[j], ln_i[j + 1]);
    }
    // Tail beyond the cutoff: integral of I(cutoff) (s/cutoff)^slope.
    let tail = ln_i.last().unwrap().exp() * cutoff / (-1.0 - slope);
    Ok(total + tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form tail slope for f = t^sigma:
    /// plain = -(sigma+2) p/(2p-q+1), weighted = plain + 1.
    fn closed_form_slope(sigma: f64, p: f64, q: f64, weighted: bool) -> f64 {
        let base = -(sigma + 2.0) * p / (2.0 * p - q + 1.0);
        if weighted {
            base + 1.0
        } else {
            base
        }
    }

    #[test]
    fn cumulative_power_law_closed_forms() {
        for sigma in [1.0, 2.0, 3.5] {
            let f = Nonlinearity::power(sigma).unwrap();
            let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(-2.0 + i as f64 * 0.2)).collect();
            let (fs, gs) = cumulative(&f, &grid).unwrap();
            for (i, &t) in grid.iter().enumerate() {
                let f_exact = t.powf(sigma + 1.0) / (sigma + 1.0);
                let g_exact = t.powf(sigma + 2.0) / ((sigma + 1.0) * (sigma + 2.0));
                assert!(
                    ((fs[i] - f_exact) / f_exact).abs() < 1e-8,
                    "F mismatch at t={t}, sigma={sigma}"
                );
                assert!(
                    ((gs[i] - g_exact) / g_exact).abs() < 1e-8,
                    "G mismatch at t={t}, sigma={sigma}"
                );
            }
        }
    }

    #[test]
    fn cumulative_constant_tabulated() {
        // f == 3: F(t) = 3t, G(s) = 3 s^2 / 2.
        let ts: Vec<f64> = (0..=20).map(|i| 10f64.powf(-2.0 + i as f64 * 0.3)).collect();
        let fs = vec![3.0; ts.len()];
        let f = Nonlinearity::tabulated(&ts, &fs).unwrap();
        let grid = [0.5, 1.0, 2.0, 5.0];
        let (fc, gc) = cumulative(&f, &grid).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            assert!((fc[i] - 3.0 * t).abs() < 1e-7 * (3.0 * t));
            assert!((gc[i] - 1.5 * t * t).abs() < 1e-7 * (1.5 * t * t));
        }
    }

    #[test]
    fn cumulative_linear_at_two() {
        // f = t: F(2) = 2, G(2) = 4/3.
        let f = Nonlinearity::power(1.0).unwrap();
        let (fc, gc) = cumulative(&f, &[2.0]).unwrap();
        assert!((fc[0] - 2.0).abs() < 1e-9);
        assert!((gc[0] - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn verdict_examples() {
        // f = t, p = 0.5, q = 0.2: plain slope -5/6 -> divergent (bounded).
        let f = Nonlinearity::power(1.0).unwrap();
        let v = ko_verdicts(&f, 0.5, 0.2).unwrap();
        assert_eq!(v.plain.verdict, Verdict::Divergent);
        assert!((v.plain.tail_exponent_estimate - closed_form_slope(1.0, 0.5, 0.2, false)).abs() < 1e-3);

        // f = t^5, p = q = 1: weighted slope -2.5 -> convergent (case ii).
        let f = Nonlinearity::power(5.0).unwrap();
        let v = ko_verdicts(&f, 1.0, 1.0).unwrap();
        assert_eq!(v.weighted.verdict, Verdict::Convergent);
        assert!((v.weighted.tail_exponent_estimate - (-2.5)).abs() < 1e-3);

        // f = t^2, p = q = 1: plain -2 convergent, weighted -1 inconclusive
        // (exact boundary).
        let f = Nonlinearity::power(2.0).unwrap();
        let v = ko_verdicts(&f, 1.0, 1.0).unwrap();
        assert_eq!(v.plain.verdict, Verdict::Convergent);
        assert_eq!(v.weighted.verdict, Verdict::Inconclusive);
        assert!((v.weighted.tail_exponent_estimate + 1.0).abs() < 1e-3);
    }

    #[test]
    fn classify_examples() {
        let f = Nonlinearity::power(1.0).unwrap();
        assert_eq!(
            integral_classify(&f, 0.5, 0.2).unwrap(),
            BallClassification::AllBounded
        );
        let f = Nonlinearity::power(5.0).unwrap();
        assert_eq!(
            integral_classify(&f, 1.0, 1.0).unwrap(),
            BallClassification::UBoundedVBlowsUp
        );
        // f = t, p = 2, q = 0.5: plain -4/3 convergent, weighted -1/3
        // divergent -> both blow up.
        let f = Nonlinearity::power(1.0).unwrap();
        assert_eq!(
            integral_classify(&f, 2.0, 0.5).unwrap(),
            BallClassification::BothBlowUp
        );
    }

    #[test]
    fn guard_is_enforced() {
        let f = Nonlinearity::power(1.0).unwrap();
        assert!(matches!(
            ko_verdicts(&f, 0.1, 2.5),
            Err(Error::GuardViolation { .. })
        ));
    }

    #[test]
    fn verdicts_stable_under_cutoff_doubling() {
        let cases = [(1.0, 0.5, 0.2), (5.0, 1.0, 1.0), (1.0, 2.0, 0.5), (3.0, 0.3, 0.5)];
        for (sigma, p, q) in cases {
            let f = Nonlinearity::power(sigma).unwrap();
            let v1 = ko_verdicts_with_cutoff(&f, p, q, 1e12).unwrap();
            let v2 = ko_verdicts_with_cutoff(&f, p, q, 1e24).unwrap();
            for (a, b) in [(v1.plain, v2.plain), (v1.weighted, v2.weighted)] {
                let flipped = matches!(
                    (a.verdict, b.verdict),
                    (Verdict::Convergent, Verdict::Divergent) | (Verdict::Divergent, Verdict::Convergent)
                );
                assert!(!flipped, "verdict flipped for sigma={sigma}, p={p}, q={q}");
            }
        }
    }

    #[test]
    fn sqrtf_forms_agree_for_powers() {
        for (sigma, p, q) in [(1.0, 0.5, 0.2), (2.0, 1.0, 0.5), (5.0, 1.0, 1.0)] {
            let f = Nonlinearity::power(sigma).unwrap();
            let rep = sqrtf_equivalence(&f, p, q).unwrap();
            assert!(rep.verdicts_agree, "sigma={sigma}, p={p}, q={q}");
            assert!(
                (rep.f_form.tail_exponent_estimate - rep.sqrt_form.tail_exponent_estimate).abs() < 2e-3
            );
            assert!(rep.inequality.iter().all(|pt| pt.holds));
        }
    }

    #[test]
    fn sqrtf_constant_same_exponent() {
        let ts: Vec<f64> = (0..=30).map(|i| 10f64.powf(-3.0 + i as f64 * 0.3)).collect();
        let fs = vec![2.0; ts.len()];
        let f = Nonlinearity::tabulated(&ts, &fs).unwrap();
        let rep = sqrtf_equivalence(&f, 1.0, 0.5).unwrap();
        // Both integrands decay like s^{-2p/(2p-q+1)}.
        let expect = -2.0 * 1.0 / (2.0 - 0.5 + 1.0);
        assert!((rep.f_form.tail_exponent_estimate - expect).abs() < 5e-3);
        assert!((rep.sqrt_form.tail_exponent_estimate - expect).abs() < 5e-3);
        assert!(rep.verdicts_agree);
    }

    #[test]
    fn gamma_tail_closed_form() {
        // f = t^2, p = q = 1: G = s^4/12, e = 1/2, integrand = sqrt(12)/s^2,
        // Gamma(t) = sqrt(12)/t.
        let f = Nonlinearity::power(2.0).unwrap();
        for t in [1.0, 3.0, 10.0, 100.0] {
            let g = gamma_tail(&f, 1.0, 1.0, t).unwrap();
            let exact = 12f64.sqrt() / t;
            assert!((g / exact - 1.0).abs() < 1e-5, "t = {t}: {g} vs {exact}");
        }
    }

    #[test]
    fn gamma_tail_monotone_and_vanishing() {
        let f = Nonlinearity::power(2.0).unwrap();
        let mut prev = f64::INFINITY;
        for t in [1.0, 2.0, 5.0, 20.0, 200.0, 2000.0] {
            let g = gamma_tail(&f, 1.0, 1.0, t).unwrap();
            assert!(g > 0.0 && g < prev);
            prev = g;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn gamma_tail_rejects_divergent() {
        // f = t, p = 0.5, q = 0.2 is the bounded case: plain diverges.
        let f = Nonlinearity::power(1.0).unwrap();
        assert!(matches!(
            gamma_tail(&f, 0.5, 0.2, 1.0),
            Err(Error::DivergentTail)
        ));
    }

    #[test]
    fn tabulated_validation() {
        assert!(Nonlinearity::tabulated(&[1.0, 2.0], &[1.0]).is_err());
        assert!(Nonlinearity::tabulated(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(Nonlinearity::tabulated(&[1.0, 2.0], &[2.0, 1.0]).is_err());
        assert!(Nonlinearity::tabulated(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        // Leading zero knot is tolerated.
        assert!(Nonlinearity::tabulated(&[0.0, 1.0, 2.0], &[0.5, 1.0, 2.0]).is_ok());
    }

    #[test]
    fn callable_spot_check() {
        assert!(Nonlinearity::callable(|t: f64| t * t + 1.0).is_ok());
        assert!(Nonlinearity::callable(|t: f64| 1.0 / (t + 1.0)).is_err());
        assert!(Nonlinearity::callable(|t: f64| t - 0.5).is_err());
    }

    #[test]
    fn power_grid_cross_validation() {
        // integral_classify vs the closed-form classifier over the standard
        // grid; disagreements only as Inconclusive at threshold cells.
        use crate::model::{classify_ball, BallClassification as BC};
        use crate::params::SystemParams;

        let mut cells = 0usize;
        let mut identical = 0usize;
        let mut compatible_inconclusive = 0usize;
        for &s in &[1.0, 1.5, 2.0, 3.0, 5.0] {
            for &p in &[0.3, 0.5, 1.0, 2.0] {
                for &q in &[0.1, 0.5, 1.0, 1.5] {
                    let sp = SystemParams::new(3, 0.0, 0.0, p, q, s).unwrap();
                    let f = Nonlinearity::power(s).unwrap();
                    let closed = classify_ball(&sp);
                    let numeric = integral_classify(&f, p, q).unwrap();
                    cells += 1;
                    if numeric == closed {
                        identical += 1;
                    } else {
                        // Never an opposite verdict: the numeric route may
                        // only abstain, and only within margin of a
                        // threshold.
                        assert!(
                            matches!(numeric, BC::OutOfTheory(OutOfTheoryReason::KoInconclusive)),
                            "opposite verdicts at s={s}, p={p}, q={q}: {closed:?} vs {numeric:?}"
                        );
                        let v = ko_verdicts(&f, p, q).unwrap();
                        let near = |cv: ConvergenceVerdict| {
                            (cv.tail_exponent_estimate + 1.0).abs() <= SLOPE_MARGIN + 1e-9
                        };
                        assert!(
                            near(v.plain) || near(v.weighted),
                            "inconclusive far from threshold at s={s}, p={p}, q={q}"
                        );
                        compatible_inconclusive += 1;
                    }
                }
            }
        }
        assert_eq!(cells, 80);
        assert_eq!(identical + compatible_inconclusive, cells);
        // Exactly the 12 threshold cells of this grid abstain; every cell
        // at least 0.1 from a threshold classifies decisively.
        assert_eq!(identical, 68);
        assert_eq!(compatible_inconclusive, 12);
    }
}
