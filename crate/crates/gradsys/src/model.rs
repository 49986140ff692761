//! Closed-form analysis of the radial system: boundary-behavior
//! classification, global existence, asymptotic exponents and amplitudes,
//! equilibria of the associated dynamical system, and linear stability data.
//!
//! Everything here is computable without integrating anything. Amplitudes are
//! kept in log space (they underflow f64 for many parameter sets). The
//! u-growth data carries two variants side by side, an alternative reported
//! form and the equilibrium-consistent one; the derived variant is what all
//! internal consistency checks use, with the numerical integrator as arbiter.

use crate::cubic;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Why a parameter set falls outside the classification theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutOfTheoryReason {
    /// The guard 2p - q + 1 <= 0 (classification integrals undefined).
    GuardViolation,
    /// No classification clause applies (non-finite thresholds).
    NoClauseApplies,
    /// A numerical convergence verdict sat within margin of a threshold.
    KoInconclusive,
    /// Competing boundedness fits disagreed near the blow-up radius.
    FitsDisagree,
    /// The trajectory ended in an aborted state; nothing to classify.
    TrajectoryAborted,
}

/// Three-way boundary behavior of positive radial solutions in a ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallClassification {
    /// Every positive radial solution is bounded.
    AllBounded,
    /// Solutions exist with u bounded while v blows up at the boundary.
    UBoundedVBlowsUp,
    /// Solutions exist with both u and v blowing up at the boundary.
    BothBlowUp,
    /// Outside the theory (or numerically undecidable); carries the reason.
    OutOfTheory(OutOfTheoryReason),
}

impl BallClassification {
    /// True for the three decisive variants.
    pub fn is_decisive(&self) -> bool {
        !matches!(self, BallClassification::OutOfTheory(_))
    }
}

/// Classifies boundary behavior in a ball from the power-law thresholds.
///
/// The three clauses, tested in order: all solutions bounded iff
/// ps + q - 1 <= 0; u bounded with v blowing up iff s > 2(1 + (1-q)/p);
/// both blowing up iff (1-q)/p < s <= 2(1 + (1-q)/p).
pub fn classify_ball(params: &SystemParams) -> BallClassification {
    let (p, q, s) = (params.p, params.q, params.s);
    if params.ps_q() - 1.0 <= 0.0 {
        return BallClassification::AllBounded;
    }
    let lower = (1.0 - q) / p;
    let upper = 2.0 * (1.0 + lower);
    if !lower.is_finite() || !upper.is_finite() {
        return BallClassification::OutOfTheory(OutOfTheoryReason::NoClauseApplies);
    }
    if s > upper {
        BallClassification::UBoundedVBlowsUp
    } else if s > lower {
        BallClassification::BothBlowUp
    } else {
        // Unreachable for validated params: ps + q > 1 forces s > (1-q)/p.
        BallClassification::OutOfTheory(OutOfTheoryReason::NoClauseApplies)
    }
}

/// Whether the system has positive radial solutions on the whole space:
/// true iff ps + q - 1 <= 0.
pub fn global_existence(params: &SystemParams) -> bool {
    params.ps_q() - 1.0 <= 0.0
}

/// Asymptotic growth exponents and amplitudes at infinity.
///
/// `A`, `B`, `K`, `D` are the limits of the phase coordinates Y, Z, W, X.
/// Amplitudes are stored as natural logs; `rho_u_reported` and `ln_c_u_reported`
/// reproduce the alternative reported formulas for comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticProfile {
    pub a_lim: f64,
    pub b_lim: f64,
    pub k_lim: f64,
    pub d_lim: f64,
    /// v-growth exponent (equals `a_lim`).
    pub rho_v: f64,
    /// Equilibrium-consistent u-growth exponent (equals `d_lim`).
    pub rho_u_derived: f64,
    /// u-growth exponent of the alternative reported numerator.
    pub rho_u_reported: f64,
    /// ln of the universal v amplitude (A B^s K)^{1/(ps+q-1)}.
    pub ln_c_v: f64,
    /// ln of the u amplitude c_v^p / (D B) (equilibrium-consistent).
    pub ln_c_u_derived: f64,
    /// ln of the alternative reported u amplitude c_v^p / (D K).
    pub ln_c_u_reported: f64,
}

impl AsymptoticProfile {
    pub fn c_v(&self) -> f64 {
        self.ln_c_v.exp()
    }
    pub fn c_u_derived(&self) -> f64 {
        self.ln_c_u_derived.exp()
    }
    pub fn c_u_reported(&self) -> f64 {
        self.ln_c_u_reported.exp()
    }
}

/// Computes the asymptotic profile. Requires p < 1 and ps + q < 1.
pub fn asymptotic_profile(params: &SystemParams) -> Result<AsymptoticProfile> {
    params.require_rate_hypotheses()?;
    let SystemParams { a, b, p, q, s, .. } = *params;
    let nf = params.nf();
    let denom = 1.0 - params.ps_q();

    let a_lim = ((a + 1.0) * s + b + 2.0) / denom;
    let b_lim = nf + a + p * a_lim;
    let k_lim = a_lim + nf - 2.0;
    let d_lim = a + 2.0 + p * a_lim;
    let rho_u_reported = ((a + 2.0) * denom + p * s * (a + 1.0) + b * p + 2.0 * q) / denom;

    // c_v = (A B^s K)^{1/(ps+q-1)}, assembled in log space.
    let ln_abk = a_lim.ln() + s * b_lim.ln() + k_lim.ln();
    let ln_c_v = -ln_abk / denom;
    let ln_c_u_derived = p * ln_c_v - (d_lim * b_lim).ln();
    let ln_c_u_reported = p * ln_c_v - (d_lim * k_lim).ln();

    Ok(AsymptoticProfile {
        a_lim,
        b_lim,
        k_lim,
        d_lim,
        rho_v: a_lim,
        rho_u_derived: d_lim,
        rho_u_reported,
        ln_c_v,
        ln_c_u_derived,
        ln_c_u_reported,
    })
}

/// The unique positive pure-power pair u = c_u r^rho_u, v = c_v r^rho_v
/// solving the radial system exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSolution {
    pub ln_c_u: f64,
    pub rho_u: f64,
    pub ln_c_v: f64,
    pub rho_v: f64,
}

impl PowerSolution {
    pub fn u(&self, r: f64) -> f64 {
        (self.ln_c_u + self.rho_u * r.ln()).exp()
    }
    pub fn v(&self, r: f64) -> f64 {
        (self.ln_c_v + self.rho_v * r.ln()).exp()
    }
    pub fn du(&self, r: f64) -> f64 {
        self.rho_u * (self.ln_c_u + (self.rho_u - 1.0) * r.ln()).exp()
    }
    pub fn dv(&self, r: f64) -> f64 {
        self.rho_v * (self.ln_c_v + (self.rho_v - 1.0) * r.ln()).exp()
    }
    pub fn c_u(&self) -> f64 {
        self.ln_c_u.exp()
    }
    pub fn c_v(&self) -> f64 {
        self.ln_c_v.exp()
    }
}

/// Builds the exact power solution: rho_u = D, rho_v = A,
/// c_v = (A B^s K)^{1/(ps+q-1)}, c_u = c_v^p / (D B).
pub fn exact_power_solution(params: &SystemParams) -> Result<PowerSolution> {
    let profile = asymptotic_profile(params)?;
    Ok(PowerSolution {
        ln_c_u: profile.ln_c_u_derived,
        rho_u: profile.d_lim,
        ln_c_v: profile.ln_c_v,
        rho_v: profile.a_lim,
    })
}

/// Relative residuals of the two radial equations for a pure-power pair at
/// radius r, evaluated in log-safe form. For the exact power solution both
/// residuals vanish up to rounding.
pub fn power_solution_residual(params: &SystemParams, sol: &PowerSolution, r: f64) -> (f64, f64) {
    let SystemParams { a, b, p, q, s, .. } = *params;
    let nf = params.nf();
    let lr = r.ln();

    // Delta(c r^m) = m (m + N - 2) c r^{m-2}.
    let lap_u = sol.rho_u * (sol.rho_u + nf - 2.0) * (sol.ln_c_u + (sol.rho_u - 2.0) * lr).exp();
    let rhs_u = (a * lr + p * (sol.ln_c_v + sol.rho_v * lr)).exp();
    let res_u = (lap_u - rhs_u).abs() / lap_u.abs().max(rhs_u.abs());

    let lap_v = sol.rho_v * (sol.rho_v + nf - 2.0) * (sol.ln_c_v + (sol.rho_v - 2.0) * lr).exp();
    let ln_du = sol.rho_u.ln() + sol.ln_c_u + (sol.rho_u - 1.0) * lr;
    let rhs_v = (b * lr + q * (sol.ln_c_v + sol.rho_v * lr) + s * ln_du).exp();
    let res_v = (lap_v - rhs_v).abs() / lap_v.abs().max(rhs_v.abs());

    (res_u, res_v)
}

/// A fixed point of the reduced (Y, Z, W) dynamical system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl Equilibrium {
    pub fn as_array(&self) -> [f64; 3] {
        [self.y, self.z, self.w]
    }
}

/// The two equilibria with Z >= N+a and W >= N+b:
/// xi1 = (0, N+a, N+s(a+1)+b) and xi2 = (A, B, K).
pub fn equilibria(params: &SystemParams) -> (Equilibrium, Option<Equilibrium>) {
    let xi1 = Equilibrium {
        y: 0.0,
        z: params.nf() + params.a,
        w: params.ell(),
    };
    let xi2 = asymptotic_profile(params).ok().map(|pr| Equilibrium {
        y: pr.a_lim,
        z: pr.b_lim,
        w: pr.k_lim,
    });
    (xi1, xi2)
}

/// Linearization data at the attracting equilibrium xi2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Jacobian M of the reduced field at xi2 (rows: Y, Z, W equations).
    pub jacobian: [[f64; 3]; 3],
    /// Characteristic polynomial lambda^3 + alpha lambda^2 + beta lambda
    /// + (1 - ps - q) gamma.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eigenvalues: [Complex64; 3],
    pub asymptotically_stable: bool,
    /// alpha*beta - (1-ps-q)*gamma, the positivity certificate for the
    /// complex-pair case (positive for all admissible parameters).
    pub hurwitz_margin: f64,
}

/// Builds the linearization at xi2 and solves its characteristic cubic.
pub fn stability_report(params: &SystemParams) -> Result<StabilityReport> {
    let profile = asymptotic_profile(params)?;
    let (y2, z2, w2) = (profile.a_lim, profile.b_lim, profile.k_lim);
    let (p, q, s) = (params.p, params.q, params.s);

    let jacobian = [
        [-y2, 0.0, y2],
        [p * z2, -z2, 0.0],
        [q * w2, s * w2, -w2],
    ];
    let alpha = y2 + z2 + w2;
    let beta = y2 * z2 + z2 * w2 + (1.0 - q) * y2 * w2;
    let gamma = y2 * z2 * w2;
    let coeff0 = (1.0 - params.ps_q()) * gamma;

    let eigenvalues = cubic::roots(alpha, beta, coeff0);
    let asymptotically_stable = eigenvalues.iter().all(|l| l.re < 0.0);

    Ok(StabilityReport {
        jacobian,
        alpha,
        beta,
        gamma,
        eigenvalues,
        asymptotically_stable,
        hurwitz_margin: alpha * beta - coeff0,
    })
}

/// Divergence of the reduced vector field at a point (Y, Z, W):
/// -W + (s-2)Z + (p+q-2)Y + 2 + a + N(1-s) + s + b.
pub fn div_h(params: &SystemParams, point: [f64; 3]) -> f64 {
    let [y, z, w] = point;
    let SystemParams { a, b, p, q, s, .. } = *params;
    -w + (s - 2.0) * z + (p + q - 2.0) * y + 2.0 + a + params.nf() * (1.0 - s) + s + b
}

/// Whether the divergence condition
/// p(s-2)(s + as + b + 2)/(1 - ps - q) <= 2(N + a - 1) holds.
pub fn divergence_condition(params: &SystemParams) -> Result<bool> {
    let denom = 1.0 - params.ps_q();
    if denom <= 0.0 {
        return Err(Error::HypothesisViolated {
            what: format!("divergence condition needs ps + q < 1, got {}", params.ps_q()),
        });
    }
    let SystemParams { a, b, p, s, .. } = *params;
    let lhs = p * (s - 2.0) * (s + a * s + b + 2.0) / denom;
    Ok(lhs <= 2.0 * (params.nf() + a - 1.0))
}
