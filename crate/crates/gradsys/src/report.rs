//! JSON result envelope emitted by the command-line front end.
//!
//! One envelope per run. Sections are optional and appear only when the
//! subcommand produced them; field order is fixed by declaration order, so a
//! fixed seed and flags give byte-identical output. Numeric fields carry
//! their uncertainty wherever one exists (fit standard errors, blow-up
//! spreads); amplitudes are serialized as natural logs to avoid denormals.

use crate::ko::KoVerdicts;
use crate::model::{AsymptoticProfile, BallClassification};
use crate::params::SystemParams;
use crate::phase::LimitVerdict;
use crate::shooter::{GrowthFit, Outcome};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<SystemParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fits: Option<Vec<FitSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<DiscrepancySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ko: Option<KoSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup: Option<BlowupSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingSection>,
}

impl ResultEnvelope {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            params: None,
            seed: None,
            classification: None,
            profile: None,
            fits: None,
            discrepancy: None,
            phase: None,
            ko: None,
            blowup: None,
            sweep: None,
            timing: None,
        }
    }

    /// Serializes with a trailing newline; deterministic for fixed content.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}

/// How two classification routes relate for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    /// Identical decisive verdicts.
    Identical,
    /// One side abstained (inconclusive at a threshold); no contradiction.
    CompatibleInconclusive,
    /// Contradictory decisive verdicts.
    Opposite,
}

pub fn agreement(closed: BallClassification, numeric: BallClassification) -> Agreement {
    if closed == numeric {
        Agreement::Identical
    } else if !closed.is_decisive() || !numeric.is_decisive() {
        Agreement::CompatibleInconclusive
    } else {
        Agreement::Opposite
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationSection {
    pub closed_form: BallClassification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ko_numeric: Option<BallClassification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<BallClassification>,
    pub global_existence: bool,
    pub agreement: Agreement,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSection {
    #[serde(rename = "A")]
    pub a_lim: f64,
    #[serde(rename = "B")]
    pub b_lim: f64,
    #[serde(rename = "K")]
    pub k_lim: f64,
    #[serde(rename = "D")]
    pub d_lim: f64,
    pub rho_v: f64,
    pub rho_u_derived: f64,
    pub rho_u_reported: f64,
    pub ln_c_v: f64,
    pub ln_c_u_derived: f64,
    pub ln_c_u_reported: f64,
}

impl From<AsymptoticProfile> for ProfileSection {
    fn from(p: AsymptoticProfile) -> Self {
        Self {
            a_lim: p.a_lim,
            b_lim: p.b_lim,
            k_lim: p.k_lim,
            d_lim: p.d_lim,
            rho_v: p.rho_v,
            rho_u_derived: p.rho_u_derived,
            rho_u_reported: p.rho_u_reported,
            ln_c_v: p.ln_c_v,
            ln_c_u_derived: p.ln_c_u_derived,
            ln_c_u_reported: p.ln_c_u_reported,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSection {
    pub u0: f64,
    pub v0: f64,
    pub outcome: Outcome,
    pub slope_u: f64,
    pub slope_v: f64,
    pub slope_stderr_u: f64,
    pub slope_stderr_v: f64,
    pub log_amp_u: f64,
    pub log_amp_v: f64,
    pub rms_residual_u: f64,
    pub rms_residual_v: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub n_samples: usize,
    /// |slope_v - A| / A.
    pub rel_err_slope_v: f64,
    /// |slope_u - D| / D.
    pub rel_err_slope_u: f64,
}

impl FitSection {
    pub fn new(u0: f64, v0: f64, outcome: Outcome, fit: &GrowthFit, profile: &AsymptoticProfile) -> Self {
        Self {
            u0,
            v0,
            outcome,
            slope_u: fit.slope_u,
            slope_v: fit.slope_v,
            slope_stderr_u: fit.slope_stderr_u,
            slope_stderr_v: fit.slope_stderr_v,
            log_amp_u: fit.log_amp_u,
            log_amp_v: fit.log_amp_v,
            rms_residual_u: fit.rms_residual_u,
            rms_residual_v: fit.rms_residual_v,
            window_lo: fit.window.0,
            window_hi: fit.window.1,
            n_samples: fit.n_samples,
            rel_err_slope_v: (fit.slope_v - profile.a_lim).abs() / profile.a_lim,
            rel_err_slope_u: (fit.slope_u - profile.d_lim).abs() / profile.d_lim,
        }
    }
}

/// The adjudication record for the reported-vs-derived u growth data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscrepancySection {
    pub rho_u_reported: f64,
    pub rho_u_derived: f64,
    pub fitted_slope_u: f64,
    /// |fit - rho_u_reported| in units of the fit standard error.
    pub sigma_from_reported: f64,
    /// |fit - rho_u_derived| in units of the fit standard error.
    pub sigma_from_derived: f64,
    pub ln_c_u_reported: f64,
    pub ln_c_u_derived: f64,
    pub fitted_log_amp_u: f64,
    /// The fitted amplitude sits closer to the derived variant.
    pub amplitude_matches_derived: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSection {
    pub limit_verdict: LimitVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi1: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi2: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence_condition: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_violations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_max_excess: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KoSection {
    pub verdicts: KoVerdicts,
    pub classification: BallClassification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sqrtf_agrees: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupSection {
    pub radius: f64,
    pub uncertainty: f64,
    pub per_threshold: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSection {
    pub cells: usize,
    pub succeeded: usize,
    pub identical: usize,
    pub compatible_inconclusive: usize,
    pub opposite: usize,
    /// (identical + compatible_inconclusive) / cells.
    pub agreement_rate: f64,
    pub summary_csv: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingSection {
    pub wall_ms: f64,
}
