//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by validation, integration, and analysis routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("exponent {name} must be positive, got {value}")]
    NonPositiveExponent { name: &'static str, value: f64 },

    #[error("weight {name} must be nonnegative, got {value}")]
    NegativeWeight { name: &'static str, value: f64 },

    #[error("gradient exponent s must be >= 1, got {value}")]
    GradientExponentTooSmall { value: f64 },

    #[error("dimension N must be >= 2, got {n}")]
    DimensionTooSmall { n: u32 },

    #[error("parameter {name} must be finite, got {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },

    #[error("guard violation: 2p - q + 1 = {value} <= 0")]
    GuardViolation { value: f64 },

    #[error("hypothesis violated: {what}")]
    HypothesisViolated { what: String },

    #[error("initial data must be positive: u0 = {u0}, v0 = {v0}, r0 = {r0}")]
    NonPositiveInitialData { u0: f64, v0: f64, r0: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("monotonicity violation of {component} at r = {r} (drop = {drop})")]
    MonotonicityViolation {
        component: &'static str,
        r: f64,
        drop: f64,
    },

    #[error("degenerate scaling: sp + q - 1 = 0")]
    DegenerateScaling,

    #[error("degenerate state: u' or v' vanishes (only possible at r = 0)")]
    DegenerateState,

    #[error("no blow-up detected: {why}")]
    NotABlowUp { why: String },

    #[error("fit window too short: {why}")]
    WindowTooShort { why: String },

    #[error("nonlinearity input not strictly monotone: {why}")]
    NonMonotoneInput { why: String },

    #[error("tail integral diverges; gamma tail undefined")]
    DivergentTail,

    #[error("phase trajectory diverged: |xi| exceeded {cap} at t = {t}")]
    PhaseDivergence { cap: f64, t: f64 },

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
