//! Numerical laboratory for positive radial solutions of the weighted
//! elliptic system
//!
//! ```text
//!   Delta u = |x|^a v^p,    Delta v = |x|^b v^q f(|grad u|),
//! ```
//!
//! posed in a ball or in the whole space. The crate provides:
//!
//! * [`model`] — closed-form boundary classification, the global-existence
//!   predicate, asymptotic exponents and amplitudes, equilibria, and linear
//!   stability data;
//! * [`shooter`] — adaptive integration of the radial initial-value problem,
//!   blow-up radius localization, empirical classification, growth fits, and
//!   the scaling family;
//! * [`phase`] — the cooperative (Y, Z, W) dynamical system: flows,
//!   comparison principle, box bounds, omega-limit detection, and divergence
//!   bounds over the admissible box;
//! * [`ko`] — Keller-Osserman integral analysis for general nonlinearities;
//! * [`report`] — the JSON result envelope shared with the command-line
//!   front end.

pub mod cubic;
pub mod error;
pub mod fit;
pub mod ko;
pub mod model;
pub mod ode;
pub mod params;
pub mod phase;
pub mod quad;
pub mod report;
pub mod shooter;

pub use error::{Error, Result};
pub use params::SystemParams;
