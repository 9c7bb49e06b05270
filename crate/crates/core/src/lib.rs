//! Laboratory for the fractional parts `frac(xi * x^s_n)`.
//!
//! * [`seqgen`] generates certified orbits and seeded baselines.
//! * [`discrepancy`] computes star, extremal and dyadic-restricted discrepancies.
//! * [`periodic`] models centered indicators and trigonometric polynomials.
//! * [`oscillatory`] integrates `e^{2 pi i psi}` and checks van der Corput type bounds.
//! * [`lilclt`] runs LIL trajectories and CLT samples.
//! * [`cli`] and [`selftest`] drive experiments and the acceptance suite.

pub mod cli;
pub mod discrepancy;
pub mod dyadic;
pub mod error;
pub mod lilclt;
pub mod oscillatory;
pub mod periodic;
pub mod selftest;
pub mod seqgen;

pub use error::{LabError, Result};
