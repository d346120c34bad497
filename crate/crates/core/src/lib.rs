//! A numerical laboratory around one fact: the viscous Burgers flow on (0, 1)
//! driven by a control that depends on time only cannot be steered to zero.
//!
//! The crate builds every computable object in that story and cross-checks
//! each one against an independent route:
//!
//! - [`spectral`]: sine-basis fields, grids, norms, heat-caloric weights.
//! - [`multiplier`]: the complex multiplier Omega_k, its algebraic
//!   decomposition, sign portrait and asymptotics.
//! - [`heat`]: exact-in-space modal solvers for the linearized flow, the
//!   spectral kernel inequality, and estimate audits.
//! - [`burgers`]: the nonlinear solver (integrating-factor IMEX) with weak
//!   and energy residual audits.
//! - [`dual_norms`]: computable negative-order Sobolev surrogates via
//!   zero-extension and Fourier transform, plus modulated transforms.
//! - [`control`]: parity projections and truncated moment-method null
//!   controls, including the return-to-zero extension.
//! - [`obstruction`]: the end-to-end experiments — Parseval identity,
//!   quadratic obstruction, second-order target, power-series audit, and the
//!   no-null-control experiment.
//! - [`report`] / [`suite`]: deterministic experiment reports and the
//!   acceptance battery.

pub mod burgers;
pub mod control;
pub mod dual_norms;
pub mod error;
pub mod heat;
pub mod multiplier;
pub mod obstruction;
pub mod quadrature;
pub mod report;
pub mod signal;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
