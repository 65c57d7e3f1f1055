//! Spectral Galerkin solver and regularity certificates for the
//! non-dimensional incompressible Navier-Stokes equations on the periodic
//! torus `[0, 2pi]^3` with unit viscosity.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`] and [`basis`]: divergence-free Fourier fields, the real Stokes
//!   eigenbasis and Galerkin subspaces.
//! * [`nonlinear`]: the advection term `B(u, u)`.
//! * [`solver`]: time integration of the Galerkin system and trajectories.
//! * [`certify`]: the a-posteriori regularity certificate for one initial
//!   condition.
//! * [`covering`] and [`campaign`]: covering lattices of H^2 balls and the
//!   resumable ball-verification campaigns built on them.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod campaign;
pub mod certify;
pub mod constants;
pub mod covering;
pub mod error;
pub mod field;
pub mod nonlinear;
pub mod quadrature;
pub mod sampling;
pub mod scaling;
pub mod solver;

pub use basis::{project_n, BasisFunction, BasisPart, GalerkinSpace, StokesBasisIndex};
pub use campaign::{
    verify_ball_h2, verify_ball_v, BallSpace, BallVerdict, CampaignConfig, CampaignState, PointStatus, RunOptions,
};
pub use certify::{evaluate_certificate, small_data_check, t_star, CertificateReport, Verdict};
pub use constants::ConstantsLedger;
pub use covering::{LatticeSpec, Provenance, UniformBounds};
pub use error::{Error, Result};
pub use field::{leray_project, CVec3, Norms, SpectralField, Wavevector};
pub use nonlinear::{nonlinear_term, NonlinearEvaluator, NonlinearMode};
pub use scaling::Scaling;
pub use solver::{integrate, IntegratorConfig, Scheme, Trajectory};
