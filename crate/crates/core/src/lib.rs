//! Stationary solutions and stability diagnostics for the one-dimensional
//! barotropic compressible Navier–Stokes system with density-dependent
//! viscosity on a bounded interval.
//!
//! The crate is organised bottom-up:
//!
//! * [`constitutive`]: pressure/viscosity laws and derived scalar functions;
//! * [`hyperbolic`]: jump relations and entropy admissibility of boundary data;
//! * [`steady`]: the stationary connection problem and its length functional;
//! * [`evolve`]: explicit method-of-lines time integration;
//! * [`diagnostics`]: Lyapunov functional, energy identity and norm ledger;
//! * [`config`], [`output`], [`plot`], [`app`]: the command-line front end.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod hyperbolic;
pub mod numerics;
pub mod output;
pub mod plot;
pub mod steady;

pub use constitutive::{Laws, PressureLaw, Tabulated, ViscosityLaw};
pub use error::{Error, Result};
