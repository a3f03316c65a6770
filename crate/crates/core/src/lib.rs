//! Standing periodic waves of the NLS equation with intensity-dependent
//! dispersion iu_t + (1-|u|^2) u_xx + |u|^2 u = 0.
//!
//! The crate computes, for both wave families at fixed spatial period L:
//! the period function T(E, omega) and its monotonicity certificate, the
//! energy levels E_L(omega), wave profiles, mass curves Q(omega), discrete
//! Morse/nullity indices of the Hessian operators L+/-, the theta parameter,
//! and the sharp energetic-stability verdict dQ/domega > 0. A
//! finite-difference Newton solver for bright solitons on a truncated line
//! reproduces the mass-curve discretization artefact.

pub mod error;
pub mod family;
pub mod fdsoliton;
pub mod model;
pub mod numerics;
pub mod observables;
pub mod period;
pub mod profile;
pub mod spectrum;

pub use error::{Error, Result};
