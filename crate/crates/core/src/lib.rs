//! Scattering resonances of transmission problems with a sign-changing
//! coefficient jump, with emphasis on surface plasmons of negative-index
//! cavities.
//!
//! The exact disk solver lives in [`secular`] and [`rootfind`]; [`dispersion`]
//! and [`collar`] give symbol-level predictions, [`weylcount`] the counting
//! law and [`modes`] the resonant states.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod cli;
pub mod collar;
pub mod dispersion;
pub mod error;
pub mod modes;
pub mod rootfind;
pub mod secular;
pub mod specfun;
pub mod weylcount;

pub use error::{Error, Result};
