//! Smooth approximations of two-dimensional Yang-Mills holonomies in axial
//! gauge.
//!
//! The pipeline runs from a seeded spectral white noise with values in
//! `su(n)` ([`spectral`]), through the curve transfer operator `E_c`
//! ([`ecal`]), to step-2 rough-path lifts ([`roughpath`]) and `SU(n)`
//! parallel transport ([`transport`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod ecal;
pub mod error;
pub mod liealg;
pub mod roughpath;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
