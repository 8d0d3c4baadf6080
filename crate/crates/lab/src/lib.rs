//! Monte-Carlo experiments on the smoothed Yang-Mills field: scaling laws of
//! the lifted noise, consecutive-level convergence, and Wilson-loop laws
//! against a Lie Brownian motion oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod report;
pub mod run;
pub mod seeding;
pub mod stats;

pub use error::{LabError, Result};
