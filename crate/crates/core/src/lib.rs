//! Bessel (normalized inverse-Gaussian) regression for continuous responses
//! in the open unit interval.
//!
//! The bessel regression is fitted by EM with Louis standard errors and the
//! mean-precision beta regression by direct maximum likelihood. Around them
//! sit the DBB discrimination test, residual diagnostics with simulated
//! envelopes, cross-validation, VIF screening and a Monte Carlo harness.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod specfun;
pub mod quadrature;
pub mod distributions;
pub mod linalg;
pub mod optim;
pub mod rng;
pub mod regression;
pub mod dbb;
pub mod diagnostics;
pub mod simstudy;
pub mod cli;

pub use distributions::{BesselParams, BetaParams, Family};
pub use error::{Error, Result};
pub use regression::{Dataset, FitResult, Theta};
