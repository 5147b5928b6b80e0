//! Simulation and recovery toolkit for radar receivers that sample with
//! one-bit (and few-bit) ADCs against time-varying thresholds.
//!
//! The crate covers the full loop: transmit-sequence and interference
//! modeling ([`model`]), coarse quantization and threshold design
//! ([`sampling`]), the sign-constrained quadratic programs used to recover
//! the unquantized signal ([`qpsolve`]), the parameter estimators built on
//! top of them ([`estimate`]), and a deterministic Monte Carlo campaign
//! engine ([`harness`]) with a CLI front end ([`cli`]).

pub mod cli;
pub mod config;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod model;
pub mod qpsolve;
pub mod sampling;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dynamically sized complex vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

pub use error::{RadarError, Result};
