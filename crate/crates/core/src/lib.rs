//! Link-level model of 60 GHz directional networks with beam misalignment.
//!
//! The crate covers the antenna pattern and misalignment law, deployment
//! geometry, an analytic engine for SINR distributions and their CDF
//! bounds, a Monte Carlo simulator, and named experiment runs that emit CSV.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod antenna;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod misalignment;
pub mod monte_carlo;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use antenna::BeamParameters;
pub use error::{Error, Result};
pub use misalignment::MisalignmentModel;
