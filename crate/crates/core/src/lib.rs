//! Reliability block diagrams with exponential failure laws.
//!
//! A [`SystemModel`] is a set of components, each with a constant failure
//! rate λ (per hour), arranged in a tree of series and parallel blocks. The
//! crate evaluates such models in closed form ([`analytic`]), checks them by
//! lifetime simulation ([`montecarlo`]), ranks weak points and tries out
//! redundancy ([`analysis`]), and reads/writes a small text format ([`dsl`]).
//!
//! ```
//! use rbdkit::{analytic, dsl, MissionTime};
//!
//! let model = dsl::parse(rbdkit::fixtures::BIOFUEL_PLANT).unwrap();
//! let r = analytic::evaluate(&model, MissionTime::hours(1000.0).unwrap()).unwrap();
//! assert!((r - 0.882).abs() < 5e-4);
//! ```

pub mod analysis;
pub mod analytic;
pub mod dsl;
pub mod fixtures;
pub mod model;
pub mod montecarlo;

use thiserror::Error;

pub use analytic::{MissionTime, Mttf};
pub use model::{validate_model, BlockExpr, Component, InstanceId, ModelError, SystemModel, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
