//! Hartmann-Hahn polarization transfer from a driven shallow NV center to a
//! bath of diffusing nuclear spins.
//!
//! The crate has three computational routes to the NV population ⟨n⟩(t):
//!
//! * [`statistics`] estimates σ², τ_c and the memory kernel γ(t) from Brownian
//!   trajectories generated by [`bath`],
//! * [`analytic`] turns those into the incoherent master-equation prediction,
//! * [`gaussian`] propagates the bosonized NV + bath modes directly.

// NaN must fail validation, hence `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod bath;
pub mod config;
pub mod curve;
pub mod dipolar;
pub mod error;
pub mod fit;
pub mod gaussian;
pub mod rng;
pub mod statistics;
pub mod units;

pub use config::{load_config, RawConfig, ScenarioConfig};
pub use curve::{PolarizationCurve, Provenance};
pub use error::{Error, Result};
