//! Exactly soluble model of a tunneling two-level system coupled to a
//! continuum: Fano spectral solution, reduced-density dynamics, rate
//! decomposition, master-equation comparison and a discretized oracle.

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod lindblad;
pub mod model;
pub mod ode;
pub mod oracle;
mod par;
pub mod quad;
pub mod rates;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{
    BlochVector, CouplingFn, DensityRate, ModelParams, ReducedDensity, TimeGrid, Topology,
    ValidationReport,
};
