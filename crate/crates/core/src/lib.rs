//! Simulation of recurrence purification protocols for π-phase locally
//! maximally entangleable (LME) states.
//!
//! The crate is organised around a target [`LmesSpec`] (a hypergraph of π-phase
//! gates plus a coloring). Noisy states are expressed as [`LmeCoeffMatrix`]
//! coefficients in the LME basis, purified color by color with
//! [`purify::purify_color`], and checked against a brute-force circuit
//! simulation in [`oracle`].

pub mod depolarization;
pub mod error;
pub mod linalg;
pub mod lme;
pub mod noise;
pub mod oracle;
pub mod purify;
pub mod random;
pub mod scenarios;
pub mod strategy;
mod wires;

pub use error::{Error, Result};
pub use lme::{
    build_state, fidelity, DensityMatrix, LmeCoeffMatrix, LmesSpec, MultiIndex, StateVector,
};
