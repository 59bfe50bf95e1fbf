//! Simulation and verification toolkit for one-dimensional conservative
//! interacting particle systems: exclusion processes (symmetric, weakly
//! asymmetric, long jumps, slow bond, reservoirs) and the three-species ABC
//! model.

pub mod analysis;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod fields;
pub mod hydro;
pub mod lattice;
pub mod modes;
pub mod oracle;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
