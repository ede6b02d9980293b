//! Vortex-blob simulation of regularized vortex sheets in the plane, and
//! tools that measure vorticity concentration in the results.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod concentration;
pub mod config;
pub mod error;
pub mod evolve;
pub mod fixtures;
pub mod io;
pub mod kernel;
pub mod quadrature;
pub mod sheet;
pub mod structure;
pub mod vec2;
pub mod verify;

pub use config::SimulationConfig;
pub use error::{Error, Result};
pub use sheet::{InitialDataKind, VortexSheet};
pub use vec2::Vec2;
