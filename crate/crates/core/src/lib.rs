//! Induced representations of the polarised Heisenberg group on sampled
//! function spaces, the covariant and contravariant transforms between
//! them, and numerical checks of the identities they satisfy.

pub mod config;
pub mod diff;
pub mod error;
pub mod grids;
pub mod io;
pub mod ladders;
pub mod group;
pub mod phase;
pub mod representations;
pub mod special;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
