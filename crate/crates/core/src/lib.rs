//! Online SGD, SGD with momentum and normalized SGD on high-dimensional
//! estimation problems, together with their low-dimensional scaling limits.
//!
//! The crate is organised around a two-number summary of the iterate: the
//! correlation `m = <x, v>` with the planted direction and the orthogonal
//! mass `r2 = |x|^2 - m^2`.

pub mod error;
pub mod experiment;
pub mod fixed_points;
pub mod gauss;
pub mod lemmas;
pub mod limits;
pub mod models;
pub mod optimizers;
pub mod rng;

pub use error::{Error, Result};
pub use rng::RngStream;
