//! Markov additive processes and the real self-similar Markov processes they
//! generate: spectral computations, exact simulation, stable-process closed
//! forms, renewal estimates and Doob h-transform checks.

pub mod conditioning;
pub mod error;
pub mod map;
pub mod numerics;
pub mod renewal;
pub mod simulate;
pub mod stable;
pub mod stats;

pub use error::{Error, Result};
