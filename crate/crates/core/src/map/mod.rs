//! Markov additive processes: model description, matrix exponent, spectral
//! data and exponential tilting.

mod jump;
mod spec;
mod spectral;
mod tilt;

pub use jump::{ExpJump, JumpLaw};
pub use spec::{matrix_exponent, mean_drift, ChainConfig, LevyComponent, MapConfig, MapSpec};
pub use spectral::{
    cramer_bracket, leading_eigen, spectral_data, spectral_data_at, spectral_data_auto, stationary, MatrixExponent,
    SpectralData,
};
pub use tilt::{esscher_spec, wald_weight, TiltData};
