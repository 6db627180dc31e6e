//! Strictly stable processes: their Lamperti–Kiu matrix exponent, the
//! h-function, closed-form interval passage probabilities and samplers.

mod model;
mod passage;
mod sample;

pub use model::{
    rbz_f, spectral_residuals, stable_f, stable_h, stable_spectral, stationary_matches, vector_angle, RbzExponent,
    StableParams,
};
pub use passage::{exit_interval_value, hit_interval_value};
pub use sample::{
    exit_direction, hit_probability_mc, interval_race, sample_stable_increment, sample_unit_stable,
    simulate_stable_path, CmsSource, Direction, DirectionReport, HitEstimate, IncrementSource, RaceConfig,
    RaceOutcome, RaceRecord, StablePath, ZeroSource,
};
