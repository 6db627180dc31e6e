//! Doob h-transforms of self-similar Markov processes on the line and Monte
//! Carlo checks of the limits that characterize them.
//!
//! With `h(x) = v_{sign x}(θ)|x|^θ`, the conditioned process is the Lamperti–Kiu
//! image of the MAP tilted at θ. For θ > 0 it avoids the origin, for θ < 0 it
//! is absorbed there continuously. The origin is never detected on a path:
//! absorption is read through the clock `τ0 = |x|^α I`.

mod limits;
mod model;
mod residual;
mod tail;
mod time_limit;

pub use limits::{h_transform_target, verify_absorb_limit, verify_avoid_limit, LimitReport, TargetEstimate, ThresholdRow};
pub use model::{
    condition, condition_auto, condition_stable, BaseModel, ClockWindow, ConditionedModel, Mode, PathEvent,
    PathFunctional, DEFAULT_ABSORB_DEPTH_ALPHA,
};
pub use residual::ResidualPool;
pub use tail::{tau0_tail_check, TailCurve, TailOptions, TailReport};
pub use time_limit::{ratio_of, verify_time_limit, SurvivalRow, TimeLimitReport};
