//! Exact event-driven MAP simulation, importance-sampled first passage, the
//! exponential functional and the Lamperti–Kiu time change.

mod functional;
mod kernel;
mod lamperti;
mod passage;
mod path;

pub use functional::{exp_functional, linear_piece_integral, moment_recursion, ExpFunctional, ExpIntegral};
pub use kernel::{
    Event, EventKind, MapSimulator, Occupation, PathVisitor, StopReason, StopRule, SwitchCount, Terminal,
    DEFAULT_EVENT_CAP,
};
pub use lamperti::{ClockHit, ClockProbe, LampertiKiu};
pub use passage::{passage_prob_is, passage_samples};
pub use path::{simulate_map, simulate_with, MapPath, PathRecorder, Segment};
