//! Markov additive random walks, Monte Carlo renewal measures, the Markov
//! renewal limit as a numerical check, and creeping at first passage.

mod creep;
mod marw;
mod measure;

pub use creep::{creep_overshoot, CreepEstimate};
pub use marw::{poissonize, MarwSampler, MarwSpec, Poissonized};
pub use measure::{renewal_limit_check, renewal_measure, RenewalMeasure, RenewalRun, TestFn, WalkLength};
