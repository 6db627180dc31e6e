use serde::{Deserialize, Serialize};

use super::model::{ConditionedModel, Mode, DEFAULT_ABSORB_DEPTH_ALPHA};
use crate::error::{Error, Result};
use crate::simulate::{exp_functional, MapSimulator};
use crate::stats::{derive_seed, run_replicas, Summary};

/// Samples of the exponential functional `I` started from `(0, j)`,
/// one pool per modulator state. Since `τ0 = |x|^α I` under `P_x`, the pools
/// give `P_x(τ0 > s)` for every start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualPool {
    pub alpha: f64,
    /// sorted, per state
    pub per_state: Vec<Vec<f64>>,
    /// the same draws in replica order
    pub draws: Vec<Vec<f64>>,
    pub seed: u64,
}

impl ResidualPool {
    pub fn build(model: &ConditionedModel, n_per_state: usize, seed: u64) -> Result<Self> {
        if model.mode != Mode::Avoid {
            return Err(Error::Domain("I is finite only when theta > 0".into()));
        }
        if n_per_state < 2 {
            return Err(Error::Domain("need at least two samples per state".into()));
        }
        let sim = MapSimulator::new(model.base_spec()?)?;
        let trunc = DEFAULT_ABSORB_DEPTH_ALPHA / model.alpha;
        let draws = (0..model.spectral.n_states())
            .map(|j| {
                run_replicas(derive_seed(seed, j as u64), n_per_state, |rng, _| {
                    exp_functional(&sim, 0.0, j, model.alpha, trunc, rng).map(|f| f.value)
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let per_state = draws
            .iter()
            .map(|xs| {
                let mut xs = xs.clone();
                xs.sort_by(|a, b| a.total_cmp(b));
                xs
            })
            .collect();
        Ok(ResidualPool { alpha: model.alpha, per_state, draws, seed })
    }

    pub fn len(&self, state: usize) -> usize {
        self.per_state[state].len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_state.iter().all(Vec::is_empty)
    }

    /// Empirical `P_{0,state}(I > u)`.
    pub fn tail(&self, state: usize, u: f64) -> f64 {
        let xs = &self.per_state[state];
        let below = xs.partition_point(|v| *v <= u);
        (xs.len() - below) as f64 / xs.len() as f64
    }

    /// `P_x(τ0 > s)` with its binomial standard error.
    pub fn survival(&self, state: usize, abs_x: f64, s: f64) -> Summary {
        let p = self.tail(state, s * abs_x.powf(-self.alpha));
        let n = self.len(state);
        Summary { mean: p, stderr: (p * (1.0 - p) / n as f64).sqrt(), n }
    }

    /// Empirical quantile of `I` from `(0, state)`.
    pub fn quantile(&self, state: usize, q: f64) -> f64 {
        let xs = &self.per_state[state];
        let k = ((q * xs.len() as f64) as usize).min(xs.len() - 1);
        xs[k]
    }

    /// `E_{0,state}[I^p]` from the first `upto` draws.
    pub fn moment(&self, state: usize, p: f64, upto: usize) -> Summary {
        let xs: Vec<f64> = self.draws[state].iter().take(upto).map(|v| v.powf(p)).collect();
        Summary::of(&xs)
    }
}
