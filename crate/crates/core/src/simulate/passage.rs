//! First passage above a level by importance sampling under the Esscher tilt
//! at the Cramér number.

use super::kernel::{MapSimulator, StopRule, Terminal};
use crate::error::{Error, Result};
use crate::map::{esscher_spec, MapSpec, SpectralData};
use crate::stats::{run_replicas, EstimateReport, Summary};

/// Tilted passage samples: the likelihood ratio `v_{i0} e^{−θ ξ(T)} / v_{J(T)}`
/// (with `ξ(0) = 0`) and the terminal record of each replica.
pub fn passage_samples(
    spec: &MapSpec,
    sd: &SpectralData,
    y: f64,
    i0: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, Terminal)>> {
    let theta = sd.theta;
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("passage sampling needs theta > 0, got {theta}")));
    }
    if !(y > 0.0) {
        return Err(Error::Domain(format!("level must be positive, got {y}")));
    }
    let (tilted, _) = esscher_spec(spec, theta)?;
    let sim = MapSimulator::new(&tilted)?;
    let v = &sd.v_theta;
    run_replicas(seed, n, |rng, _| {
        let term = sim.run(0.0, i0, StopRule::LevelUp(y), rng, &mut ())?;
        Ok((v[i0] * (-theta * term.xi).exp() / v[term.state], term))
    })
    .into_iter()
    .collect()
}

/// Unbiased estimate of `P_{0,i0}(T⁺_y < ∞)`.
pub fn passage_prob_is(
    spec: &MapSpec,
    sd: &SpectralData,
    y: f64,
    i0: usize,
    n: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let w: Vec<f64> = passage_samples(spec, sd, y, i0, n, seed)?.into_iter().map(|(w, _)| w).collect();
    Ok(EstimateReport::new(format!("passage_prob(y={y}, i0={i0})"), Summary::of(&w), seed))
}
