//! Creeping versus jumping at first passage above a level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{MapSpec, SpectralData};
use crate::simulate::{passage_samples, MapSimulator, StopRule, Terminal};
use crate::stats::{derive_seed, run_replicas, Summary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreepEstimate {
    pub y: f64,
    /// `P(T⁺_y < ∞)`
    pub passage: Summary,
    /// `P(T⁺_y < ∞, crossing by drift)`
    pub creep: Summary,
    /// `P(T⁺_y < ∞, crossing by a jump)`
    pub jump: Summary,
    /// creep probability conditional on passage
    pub creep_share: Summary,
    /// mean overshoot `ξ(T⁺_y) − y` given a jump crossing
    pub overshoot_mean: Summary,
    /// weighted overshoot quantiles `(level, value)` given a jump crossing
    pub overshoot_quantiles: Vec<(f64, f64)>,
    pub seed: u64,
}

fn weighted_quantiles(mut xs: Vec<(f64, f64)>, levels: &[f64]) -> Vec<(f64, f64)> {
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = xs.iter().map(|p| p.1).sum();
    levels
        .iter()
        .map(|&q| {
            let mut acc = 0.0;
            let v = xs
                .iter()
                .find(|(_, w)| {
                    acc += w;
                    acc >= q * total
                })
                .map_or(f64::NAN, |p| p.0);
            (q, v)
        })
        .collect()
}

/// Passage records at each level, started from `(0, i0)`.
///
/// With `sd` given (and `θ > 0`) paths are drawn under the θ-tilt and carry
/// likelihood-ratio weights; otherwise the MAP is simulated directly, which
/// requires `T⁺_y < ∞` almost surely.
pub fn creep_overshoot(
    spec: &MapSpec,
    sd: Option<&SpectralData>,
    y_grid: &[f64],
    i0: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<CreepEstimate>> {
    let direct = if sd.is_none() { Some(MapSimulator::new(spec)?) } else { None };
    let mut out = Vec::with_capacity(y_grid.len());
    for (k, &y) in y_grid.iter().enumerate() {
        let s = derive_seed(seed, k as u64);
        let samples: Vec<(f64, Terminal)> = match (sd, &direct) {
            (Some(sd), _) => passage_samples(spec, sd, y, i0, n, s)?,
            (None, Some(sim)) => run_replicas(s, n, |rng, _| sim.run(0.0, i0, StopRule::LevelUp(y), rng, &mut ()))
                .into_iter()
                .map(|r| r.map(|t| (1.0, t)))
                .collect::<Result<_>>()?,
            (None, None) => unreachable!(),
        };
        let pass: Vec<f64> = samples.iter().map(|(w, _)| *w).collect();
        let creep: Vec<f64> = samples.iter().map(|(w, t)| if t.creep { *w } else { 0.0 }).collect();
        let jump: Vec<f64> = samples.iter().map(|(w, t)| if t.creep { 0.0 } else { *w }).collect();
        let over: Vec<f64> = samples.iter().map(|(w, t)| if t.creep { 0.0 } else { w * (t.xi - y) }).collect();
        let over_pts: Vec<(f64, f64)> = samples.iter().filter(|(_, t)| !t.creep).map(|(w, t)| (t.xi - y, *w)).collect();
        if samples.iter().any(|(_, t)| t.xi < y) {
            return Err(Error::Numerical("passage record below its level".into()));
        }
        out.push(CreepEstimate {
            y,
            passage: Summary::of(&pass),
            creep: Summary::of(&creep),
            jump: Summary::of(&jump),
            creep_share: Summary::ratio(&creep, &pass),
            overshoot_mean: Summary::ratio(&over, &jump),
            overshoot_quantiles: weighted_quantiles(over_pts, &[0.25, 0.5, 0.75, 0.9]),
            seed: s,
        });
    }
    Ok(out)
}
