//! Conditioning on survival past a late time `t + s`.

use serde::{Deserialize, Serialize};

use super::limits::{h_transform_target, TargetEstimate};
use super::model::{probe_run, ConditionedModel, Mode, PathFunctional, DEFAULT_ABSORB_DEPTH_ALPHA};
use super::residual::ResidualPool;
use crate::error::{Error, Result};
use crate::simulate::{MapSimulator, StopRule};
use crate::stats::{derive_seed, run_replicas, EstimateReport, Summary};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub s: f64,
    /// `P_x(A | τ0 > t + s)` per event
    pub conditional: Vec<Summary>,
    /// `P_x(τ0 > s) / P_y(τ0 > s)`
    pub tail_ratio: Summary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeLimitReport {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub events: Vec<String>,
    pub rows: Vec<SurvivalRow>,
    /// `h(x) / h(y)`
    pub h_ratio: f64,
    pub target: TargetEstimate,
    pub checks: Vec<EstimateReport>,
}

impl TimeLimitReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EstimateReport::passed)
    }
}

/// Ratio of two independent estimates with a delta-method error.
pub fn ratio_of(a: &Summary, b: &Summary) -> Summary {
    let r = a.mean / b.mean;
    let rel = (a.stderr / a.mean).hypot(b.stderr / b.mean);
    Summary { mean: r, stderr: (r * rel).abs(), n: a.n.min(b.n) }
}

/// `P_x(A | τ0 > t + s)` for each `s`. Paths run to clock time `t`; the
/// survival probability `P_{X_t}(τ0 > s)` of the remainder is read off the
/// residual pool at the post-`t` state. Also reports the tail ratio
/// `P_x(τ0 > s) / P_y(τ0 > s)` against `h(x)/h(y)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_time_limit<E: PathFunctional>(
    model: &ConditionedModel,
    x: f64,
    y: f64,
    t: f64,
    events: &[E],
    s_grid: &[f64],
    n: usize,
    pool: &ResidualPool,
    seed: u64,
) -> Result<TimeLimitReport> {
    if model.mode != Mode::Avoid {
        return Err(Error::Domain("time limit needs theta > 0".into()));
    }
    if s_grid.is_empty() || s_grid.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Domain("s grid must be nonempty and positive".into()));
    }
    let i0 = model.state_of(x)?;
    let iy = model.state_of(y)?;
    let xi0 = x.abs().ln();
    let floor = xi0 - DEFAULT_ABSORB_DEPTH_ALPHA / model.alpha;
    let sim = MapSimulator::new(model.base_spec()?)?;
    let alpha = model.alpha;
    let m = events.len();

    // (event indicators, ξ_t, J_t) per replica, or None when absorbed before t
    let windows = run_replicas(derive_seed(seed, 1), n, |rng, _| {
        let (_, hit) = probe_run(&sim, alpha, xi0, i0, t, StopRule::XiBelow(floor), true, rng)?;
        Ok(hit.map(|h| {
            let w = model.window(&h);
            (events.iter().map(|e| e.holds(&w)).collect::<Vec<_>>(), h.xi, h.state)
        }))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let rows = s_grid
        .iter()
        .map(|&s| {
            let den: Vec<f64> = windows
                .iter()
                .map(|w| w.as_ref().map_or(0.0, |(_, xi, j)| pool.tail(*j, s * (-alpha * xi).exp())))
                .collect();
            let conditional = (0..m)
                .map(|k| {
                    let num: Vec<f64> = windows
                        .iter()
                        .zip(&den)
                        .map(|(w, d)| match w {
                            Some((hits, _, _)) if hits[k] => *d,
                            _ => 0.0,
                        })
                        .collect();
                    Summary::ratio(&num, &den)
                })
                .collect();
            let tail_ratio = ratio_of(&pool.survival(i0, x.abs(), s), &pool.survival(iy, y.abs(), s));
            SurvivalRow { s, conditional, tail_ratio }
        })
        .collect::<Vec<_>>();

    let target = h_transform_target(model, x, t, events, n, derive_seed(seed, 7))?;
    let h_ratio = model.h(x)? / model.h(y)?;
    let mut checks = vec![];
    let last = rows.last().expect("nonempty grid");
    for (k, name) in target.events.iter().enumerate() {
        checks.push(
            EstimateReport::new(format!("time_limit[{name}] at s={}", last.s), last.conditional[k], seed)
                .judge_against(&target.tilted[k], 3.0),
        );
    }
    checks.push(
        EstimateReport::new(format!("tail_ratio at s={}", last.s), last.tail_ratio, pool.seed).judge(h_ratio, 3.0, 0.0),
    );
    Ok(TimeLimitReport { x, y, t, events: target.events.clone(), rows, h_ratio, target, checks })
}
