//! Conditioning limits at spatial thresholds and the h-transform target they
//! converge to.

use serde::{Deserialize, Serialize};

use super::model::{probe_run, ConditionedModel, Mode, PathFunctional, DEFAULT_ABSORB_DEPTH_ALPHA};
use crate::error::{Error, Result};
use crate::simulate::{MapSimulator, StopRule};
use crate::stats::{derive_seed, run_replicas, EstimateReport, Summary};

/// `E_x[h(X_t)/h(x); A, t < τ0]` for each event by two independent routes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub x: f64,
    pub t: f64,
    pub events: Vec<String>,
    /// simulation under the tilted MAP
    pub tilted: Vec<Summary>,
    /// unconditioned paths reweighted by `h(X_t)/h(x)·1{t<τ0}`
    pub reweighted: Vec<Summary>,
    /// fraction of tilted replicas absorbed before `t`
    pub tilted_absorbed: f64,
    /// fraction of unconditioned replicas absorbed before `t`
    pub base_absorbed: f64,
}

impl TargetEstimate {
    /// Two-route agreement within `k` combined standard errors, per event.
    pub fn route_checks(&self, k: f64) -> Vec<EstimateReport> {
        self.events
            .iter()
            .zip(self.tilted.iter().zip(&self.reweighted))
            .map(|(name, (a, b))| {
                EstimateReport::new(format!("two_route[{name}]"), *a, 0).judge_against(b, k)
            })
            .collect()
    }
}

fn floor_of(model: &ConditionedModel, xi0: f64) -> f64 {
    xi0 - DEFAULT_ABSORB_DEPTH_ALPHA / model.alpha
}

/// Estimate the h-transform target at clock time `t` from `x`. Absorption at
/// the origin is detected when ξ falls [`DEFAULT_ABSORB_DEPTH_ALPHA`]`/α`
/// below its start.
pub fn h_transform_target<E: PathFunctional>(
    model: &ConditionedModel,
    x: f64,
    t: f64,
    events: &[E],
    n: usize,
    seed: u64,
) -> Result<TargetEstimate> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let i0 = model.state_of(x)?;
    let xi0 = x.abs().ln();
    let floor = floor_of(model, xi0);
    let m = events.len();

    let tilted = MapSimulator::new(model.tilted_spec()?)?;
    let rows = run_replicas(derive_seed(seed, 1), n, |rng, _| {
        let (_, hit) = probe_run(&tilted, model.alpha, xi0, i0, t, StopRule::XiBelow(floor), true, rng)?;
        Ok(match hit {
            Some(h) => {
                let w = model.window(&h);
                (events.iter().map(|e| f64::from(e.holds(&w) as u8)).collect::<Vec<_>>(), 0.0)
            }
            None => (vec![0.0; m], 1.0),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (tilted_sum, tilted_absorbed) = collect(&rows, m);

    let base = MapSimulator::new(model.base_spec()?)?;
    let rows = run_replicas(derive_seed(seed, 2), n, |rng, _| {
        let (_, hit) = probe_run(&base, model.alpha, xi0, i0, t, StopRule::XiBelow(floor), true, rng)?;
        Ok(match hit {
            Some(h) => {
                let w = model.window(&h);
                let ratio = model.h_ratio(xi0, i0, h.xi, h.state);
                (events.iter().map(|e| if e.holds(&w) { ratio } else { 0.0 }).collect(), 0.0)
            }
            None => (vec![0.0; m], 1.0),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (reweighted, base_absorbed) = collect(&rows, m);

    Ok(TargetEstimate {
        x,
        t,
        events: events.iter().map(|e| e.label()).collect(),
        tilted: tilted_sum,
        reweighted,
        tilted_absorbed,
        base_absorbed,
    })
}

fn collect(rows: &[(Vec<f64>, f64)], m: usize) -> (Vec<Summary>, f64) {
    let per_event = (0..m)
        .map(|k| Summary::of(&rows.iter().map(|r| r.0[k]).collect::<Vec<_>>()))
        .collect();
    let absorbed = rows.iter().map(|r| r.1).sum::<f64>() / rows.len().max(1) as f64;
    (per_event, absorbed)
}

/// One threshold of a limit experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub a: f64,
    /// conditional probability of each event given the threshold event
    pub conditional: Vec<Summary>,
    /// probability of the threshold event itself
    pub threshold_prob: Summary,
    /// `a^θ` times the threshold probability
    pub scaled: Summary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitReport {
    pub mode: Mode,
    pub x: f64,
    pub t: f64,
    pub events: Vec<String>,
    pub rows: Vec<ThresholdRow>,
    pub target: TargetEstimate,
    pub checks: Vec<EstimateReport>,
}

impl LimitReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EstimateReport::passed)
    }
}

/// Threshold rows by importance sampling under the θ-tilt: the tilted MAP
/// reaches the threshold level almost surely, and the likelihood ratio
/// `v_{i0} e^{−θ(ξ_T − ξ_0)} / v_{J_T}` restores the base law on `{T < ∞}`.
fn threshold_rows<E: PathFunctional>(
    model: &ConditionedModel,
    x: f64,
    t: f64,
    events: &[E],
    a_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<ThresholdRow>> {
    let i0 = model.state_of(x)?;
    let xi0 = x.abs().ln();
    let sim = MapSimulator::new(model.tilted_spec()?)?;
    let v = &model.spectral.v_theta;
    let theta = model.theta;
    let m = events.len();
    a_grid
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let level = a.ln();
            let stop = match model.mode {
                Mode::Avoid if a > x.abs() => StopRule::LevelUp(level),
                Mode::Absorb if a < x.abs() => StopRule::LevelDown(level),
                _ => return Err(Error::Domain(format!("threshold {a} on the wrong side of |x| = {}", x.abs()))),
            };
            let rows = run_replicas(derive_seed(seed, 100 + k as u64), n, |rng, _| {
                let (term, hit) = probe_run(&sim, model.alpha, xi0, i0, t, stop, false, rng)?;
                let lr = v[i0] / v[term.state] * (-theta * (term.xi - xi0)).exp();
                let num: Vec<f64> = match hit {
                    Some(h) => {
                        let w = model.window(&h);
                        events.iter().map(|e| if e.holds(&w) { lr } else { 0.0 }).collect()
                    }
                    None => vec![0.0; m],
                };
                Ok((num, lr))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let den: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let conditional = (0..m)
                .map(|j| Summary::ratio(&rows.iter().map(|r| r.0[j]).collect::<Vec<_>>(), &den))
                .collect();
            let threshold_prob = Summary::of(&den);
            Ok(ThresholdRow { a, conditional, threshold_prob, scaled: threshold_prob.scaled(a.powf(theta)) })
        })
        .collect()
}

fn limit_checks(rows: &[ThresholdRow], target: &TargetEstimate) -> Vec<EstimateReport> {
    let mut checks = vec![];
    if let Some(last) = rows.last() {
        for (j, name) in target.events.iter().enumerate() {
            checks.push(
                EstimateReport::new(format!("limit[{name}] at a={}", last.a), last.conditional[j], 0)
                    .judge_against(&target.tilted[j], 3.0),
            );
        }
    }
    if rows.len() >= 2 {
        let (p, q) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
        checks.push(
            EstimateReport::new(format!("scaled_threshold_prob a={} vs a={}", q.a, p.a), q.scaled, 0)
                .judge_against(&p.scaled, 3.0),
        );
    }
    checks.extend(target.route_checks(3.0));
    checks
}

/// `P_x(A, t < τ_a | τ_a < τ0)` with `τ_a` the exit time from `(−a, a)`, for
/// each `a` (increasing), against `E_x[h(X_t)/h(x); A]`.
pub fn verify_avoid_limit<E: PathFunctional>(
    model: &ConditionedModel,
    x: f64,
    t: f64,
    events: &[E],
    a_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<LimitReport> {
    if model.mode != Mode::Avoid {
        return Err(Error::Domain("avoid limit needs theta > 0".into()));
    }
    let rows = threshold_rows(model, x, t, events, a_grid, n, seed)?;
    let target = h_transform_target(model, x, t, events, n, derive_seed(seed, 7))?;
    Ok(LimitReport {
        mode: model.mode,
        x,
        t,
        events: target.events.clone(),
        checks: limit_checks(&rows, &target),
        rows,
        target,
    })
}

/// `P_x(A, t < τ_a | τ_a < ∞)` with `τ_a` the entrance time of `(−a, a)`, for
/// each `a` (decreasing), against `E_x[h(X_t)/h(x); A, t < τ0]`.
pub fn verify_absorb_limit<E: PathFunctional>(
    model: &ConditionedModel,
    x: f64,
    t: f64,
    events: &[E],
    a_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<LimitReport> {
    if model.mode != Mode::Absorb {
        return Err(Error::Domain("absorb limit needs theta < 0".into()));
    }
    let rows = threshold_rows(model, x, t, events, a_grid, n, seed)?;
    let target = h_transform_target(model, x, t, events, n, derive_seed(seed, 7))?;
    Ok(LimitReport {
        mode: model.mode,
        x,
        t,
        events: target.events.clone(),
        checks: limit_checks(&rows, &target),
        rows,
        target,
    })
}
