//! Direct simulation of stable paths.
//!
//! Two schemes live here. [`simulate_stable_path`] samples exact increments on
//! a uniform grid, which is simple but blind to excursions between grid
//! points. [`interval_race`] is jump-adapted: jumps larger than a truncation
//! level proportional to the distance to the nearest target are simulated
//! exactly, so an entrance into (or exit from) an interval by a jump is never
//! missed; the remaining small jumps are replaced by a drift plus Gaussian
//! term of matching mean and variance.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::StableParams;
use super::passage::{exit_interval_value, hit_interval_value};
use crate::error::{Error, Result};
use crate::stats::{run_replicas, Summary};

/// One unit-time increment by the Chambers–Mallows–Stuck construction.
///
/// With `B = π(ρ − 1/2)` the skewed form collapses to
/// `sin(α(V+B)) / cos(V)^{1/α} · (cos(V − α(V+B)) / W)^{(1−α)/α}`,
/// which is also valid at `α = 1` (Cauchy with drift `−cos πρ`).
pub fn sample_unit_stable<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    let a = params.alpha;
    let b = PI * (params.rho - 0.5);
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let s = a * (v + b);
    if a == 1.0 {
        return s.sin() / v.cos();
    }
    s.sin() / v.cos().powf(1.0 / a) * ((v - s).cos() / w).powf((1.0 - a) / a)
}

/// Increment of the stable process over a time step `dt > 0`.
pub fn sample_stable_increment<R: Rng + ?Sized>(params: &StableParams, dt: f64, rng: &mut R) -> f64 {
    dt.powf(1.0 / params.alpha) * sample_unit_stable(params, rng)
}

/// Source of unit-time increments, so a path can be driven by a stub.
pub trait IncrementSource {
    fn unit(&mut self) -> f64;
}

pub struct CmsSource<'a, R: Rng + ?Sized> {
    pub params: StableParams,
    pub rng: &'a mut R,
}

impl<R: Rng + ?Sized> IncrementSource for CmsSource<'_, R> {
    fn unit(&mut self) -> f64 {
        sample_unit_stable(&self.params, self.rng)
    }
}

/// Always returns 0.
pub struct ZeroSource;

impl IncrementSource for ZeroSource {
    fn unit(&mut self) -> f64 {
        0.0
    }
}

/// Uniform-grid skeleton with first-passage records per radius.
#[derive(Debug, Clone, PartialEq)]
pub struct StablePath {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub radii: Vec<f64>,
    /// first grid time with `|X| < a`, per radius
    pub first_entry: Vec<Option<f64>>,
    /// first grid time with `|X| >= a`, per radius
    pub first_exit: Vec<Option<f64>>,
}

/// Simulate on the grid `0, step, 2·step, …` up to `horizon`.
pub fn simulate_stable_path<S: IncrementSource>(
    params: &StableParams,
    x0: f64,
    step: f64,
    horizon: f64,
    radii: &[f64],
    source: &mut S,
) -> Result<StablePath> {
    if x0 == 0.0 || !x0.is_finite() {
        return Err(Error::Domain(format!("stable path needs finite x0 != 0, got {x0}")));
    }
    if !(step > 0.0 && horizon > step) {
        return Err(Error::Domain(format!("need 0 < step < horizon, got step {step}, horizon {horizon}")));
    }
    let n = (horizon / step).floor() as usize;
    let scale = step.powf(1.0 / params.alpha);
    let mut times = Vec::with_capacity(n + 1);
    let mut xs = Vec::with_capacity(n + 1);
    times.push(0.0);
    xs.push(x0);
    let mut first_entry = vec![None; radii.len()];
    let mut first_exit = vec![None; radii.len()];
    let mut x = x0;
    for k in 1..=n {
        x += scale * source.unit();
        let t = k as f64 * step;
        times.push(t);
        xs.push(x);
        for (r, &a) in radii.iter().enumerate() {
            if x.abs() < a && first_entry[r].is_none() {
                first_entry[r] = Some(t);
            }
            if x.abs() >= a && first_exit[r].is_none() {
                first_exit[r] = Some(t);
            }
        }
    }
    Ok(StablePath { times, xs, radii: radii.to_vec(), first_entry, first_exit })
}

/// Which target a race ended at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RaceOutcome {
    /// entered `(−inner, inner)`
    Inner,
    /// reached `|X| >= outer`
    Outer,
    /// hit the event cap
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceConfig {
    pub inner: f64,
    pub outer: f64,
    /// truncation level as a fraction of the distance to the nearest target
    pub accuracy: f64,
    pub max_events: u64,
}

impl RaceConfig {
    pub fn new(inner: f64, outer: f64) -> Self {
        RaceConfig { inner, outer, accuracy: 0.05, max_events: 50_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaceRecord {
    pub outcome: RaceOutcome,
    /// for each mark radius (all above `inner`), whether `|X| < mark` was
    /// seen before the race ended
    pub marks_reached: Vec<bool>,
    pub events: u64,
    pub time: f64,
}

/// Run the jump-adapted scheme from `x0` with `inner < |x0| < outer` until
/// `|X|` drops below `inner` or reaches `outer`.
pub fn interval_race<R: Rng + ?Sized>(
    params: &StableParams,
    x0: f64,
    cfg: &RaceConfig,
    marks: &[f64],
    rng: &mut R,
) -> Result<RaceRecord> {
    let RaceConfig { inner, outer, accuracy, max_events } = *cfg;
    if !(inner >= 0.0 && inner < x0.abs() && x0.abs() < outer) {
        return Err(Error::Domain(format!("race needs inner < |x0| < outer, got {inner}, {x0}, {outer}")));
    }
    let a = params.alpha;
    let (cp, cm) = params.levy_constants();
    let ctot = cp + cm;
    let p_up = cp / ctot;
    let mut marks_reached = vec![false; marks.len()];
    let mut x = x0;
    let mut t = 0.0;
    let mut events = 0u64;
    let outcome = loop {
        let ax = x.abs();
        for (m, &r) in marks.iter().enumerate() {
            if ax < r {
                marks_reached[m] = true;
            }
        }
        if ax < inner {
            break RaceOutcome::Inner;
        }
        if ax >= outer {
            break RaceOutcome::Outer;
        }
        if events >= max_events {
            break RaceOutcome::Stalled;
        }
        events += 1;
        let to_inner = ax - inner;
        let to_outer = outer - ax;
        let d = to_inner.min(to_outer);
        if d <= 1e-13 * ax.max(1.0) {
            // pinned against a boundary at float resolution
            break if to_inner <= to_outer { RaceOutcome::Inner } else { RaceOutcome::Outer };
        }
        let eta = accuracy * d;
        let rate = ctot * eta.powf(-a) / a;
        let e: f64 = Exp1.sample(rng);
        let tau = e / rate;
        // small jumps: mean and variance of jumps below eta
        let drift = if a == 1.0 { -(PI * params.rho).cos() } else { (cp - cm) * eta.powf(1.0 - a) / (1.0 - a) };
        let var = ctot * eta.powf(2.0 - a) / (2.0 - a);
        let z: f64 = StandardNormal.sample(rng);
        x += drift * tau + (var * tau).sqrt() * z;
        t += tau;
        let ax = x.abs();
        if ax < inner || ax >= outer {
            continue;
        }
        let u: f64 = rng.random();
        let size = eta * (1.0 - u).powf(-1.0 / a);
        x += if rng.random::<f64>() < p_up { size } else { -size };
    };
    Ok(RaceRecord { outcome, marks_reached, events, time: t })
}

/// Monte Carlo estimate of `P_x(τ^{(−1,1)} < ∞)` for `α < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitEstimate {
    pub summary: Summary,
    /// paths sent beyond this radius are counted as misses
    pub escape_radius: f64,
    /// upper bound on the probability lost by that cut
    pub horizon_margin: f64,
    pub stalled: usize,
}

pub fn hit_probability_mc(params: &StableParams, x: f64, n: usize, seed: u64, accuracy: f64) -> Result<HitEstimate> {
    let escape_radius = 1e8;
    let mirrored = StableParams { alpha: params.alpha, rho: params.rho_hat() };
    let horizon_margin = hit_interval_value(params, escape_radius)?.max(hit_interval_value(&mirrored, escape_radius)?);
    let cfg = RaceConfig { accuracy, ..RaceConfig::new(1.0, escape_radius) };
    let records = run_replicas(seed, n, |rng, _| interval_race(params, x, &cfg, &[], rng));
    let mut hits = Vec::with_capacity(n);
    let mut stalled = 0;
    for r in records {
        let r = r?;
        if r.outcome == RaceOutcome::Stalled {
            stalled += 1;
        }
        hits.push(if r.outcome == RaceOutcome::Inner { 1.0 } else { 0.0 });
    }
    Ok(HitEstimate { summary: Summary::of(&hits), escape_radius, horizon_margin, stalled })
}

/// Which reading of the exit formula the simulation supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// formula is P(exit before hitting 0)
    Formula,
    /// formula is P(hitting 0 before exit)
    Complement,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub x: f64,
    pub formula: f64,
    /// estimate of P_x(exit (−1,1) before hitting 0)
    pub exit_first: Summary,
    /// raw small-ball proxies, one per ball radius
    pub proxies: Vec<(f64, Summary)>,
    pub direction: Direction,
}

impl DirectionReport {
    pub fn resolved(&self) -> bool {
        matches!(self.direction, Direction::Formula | Direction::Complement)
    }
}

/// Estimate `P_x(τ^{(−1,1)ᶜ} < τ^{0})` for `α ∈ (1,2)` and compare with the
/// printed formula and its complement.
///
/// Hitting 0 is proxied by entering a small ball. Balls of radii `ε` and
/// `ε·100` are raced on the same paths and the ball bias, which scales like
/// `ε^{α−1}`, is removed by extrapolation.
pub fn exit_direction(params: &StableParams, x: f64, n: usize, seed: u64) -> Result<DirectionReport> {
    let formula = exit_interval_value(params, x)?;
    let small = 1e-5;
    let large = 1e-3;
    let cfg = RaceConfig { accuracy: 0.1, ..RaceConfig::new(small, 1.0) };
    let records = run_replicas(seed, n, |rng, _| interval_race(params, x, &cfg, &[large], rng));
    let r = (small / large).powf(params.alpha - 1.0);
    let mut exit_small = Vec::with_capacity(n);
    let mut exit_large = Vec::with_capacity(n);
    let mut extrapolated = Vec::with_capacity(n);
    for rec in records {
        let rec = rec?;
        if rec.outcome == RaceOutcome::Stalled {
            return Err(Error::Numerical("exit-direction race stalled".into()));
        }
        let es = if rec.outcome == RaceOutcome::Outer { 1.0 } else { 0.0 };
        let el = if rec.marks_reached[0] { 0.0 } else { es };
        exit_small.push(es);
        exit_large.push(el);
        extrapolated.push((es - r * el) / (1.0 - r));
    }
    let exit_first = Summary::of(&extrapolated);
    let near = |target: f64| exit_first.within(target, 3.0, 0.0);
    let direction = match (near(formula), near(1.0 - formula)) {
        (true, false) => Direction::Formula,
        (false, true) => Direction::Complement,
        (true, true) => Direction::Both,
        (false, false) => Direction::Neither,
    };
    Ok(DirectionReport {
        x,
        formula,
        exit_first,
        proxies: vec![(small, Summary::of(&exit_small)), (large, Summary::of(&exit_large))],
        direction,
    })
}
