//! Event-driven simulation of a MAP with piecewise-linear paths.
//!
//! Between events ξ moves with the drift of the current state. Events are the
//! first of two competing exponential clocks: a modulator switch (rate
//! `−q_ii`, carrying a switch jump) or a compound-Poisson jump (rate
//! `cp_rate_i`). Level crossings on linear pieces are located exactly.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::MapSpec;

/// Default cap on the number of events per path.
pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "level")]
pub enum StopRule {
    FixedHorizon(f64),
    /// first time ξ exceeds the level
    LevelUp(f64),
    /// first time ξ drops below the level
    LevelDown(f64),
    /// like `LevelDown`, used to truncate exponential functionals
    XiBelow(f64),
}

impl StopRule {
    fn validate(&self) -> Result<()> {
        let v = match self {
            StopRule::FixedHorizon(t) => {
                if !(*t >= 0.0) {
                    return Err(Error::Domain(format!("horizon must be >= 0, got {t}")));
                }
                *t
            }
            StopRule::LevelUp(y) | StopRule::LevelDown(y) | StopRule::XiBelow(y) => *y,
        };
        if !v.is_finite() {
            return Err(Error::Domain("stop rule parameter must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    CpJump,
    Switch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub xi_before: f64,
    pub xi_after: f64,
    pub from: usize,
    pub to: usize,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    LevelUp,
    LevelDown,
    /// the visitor asked to stop
    Visitor,
}

/// Where and how a path stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub t: f64,
    pub xi: f64,
    /// left limit of ξ at the stopping time
    pub xi_before: f64,
    pub state: usize,
    pub reason: StopReason,
    /// for level rules: crossing happened continuously along a drift
    pub creep: bool,
    pub events: u64,
}

/// Observer of the path as it is generated.
pub trait PathVisitor {
    /// Linear piece on `[t0, t1)` starting from `xi0` with slope `drift`.
    fn segment(&mut self, _t0: f64, _t1: f64, _xi0: f64, _drift: f64, _state: usize) {}
    fn event(&mut self, _ev: &Event) {}
    /// Checked after every piece and event; `true` ends the run.
    fn done(&self) -> bool {
        false
    }
}

impl PathVisitor for () {}

/// Per-state rates cached from a [`MapSpec`].
#[derive(Debug, Clone)]
pub struct MapSimulator {
    spec: MapSpec,
    exit_rate: Vec<f64>,
    total_rate: Vec<f64>,
    /// cumulative switch probabilities per row (diagonal entry skipped)
    switch_cdf: Vec<Vec<(usize, f64)>>,
    pub event_cap: u64,
}

impl MapSimulator {
    pub fn new(spec: &MapSpec) -> Result<Self> {
        if !spec.is_simulable() {
            return Err(Error::InvalidSpec("exact simulation needs gaussian_sd = 0 in every state".into()));
        }
        let n = spec.n_states();
        let mut exit_rate = Vec::with_capacity(n);
        let mut total_rate = Vec::with_capacity(n);
        let mut switch_cdf = Vec::with_capacity(n);
        for i in 0..n {
            let out = spec.exit_rate(i);
            exit_rate.push(out);
            total_rate.push(out + spec.component(i).cp_rate);
            let mut acc = 0.0;
            let mut row = vec![];
            for j in 0..n {
                if j != i && spec.q()[(i, j)] > 0.0 {
                    acc += spec.q()[(i, j)] / out;
                    row.push((j, acc));
                }
            }
            if let Some(last) = row.last_mut() {
                last.1 = 1.0;
            }
            switch_cdf.push(row);
        }
        Ok(MapSimulator { spec: spec.clone(), exit_rate, total_rate, switch_cdf, event_cap: DEFAULT_EVENT_CAP })
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn with_event_cap(mut self, cap: u64) -> Self {
        self.event_cap = cap;
        self
    }

    /// Run one path from `(x0, i0)` until `stop` fires.
    pub fn run<R: Rng + ?Sized, V: PathVisitor>(
        &self,
        x0: f64,
        i0: usize,
        stop: StopRule,
        rng: &mut R,
        visitor: &mut V,
    ) -> Result<Terminal> {
        stop.validate()?;
        let n = self.spec.n_states();
        if i0 >= n {
            return Err(Error::Domain(format!("start state {i0} out of range for {n} states")));
        }
        let mut t = 0.0;
        let mut xi = x0;
        let mut state = i0;
        let mut events = 0u64;
        let done = |t: f64, xi: f64, xi_before: f64, state: usize, reason, creep, events| Terminal {
            t,
            xi,
            xi_before,
            state,
            reason,
            creep,
            events,
        };
        // already past the level at time 0
        match stop {
            StopRule::LevelUp(y) if xi > y => return Ok(done(0.0, xi, xi, state, StopReason::LevelUp, false, 0)),
            StopRule::LevelDown(y) | StopRule::XiBelow(y) if xi < y => {
                return Ok(done(0.0, xi, xi, state, StopReason::LevelDown, false, 0))
            }
            _ => {}
        }
        loop {
            let comp = self.spec.component(state);
            let d = comp.drift;
            let total = self.total_rate[state];
            let dt = if total > 0.0 {
                let e: f64 = Exp1.sample(rng);
                e / total
            } else {
                f64::INFINITY
            };
            // time at which the current linear piece would trigger the rule
            let (t_stop, reason, creep) = match stop {
                StopRule::FixedHorizon(h) => (h, StopReason::Horizon, false),
                StopRule::LevelUp(y) if d > 0.0 => (t + (y - xi) / d, StopReason::LevelUp, true),
                StopRule::LevelDown(y) | StopRule::XiBelow(y) if d < 0.0 => {
                    (t + (y - xi) / d, StopReason::LevelDown, true)
                }
                _ => (f64::INFINITY, StopReason::Horizon, false),
            };
            if t_stop <= t + dt {
                if !t_stop.is_finite() {
                    return Err(Error::Truncated { events, partial: None });
                }
                visitor.segment(t, t_stop, xi, d, state);
                let xi_end = match stop {
                    StopRule::FixedHorizon(_) => xi + d * (t_stop - t),
                    StopRule::LevelUp(y) | StopRule::LevelDown(y) | StopRule::XiBelow(y) => y,
                };
                return Ok(done(t_stop, xi_end, xi_end, state, reason, creep, events));
            }
            if events >= self.event_cap {
                return Err(Error::Truncated { events, partial: None });
            }
            visitor.segment(t, t + dt, xi, d, state);
            t += dt;
            xi += d * dt;
            if visitor.done() {
                return Ok(done(t, xi, xi, state, StopReason::Visitor, false, events));
            }
            events += 1;
            let xi_before = xi;
            let from = state;
            let u: f64 = rng.random::<f64>() * total;
            let kind = if u < self.exit_rate[state] {
                let v: f64 = rng.random();
                let row = &self.switch_cdf[state];
                let j = row.iter().find(|(_, c)| v < *c).unwrap_or_else(|| row.last().expect("irreducible")).0;
                xi += self.spec.switch_law(state, j).sample(rng);
                state = j;
                EventKind::Switch
            } else {
                xi += comp.cp_jump.sample(rng);
                EventKind::CpJump
            };
            visitor.event(&Event { t, xi_before, xi_after: xi, from, to: state, kind });
            if visitor.done() {
                return Ok(done(t, xi, xi_before, state, StopReason::Visitor, false, events));
            }
            match stop {
                StopRule::LevelUp(y) if xi > y => {
                    return Ok(done(t, xi, xi_before, state, StopReason::LevelUp, false, events))
                }
                StopRule::LevelDown(y) | StopRule::XiBelow(y) if xi < y => {
                    return Ok(done(t, xi, xi_before, state, StopReason::LevelDown, false, events))
                }
                _ => {}
            }
        }
    }
}

/// Running occupation times per state.
#[derive(Debug, Clone, Default)]
pub struct Occupation(pub Vec<f64>);

impl PathVisitor for Occupation {
    fn segment(&mut self, t0: f64, t1: f64, _xi0: f64, _drift: f64, state: usize) {
        if self.0.len() <= state {
            self.0.resize(state + 1, 0.0);
        }
        self.0[state] += t1 - t0;
    }
}

/// Counts switch events.
#[derive(Debug, Clone, Copy, Default)]
pub struct SwitchCount(pub u64);

impl PathVisitor for SwitchCount {
    fn event(&mut self, ev: &Event) {
        if ev.kind == EventKind::Switch {
            self.0 += 1;
        }
    }
}
