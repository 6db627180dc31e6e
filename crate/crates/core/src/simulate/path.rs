//! Stored MAP paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{Event, EventKind, MapSimulator, PathVisitor, StopRule, Terminal};
use crate::error::{Error, Result};
use crate::map::MapSpec;

/// Linear piece of ξ: valid from `t_start` until the next segment (or the
/// terminal time), in a fixed state with slope `drift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub xi_start: f64,
    pub state: usize,
    pub drift: f64,
}

/// Piecewise-linear skeleton of `(ξ, J)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPath {
    pub segments: Vec<Segment>,
    pub events: Vec<Event>,
    pub terminal: Option<Terminal>,
}

impl MapPath {
    pub fn end_time(&self) -> f64 {
        self.terminal.map(|t| t.t).unwrap_or_else(|| self.segments.last().map_or(0.0, |s| s.t_start))
    }

    /// Index of the segment covering time `s` (right-continuous).
    pub fn segment_at(&self, s: f64) -> Option<usize> {
        if self.segments.is_empty() || s < self.segments[0].t_start || s > self.end_time() {
            return None;
        }
        let k = self.segments.partition_point(|seg| seg.t_start <= s);
        Some(k.saturating_sub(1))
    }

    /// `(ξ(s), J(s))`.
    pub fn at(&self, s: f64) -> Option<(f64, usize)> {
        let k = self.segment_at(s)?;
        let seg = &self.segments[k];
        Some((seg.xi_start + seg.drift * (s - seg.t_start), seg.state))
    }

    /// Same increments from a shifted start `ξ(0) + dx`.
    pub fn shifted(&self, dx: f64) -> MapPath {
        let mut p = self.clone();
        for s in &mut p.segments {
            s.xi_start += dx;
        }
        for e in &mut p.events {
            e.xi_before += dx;
            e.xi_after += dx;
        }
        if let Some(t) = &mut p.terminal {
            t.xi += dx;
            t.xi_before += dx;
        }
        p
    }

    /// Rows `(event_index, t, xi, state, event_type)`: the start, every
    /// event and the terminal point.
    pub fn csv_rows(&self) -> Vec<(usize, f64, f64, usize, &'static str)> {
        let mut rows = Vec::with_capacity(self.events.len() + 2);
        if let Some(s) = self.segments.first() {
            rows.push((0, s.t_start, s.xi_start, s.state, "start"));
        }
        for (k, e) in self.events.iter().enumerate() {
            let kind = match e.kind {
                EventKind::CpJump => "cp_jump",
                EventKind::Switch => "switch",
            };
            rows.push((k + 1, e.t, e.xi_after, e.to, kind));
        }
        if let Some(t) = &self.terminal {
            rows.push((self.events.len() + 1, t.t, t.xi, t.state, "terminal"));
        }
        rows
    }
}

/// Visitor that records every segment and event.
#[derive(Debug, Default)]
pub struct PathRecorder {
    path: MapPath,
}

impl PathVisitor for PathRecorder {
    fn segment(&mut self, t0: f64, _t1: f64, xi0: f64, drift: f64, state: usize) {
        self.path.segments.push(Segment { t_start: t0, xi_start: xi0, state, drift });
    }

    fn event(&mut self, ev: &Event) {
        self.path.events.push(*ev);
    }
}

impl Default for MapPath {
    fn default() -> Self {
        MapPath { segments: vec![], events: vec![], terminal: None }
    }
}

/// Simulate and store one path. A truncated run returns the partial path
/// inside the error.
pub fn simulate_map<R: Rng + ?Sized>(spec: &MapSpec, x0: f64, i0: usize, stop: StopRule, rng: &mut R) -> Result<MapPath> {
    simulate_with(&MapSimulator::new(spec)?, x0, i0, stop, rng)
}

pub fn simulate_with<R: Rng + ?Sized>(
    sim: &MapSimulator,
    x0: f64,
    i0: usize,
    stop: StopRule,
    rng: &mut R,
) -> Result<MapPath> {
    let mut rec = PathRecorder::default();
    match sim.run(x0, i0, stop, rng, &mut rec) {
        Ok(term) => {
            rec.path.terminal = Some(term);
            Ok(rec.path)
        }
        Err(Error::Truncated { events, .. }) => Err(Error::Truncated { events, partial: Some(Box::new(rec.path)) }),
        Err(e) => Err(e),
    }
}
