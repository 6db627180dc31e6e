//! Lamperti–Kiu time change: `X_t = sign(J(φ(t))) e^{ξ(φ(t))}` where `φ`
//! inverts the clock `A(s) = ∫_0^s e^{αξ(u)} du`.

use super::functional::linear_piece_integral;
use super::kernel::{Event, PathVisitor};
use super::path::MapPath;
use crate::error::{Error, Result};

/// Self-similar process built from a stored MAP path.
#[derive(Debug, Clone)]
pub struct LampertiKiu<'a> {
    path: &'a MapPath,
    alpha: f64,
    /// sign attached to each modulator state
    signs: Vec<f64>,
    /// clock value at the start of each segment, plus the final value
    clock: Vec<f64>,
}

impl<'a> LampertiKiu<'a> {
    /// `signs[i]` is the sign of `X` while the chain is in state `i`.
    pub fn new(path: &'a MapPath, alpha: f64, signs: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if path.segments.is_empty() {
            return Err(Error::Domain("empty path".into()));
        }
        let mut clock = Vec::with_capacity(path.segments.len() + 1);
        let mut a = 0.0;
        clock.push(0.0);
        let end = path.end_time();
        for (k, seg) in path.segments.iter().enumerate() {
            let t1 = path.segments.get(k + 1).map_or(end, |s| s.t_start);
            a += linear_piece_integral(alpha, seg.xi_start, seg.drift, t1 - seg.t_start);
            clock.push(a);
        }
        Ok(LampertiKiu { path, alpha, signs, clock })
    }

    /// Two-state convention: state 0 is the positive half-line.
    pub fn two_sided(path: &'a MapPath, alpha: f64) -> Result<Self> {
        Self::new(path, alpha, vec![1.0, -1.0])
    }

    pub fn clock_end(&self) -> f64 {
        *self.clock.last().expect("non-empty")
    }

    /// `A(s)`.
    pub fn clock_at(&self, s: f64) -> Result<f64> {
        let k = self
            .path
            .segment_at(s)
            .ok_or(Error::BeyondHorizon { t: s, clock_end: self.path.end_time() })?;
        let seg = &self.path.segments[k];
        Ok(self.clock[k] + linear_piece_integral(self.alpha, seg.xi_start, seg.drift, s - seg.t_start))
    }

    /// `φ(t)`, the MAP time at which the clock reaches `t`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t >= self.clock_end() {
            return Err(Error::BeyondHorizon { t, clock_end: self.clock_end() });
        }
        // last segment whose starting clock is <= t
        let k = self.clock[..self.path.segments.len()].partition_point(|c| *c <= t) - 1;
        let seg = &self.path.segments[k];
        let rem = t - self.clock[k];
        let rate = self.alpha * seg.drift;
        let tau = if rate == 0.0 {
            rem * (-self.alpha * seg.xi_start).exp()
        } else {
            (rate * rem * (-self.alpha * seg.xi_start).exp()).ln_1p() / rate
        };
        Ok(seg.t_start + tau)
    }

    /// `X_t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let s = self.phi(t)?;
        let (xi, state) = self.path.at(s).ok_or(Error::BeyondHorizon { t, clock_end: self.clock_end() })?;
        Ok(self.signs[state] * xi.exp())
    }
}

/// Where a streamed path stood when its clock reached the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockHit {
    /// MAP time `φ(t)`
    pub s: f64,
    pub xi: f64,
    pub state: usize,
    /// `max ξ` over MAP times `[0, φ(t)]`
    pub max_xi: f64,
    /// `min ξ` over MAP times `[0, φ(t)]`
    pub min_xi: f64,
}

/// Visitor that locates the MAP time at which `A(s) = ∫_0^s e^{αξ}` reaches
/// `target`, without storing the path.
#[derive(Debug, Clone)]
pub struct ClockProbe {
    pub alpha: f64,
    pub target: f64,
    /// end the run as soon as the target is reached
    pub stop_on_hit: bool,
    clock: f64,
    max_xi: f64,
    min_xi: f64,
    hit: Option<ClockHit>,
}

impl ClockProbe {
    pub fn new(alpha: f64, target: f64, stop_on_hit: bool) -> Self {
        ClockProbe {
            alpha,
            target,
            stop_on_hit,
            clock: 0.0,
            max_xi: f64::NEG_INFINITY,
            min_xi: f64::INFINITY,
            hit: None,
        }
    }

    pub fn hit(&self) -> Option<ClockHit> {
        self.hit
    }

    /// Clock accumulated so far (frozen once the target is reached).
    pub fn clock(&self) -> f64 {
        self.clock
    }
}

impl PathVisitor for ClockProbe {
    fn segment(&mut self, t0: f64, t1: f64, xi0: f64, drift: f64, state: usize) {
        if self.hit.is_some() {
            return;
        }
        self.max_xi = self.max_xi.max(xi0);
        self.min_xi = self.min_xi.min(xi0);
        let inc = linear_piece_integral(self.alpha, xi0, drift, t1 - t0);
        if self.clock + inc >= self.target {
            let rem = self.target - self.clock;
            let rate = self.alpha * drift;
            let scaled = rem * (-self.alpha * xi0).exp();
            let tau = if rate == 0.0 { scaled } else { (rate * scaled).ln_1p() / rate };
            let tau = tau.clamp(0.0, t1 - t0);
            let xi = xi0 + drift * tau;
            self.clock = self.target;
            self.hit = Some(ClockHit {
                s: t0 + tau,
                xi,
                state,
                max_xi: self.max_xi.max(xi),
                min_xi: self.min_xi.min(xi),
            });
        } else {
            self.clock += inc;
            let end = xi0 + drift * (t1 - t0);
            self.max_xi = self.max_xi.max(end);
            self.min_xi = self.min_xi.min(end);
        }
    }

    fn event(&mut self, ev: &Event) {
        if self.hit.is_none() {
            self.max_xi = self.max_xi.max(ev.xi_after);
            self.min_xi = self.min_xi.min(ev.xi_after);
        }
    }

    fn done(&self) -> bool {
        self.stop_on_hit && self.hit.is_some()
    }
}
