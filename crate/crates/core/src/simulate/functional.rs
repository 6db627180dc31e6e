//! Exponential functional `I = ∫_0^∞ e^{αξ(s)} ds` of a MAP drifting to −∞.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{MapSimulator, PathVisitor, StopRule};
use crate::error::{Error, Result};
use crate::map::SpectralData;
use crate::stats::CompensatedSum;

/// `∫_0^τ e^{α(a + b s)} ds`, exact for every sign of `b`.
pub fn linear_piece_integral(alpha: f64, a: f64, b: f64, tau: f64) -> f64 {
    let rate = alpha * b;
    let scale = (alpha * a).exp();
    if rate == 0.0 {
        scale * tau
    } else {
        scale * (rate * tau).exp_m1() / rate
    }
}

/// Accumulates `∫ e^{αξ}` over the visited segments.
#[derive(Debug, Clone, Default)]
pub struct ExpIntegral {
    pub alpha: f64,
    sum: CompensatedSum,
}

impl ExpIntegral {
    pub fn new(alpha: f64) -> Self {
        ExpIntegral { alpha, sum: CompensatedSum::default() }
    }

    pub fn value(&self) -> f64 {
        self.sum.value()
    }
}

impl PathVisitor for ExpIntegral {
    fn segment(&mut self, t0: f64, t1: f64, xi0: f64, drift: f64, _state: usize) {
        self.sum.add(linear_piece_integral(self.alpha, xi0, drift, t1 - t0));
    }
}

/// Truncated exponential functional of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFunctional {
    /// `∫_0^T e^{αξ}` up to the first time `T` that ξ drops below `−L`
    pub value: f64,
    /// the unaccumulated remainder is `remainder_scale · Ĩ` with `Ĩ` an
    /// independent copy of `I` started from `(0, terminal_state)`
    pub remainder_scale: f64,
    pub terminal_state: usize,
    pub terminal_xi: f64,
}

impl ExpFunctional {
    /// Approximate `P(remainder > delta)` from a power tail
    /// `P(Ĩ > t) ≈ amplitude · t^{-exponent}`.
    pub fn remainder_exceedance(&self, delta: f64, exponent: f64, amplitude: f64) -> f64 {
        (amplitude * (delta / self.remainder_scale).powf(-exponent)).min(1.0)
    }
}

/// Simulate from `(x0, i0)` until `ξ < −L` and accumulate `∫ e^{αξ}` exactly
/// on each linear piece. Jumps contribute nothing.
pub fn exp_functional<R: Rng + ?Sized>(
    sim: &MapSimulator,
    x0: f64,
    i0: usize,
    alpha: f64,
    trunc_level: f64,
    rng: &mut R,
) -> Result<ExpFunctional> {
    if !(alpha > 0.0) || !(trunc_level > 0.0) {
        return Err(Error::Domain(format!("need alpha > 0 and L > 0, got {alpha}, {trunc_level}")));
    }
    if !(-trunc_level < x0) {
        return Err(Error::Domain(format!("start {x0} already below -L = {}", -trunc_level)));
    }
    let mut acc = ExpIntegral::new(alpha);
    let term = sim.run(x0, i0, StopRule::XiBelow(-trunc_level), rng, &mut acc)?;
    Ok(ExpFunctional {
        value: acc.value(),
        remainder_scale: (alpha * term.xi).exp(),
        terminal_state: term.state,
        terminal_xi: term.xi,
    })
}

/// `E_{0,i}[I^k]` for `k = 1..=k_max` through
/// `M(k) = k (−F(αk))^{-1} M(k−1)`, `M(0) = 1`.
pub fn moment_recursion(sd: &SpectralData, alpha: f64, k_max: usize) -> Result<Vec<DVector<f64>>> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let n = sd.n_states();
    let mut m = DVector::from_element(n, 1.0);
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let z = alpha * k as f64;
        let (dlo, dhi) = sd.domain();
        if !(z > dlo && z < dhi) {
            return Err(Error::MomentDoesNotExist { order: k, z, chi: f64::INFINITY });
        }
        let chi = sd.chi(z)?;
        if chi >= 0.0 {
            return Err(Error::MomentDoesNotExist { order: k, z, chi });
        }
        let neg_f: DMatrix<f64> = -sd.exponent().eval(z)?;
        let sol = neg_f.lu().solve(&m).ok_or_else(|| Error::Numerical(format!("F({z}) singular")))?;
        m = sol * k as f64;
        out.push(m.clone());
    }
    Ok(out)
}
