//! Power-law tail of the absorption time `τ0`.

use serde::{Deserialize, Serialize};

use super::model::{ConditionedModel, Mode};
use super::residual::ResidualPool;
use super::time_limit::ratio_of;
use crate::error::{Error, Result};
use crate::numerics::power_tail_fit;
use crate::stats::{EstimateReport, Summary};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailOptions {
    /// upper survival level of the fitting window
    pub p_high: f64,
    /// the window ends where this many samples still exceed `t`
    pub min_exceedances: usize,
    pub grid_points: usize,
    /// exceedances at the point where start amplitudes are compared
    pub ratio_exceedances: usize,
    /// allowed absolute error of the fitted exponent
    pub exponent_tol: f64,
    /// allowed relative change of the fractional moment when `n` doubles
    pub moment_tol: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            p_high: 0.1,
            min_exceedances: 1000,
            grid_points: 24,
            ratio_exceedances: 5000,
            exponent_tol: 0.05,
            moment_tol: 0.05,
        }
    }
}

/// Empirical survival curve of `τ0` from one start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailCurve {
    pub x: f64,
    pub state: usize,
    /// `(t, P_x(τ0 > t))`
    pub points: Vec<(f64, f64)>,
    pub exponent: f64,
    pub amplitude: f64,
    /// amplitude with the exponent pinned at `θ/α`, upper half of the window
    pub pinned_amplitude: f64,
    /// amplitude from the constant `Σ_j π^θ_j E_{0,j}[I^{θ/α−1}] / (μ |α−θ| v_j)`
    /// under `μ = χ'(θ)` and under the extended drift formula
    pub predicted_amplitude: [f64; 2],
    /// amplitude with `α μ` (implicit renewal normalization) in place of
    /// `μ |α−θ|`, `μ = χ'(θ)`
    pub predicted_amplitude_renewal: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    pub theta: f64,
    pub alpha: f64,
    /// θ/α
    pub target_exponent: f64,
    pub curves: Vec<TailCurve>,
    /// `E_{0,j}[I^{θ/α−1}]` on the full pool and on its first half
    pub fractional_moments: Vec<(Summary, Summary)>,
    /// `[χ'(θ), extended formula]`
    pub mu_candidates: [f64; 2],
    pub checks: Vec<EstimateReport>,
}

impl TailReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EstimateReport::passed)
    }
}

fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
}

/// Fit `P_x(τ0 > t) ≈ A t^{−κ}` for each start and compare `κ` with `θ/α`,
/// the amplitude with the closed-form constant, and amplitude ratios between
/// the first start and each other start with `h(x)/h(y)`.
///
/// The amplitude comparisons are reported without a verdict.
pub fn tau0_tail_check(model: &ConditionedModel, starts: &[f64], pool: &ResidualPool, opts: TailOptions) -> Result<TailReport> {
    if model.mode != Mode::Avoid {
        return Err(Error::Domain("tail law needs theta > 0".into()));
    }
    if starts.is_empty() {
        return Err(Error::Domain("need at least one start".into()));
    }
    let (theta, alpha) = (model.theta, model.alpha);
    let kappa = theta / alpha;
    let sd = &model.spectral;
    let n_states = sd.n_states();

    let fractional_moments: Vec<(Summary, Summary)> = (0..n_states)
        .map(|j| {
            let n = pool.len(j);
            (pool.moment(j, kappa - 1.0, n), pool.moment(j, kappa - 1.0, n / 2))
        })
        .collect();
    let mu_candidates = [sd.chi_prime_theta, sd.mu_theta_full()?];
    // Σ_j π^θ_j E_{0,j}[I^{κ−1}] / v_j(θ), before dividing by μ |α − θ|
    let weighted: f64 = (0..n_states)
        .map(|j| sd.pi_theta[j] * fractional_moments[j].0.mean / sd.v_theta[j])
        .sum();

    let mut checks = vec![];
    let mut curves = vec![];
    for &x in starts {
        let state = model.state_of(x)?;
        let scale = x.abs().powf(alpha);
        let n = pool.len(state) as f64;
        let p_low = opts.min_exceedances as f64 / n;
        if !(p_low < opts.p_high) {
            return Err(Error::Domain(format!("pool of {n} samples too small for the fitting window")));
        }
        let t_lo = scale * pool.quantile(state, 1.0 - opts.p_high);
        let t_hi = scale * pool.quantile(state, 1.0 - p_low);
        let points: Vec<(f64, f64)> = log_grid(t_lo, t_hi, opts.grid_points)
            .into_iter()
            .map(|t| (t, pool.survival(state, x.abs(), t).mean))
            .collect();
        let (exponent, amplitude) = power_tail_fit(&points)?;
        let upper = &points[points.len() / 2..];
        let pinned_amplitude = upper.iter().map(|(t, p)| p * t.powf(kappa)).sum::<f64>() / upper.len() as f64;
        let prefactor = model.h_state(state, x.abs()) * weighted / (alpha - theta).abs();
        let predicted_amplitude = [prefactor / mu_candidates[0], prefactor / mu_candidates[1]];
        let predicted_amplitude_renewal = predicted_amplitude[0] * (alpha - theta).abs() / alpha;
        checks.push(
            EstimateReport::exact(format!("tail_exponent x={x}"), exponent).judge(kappa, 0.0, opts.exponent_tol),
        );
        curves.push(TailCurve {
            x,
            state,
            points,
            exponent,
            amplitude,
            pinned_amplitude,
            predicted_amplitude,
            predicted_amplitude_renewal,
        });
    }
    for (j, (full, half)) in fractional_moments.iter().enumerate() {
        checks.push(
            EstimateReport::new(format!("fractional_moment_doubling state={j}"), *full, pool.seed)
                .judge(half.mean, 0.0, opts.moment_tol * full.mean.abs()),
        );
    }
    let x = starts[0];
    let ix = model.state_of(x)?;
    for &y in &starts[1..] {
        let iy = model.state_of(y)?;
        // compare where the sparser of the two curves still has enough samples
        let q = 1.0 - opts.ratio_exceedances as f64 / pool.len(ix).min(pool.len(iy)) as f64;
        let t_star = (x.abs().powf(alpha) * pool.quantile(ix, q)).min(y.abs().powf(alpha) * pool.quantile(iy, q));
        let r = ratio_of(&pool.survival(ix, x.abs(), t_star), &pool.survival(iy, y.abs(), t_star));
        let target = model.h(x)? / model.h(y)?;
        checks.push(EstimateReport::new(format!("amplitude_ratio x={x} y={y} t={t_star:.4e}"), r, pool.seed).judge(target, 3.0, 0.0));
    }
    Ok(TailReport { theta, alpha, target_exponent: kappa, curves, fractional_moments, mu_candidates, checks })
}
