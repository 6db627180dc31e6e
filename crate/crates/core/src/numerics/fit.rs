//! Least-squares power-law fits on log-log scale.

use crate::error::{Error, Result};

/// Fit `p ≈ amplitude · t^(-exponent)`; returns `(exponent, amplitude)`.
pub fn power_tail_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::Domain(format!("power_tail_fit needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(t, p)| !(t > 0.0) || !(p > 0.0)) {
        return Err(Error::Domain("power_tail_fit needs t > 0 and p > 0".into()));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Domain("power_tail_fit needs strictly increasing t".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numerical("degenerate design: all t equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok((-slope, intercept.exp()))
}
