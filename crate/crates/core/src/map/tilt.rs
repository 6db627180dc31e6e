//! Esscher change of measure and the associated Wald martingale.

use nalgebra::{DMatrix, DVector};

use super::spec::{LevyComponent, MapSpec};
use super::spectral::{leading_eigen, stationary, SpectralData};
use crate::error::{Error, Result};

/// χ(γ) and v(γ), precomputed for repeated weight evaluations.
#[derive(Debug, Clone)]
pub struct TiltData {
    pub gamma: f64,
    pub chi: f64,
    pub v: DVector<f64>,
}

impl TiltData {
    pub fn new(sd: &SpectralData, gamma: f64) -> Result<Self> {
        let (chi, v) = sd.eigen(gamma)?;
        Ok(TiltData { gamma, chi, v })
    }

    /// `e^{γ(xt−x0) − χ(γ)t} · v_{jt}(γ) / v_{i0}(γ)`.
    pub fn weight(&self, x0: f64, i0: usize, xt: f64, jt: usize, t: f64) -> f64 {
        (self.gamma * (xt - x0) - self.chi * t).exp() * self.v[jt] / self.v[i0]
    }
}

/// Wald martingale value of a path segment from `(x0, i0)` at time 0 to
/// `(xt, jt)` at time `t`.
pub fn wald_weight(x0: f64, i0: usize, xt: f64, jt: usize, t: f64, gamma: f64, sd: &SpectralData) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("wald_weight needs t >= 0, got {t}")));
    }
    Ok(TiltData::new(sd, gamma)?.weight(x0, i0, xt, jt, t))
}

/// Concrete MAP whose matrix exponent is `Δ_v⁻¹ F(z+γ) Δ_v − χ(γ) I`.
/// Also returns the largest entrywise deviation from that identity on a grid
/// of `z` values.
pub fn esscher_spec(spec: &MapSpec, gamma: f64) -> Result<(MapSpec, f64)> {
    let (dlo, dhi) = spec.domain();
    if !(gamma > dlo && gamma < dhi) {
        return Err(Error::Domain(format!("tilt parameter {gamma} outside the exponent domain ({dlo}, {dhi})")));
    }
    if gamma == 0.0 {
        return Ok((spec.clone(), 0.0));
    }
    let n = spec.n_states();
    let pi = stationary(spec.q())?;
    let f_gamma = spec.matrix_exponent(gamma)?;
    let (chi, v) = leading_eigen(&f_gamma, &pi)?;

    let mut components = Vec::with_capacity(n);
    for c in spec.components() {
        let tilted_jump = if c.cp_rate > 0.0 { c.cp_jump.tilt(gamma)? } else { c.cp_jump.clone() };
        let rate = if c.cp_rate > 0.0 { c.cp_rate * c.cp_jump.transform(gamma)? } else { 0.0 };
        components.push(LevyComponent {
            drift: c.drift + c.gaussian_sd * c.gaussian_sd * gamma,
            gaussian_sd: c.gaussian_sd,
            cp_rate: rate,
            cp_jump: tilted_jump,
        });
    }
    let mut q = DMatrix::zeros(n, n);
    let mut switch = vec![vec![crate::map::JumpLaw::zero(); n]; n];
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            if i != j && spec.q()[(i, j)] > 0.0 {
                let law = spec.switch_law(i, j);
                q[(i, j)] = spec.q()[(i, j)] * law.transform(gamma)? * v[j] / v[i];
                switch[i][j] = law.tilt(gamma)?;
                row += q[(i, j)];
            }
        }
        q[(i, i)] = -row;
    }
    let tilted = MapSpec::new(q, components, Some(switch))?;

    // entrywise check of the conjugation identity
    let (tlo, thi) = tilted.domain();
    let lo = tlo.max(-5.0);
    let hi = thi.min(5.0);
    let pad = 0.01 * (hi - lo);
    let mut check: f64 = 0.0;
    for k in 0..=20 {
        let z = lo + pad + (hi - lo - 2.0 * pad) * k as f64 / 20.0;
        let ft = tilted.matrix_exponent(z)?;
        let f = spec.matrix_exponent(z + gamma)?;
        for i in 0..n {
            for j in 0..n {
                let target = f[(i, j)] * v[j] / v[i] - if i == j { chi } else { 0.0 };
                check = check.max((ft[(i, j)] - target).abs());
            }
        }
    }
    Ok((tilted, check))
}
