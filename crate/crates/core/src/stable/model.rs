//! Strictly stable processes viewed through their Lamperti–Kiu MAP.
//!
//! States are ordered `(+, −)`: index 0 is the positive half-line.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{leading_eigen, spectral_data_at, stationary, MatrixExponent, SpectralData};
use crate::numerics::{log_gamma, reciprocal_reflection};

/// Index `alpha` and positivity parameter `rho = P(X_1 > 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableParams {
    pub alpha: f64,
    pub rho: f64,
}

impl StableParams {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        let p = StableParams { alpha, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let StableParams { alpha, rho } = *self;
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidSpec(format!("alpha must lie in (0,2), got {alpha}")));
        }
        let (a, b) = (alpha * rho, alpha * (1.0 - rho));
        if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "need alpha*rho and alpha*(1-rho) in (0,1) (jumps of both signs), got {a} and {b}"
            )));
        }
        Ok(())
    }

    pub fn rho_hat(&self) -> f64 {
        1.0 - self.rho
    }

    /// `sin(π α ρ)`
    pub fn sin_a_rho(&self) -> f64 {
        (PI * self.alpha * self.rho).sin()
    }

    /// `sin(π α ρ̂)`
    pub fn sin_a_rho_hat(&self) -> f64 {
        (PI * self.alpha * self.rho_hat()).sin()
    }

    pub fn theta(&self) -> f64 {
        self.alpha - 1.0
    }

    /// Stationary law of the sign chain, `∝ (sin παρ, sin παρ̂)`.
    pub fn sign_stationary(&self) -> DVector<f64> {
        let (a, b) = (self.sin_a_rho(), self.sin_a_rho_hat());
        DVector::from_vec(vec![a / (a + b), b / (a + b)])
    }

    /// Eigenvector at `α−1`, `∝ (sin παρ̂, sin παρ)` with `π·v = 1`.
    pub fn v_theta(&self) -> DVector<f64> {
        let v = DVector::from_vec(vec![self.sin_a_rho_hat(), self.sin_a_rho()]);
        let s = self.sign_stationary().dot(&v);
        v / s
    }

    /// Lévy density constants: `ν(dx) = c₊ x^{-1-α} dx` on `x > 0` and
    /// `c₋ |x|^{-1-α} dx` on `x < 0`.
    pub fn levy_constants(&self) -> (f64, f64) {
        let g = log_gamma(1.0 + self.alpha).expect("alpha > 0").exp() / PI;
        (g * self.sin_a_rho(), g * self.sin_a_rho_hat())
    }
}

/// `Γ(a−z)Γ(1+z)`-type prefactor via log-gamma; both arguments must be positive.
fn gamma_pair(x: f64, y: f64) -> Result<f64> {
    Ok((log_gamma(x)? + log_gamma(y)?).exp())
}

/// Matrix exponent of the MAP underlying the stable process, `z ∈ (−1, α)`.
pub fn stable_f(params: &StableParams, z: f64) -> Result<DMatrix<f64>> {
    params.validate()?;
    let a = params.alpha;
    if !(z > -1.0 && z < a) {
        return Err(Error::Domain(format!("stable exponent needs z in (-1, {a}), got {z}")));
    }
    let g = gamma_pair(a - z, 1.0 + z)?;
    let (ar, arh) = (a * params.rho, a * params.rho_hat());
    Ok(DMatrix::from_row_slice(
        2,
        2,
        &[
            -g * reciprocal_reflection(arh - z),
            g * reciprocal_reflection(arh),
            g * reciprocal_reflection(ar),
            -g * reciprocal_reflection(ar - z),
        ],
    ))
}

/// Matrix exponent of the stable process conditioned through the h-transform
/// (the Riesz–Bogdan–Żak dual), `z ∈ (−α, 1)`.
pub fn rbz_f(params: &StableParams, z: f64) -> Result<DMatrix<f64>> {
    params.validate()?;
    let a = params.alpha;
    if !(z > -a && z < 1.0) {
        return Err(Error::Domain(format!("dual stable exponent needs z in (-{a}, 1), got {z}")));
    }
    let g = gamma_pair(1.0 - z, a + z)?;
    let (ar, arh) = (a * params.rho, a * params.rho_hat());
    // 1/(Γ(1−w−z)Γ(w+z)) = sin(π(w+z))/π
    Ok(DMatrix::from_row_slice(
        2,
        2,
        &[
            -g * reciprocal_reflection(ar + z),
            g * reciprocal_reflection(ar),
            g * reciprocal_reflection(arh),
            -g * reciprocal_reflection(arh + z),
        ],
    ))
}

impl MatrixExponent for StableParams {
    fn n_states(&self) -> usize {
        2
    }

    fn domain(&self) -> (f64, f64) {
        (-1.0, self.alpha)
    }

    fn eval(&self, z: f64) -> Result<DMatrix<f64>> {
        stable_f(self, z)
    }
}

/// The dual exponent as a standalone [`MatrixExponent`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbzExponent(pub StableParams);

impl MatrixExponent for RbzExponent {
    fn n_states(&self) -> usize {
        2
    }

    fn domain(&self) -> (f64, f64) {
        (-self.0.alpha, 1.0)
    }

    fn eval(&self, z: f64) -> Result<DMatrix<f64>> {
        rbz_f(&self.0, z)
    }
}

/// Spectral data with `θ = α − 1` and the closed-form eigenvector, checked
/// against a numerical eigen-solve.
pub fn stable_spectral(params: &StableParams) -> Result<SpectralData> {
    params.validate()?;
    if params.alpha == 1.0 {
        return Err(Error::NoCramerRoot(
            "alpha = 1 has theta = 0; use stable_h, which is identically 1 in this case".into(),
        ));
    }
    let mut sd = spectral_data_at(Arc::new(*params), params.theta())?;
    let closed = params.v_theta();
    let angle = vector_angle(&closed, &sd.v_theta);
    if angle > 1e-8 {
        return Err(Error::Numerical(format!("closed-form eigenvector off by angle {angle}")));
    }
    sd.v_theta = closed;
    Ok(sd)
}

/// Angle between two vectors, computed stably.
pub fn vector_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let an = a / a.norm();
    let bn = b / b.norm();
    (&an - &bn).norm().atan2((&an + &bn).norm()) * 2.0
}

/// `h(x) = v_{sign x}(α−1) |x|^{α−1}`, identically 1 when `α = 1`.
pub fn stable_h(params: &StableParams, x: f64) -> Result<f64> {
    params.validate()?;
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("h needs finite x != 0, got {x}")));
    }
    if params.alpha == 1.0 {
        return Ok(1.0);
    }
    let v = params.v_theta();
    let vi = if x > 0.0 { v[0] } else { v[1] };
    Ok(vi * x.abs().powf(params.theta()))
}

/// Check that the closed-form stationary law agrees with the generator.
pub fn stationary_matches(params: &StableParams) -> Result<f64> {
    let pi = stationary(&stable_f(params, 0.0)?)?;
    Ok((pi - params.sign_stationary()).amax())
}

/// `|χ(α−1)|` and the eigenvector angle from a numerical eigen-solve.
pub fn spectral_residuals(params: &StableParams) -> Result<(f64, f64)> {
    let f = stable_f(params, params.theta())?;
    let (chi, v) = leading_eigen(&f, &params.sign_stationary())?;
    Ok((chi.abs(), vector_angle(&v, &params.v_theta())))
}
