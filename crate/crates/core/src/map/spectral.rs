//! Perron–Frobenius data of a matrix exponent: leading eigenvalue `χ(z)`,
//! its eigenvector `v(z)` normalized by `π·v = 1`, and the Cramér root.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::spec::MapSpec;
use crate::error::{Error, Result};
use crate::numerics::find_root;

/// Anything that can evaluate a matrix exponent `F(z)` on an open interval.
pub trait MatrixExponent: Send + Sync {
    fn n_states(&self) -> usize;
    /// Open interval of real `z` where `F(z)` is finite.
    fn domain(&self) -> (f64, f64);
    fn eval(&self, z: f64) -> Result<DMatrix<f64>>;
}

impl MatrixExponent for MapSpec {
    fn n_states(&self) -> usize {
        MapSpec::n_states(self)
    }

    fn domain(&self) -> (f64, f64) {
        MapSpec::domain(self)
    }

    fn eval(&self, z: f64) -> Result<DMatrix<f64>> {
        self.matrix_exponent(z)
    }
}

/// Stationary distribution of an irreducible generator.
pub fn stationary(q: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = q.nrows();
    if n == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    // π Q = 0 with the last balance equation replaced by Σπ = 1
    let mut a = q.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular system for the stationary distribution".into()))?;
    if pi.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Numerical(format!("stationary distribution not positive: {pi:?}")));
    }
    Ok(pi)
}

/// Eigenvalue of maximal real part of a Metzler matrix and its positive
/// eigenvector scaled so that `π·v = 1`.
pub fn leading_eigen(m: &DMatrix<f64>, pi: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    let n = m.nrows();
    let (chi, mut v) = match n {
        1 => (m[(0, 0)], DVector::from_element(1, 1.0)),
        2 => leading_eigen_2x2(m)?,
        _ => leading_eigen_iterative(m)?,
    };
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Numerical(format!("leading eigenvector not strictly positive (reducible?): {v:?}")));
    }
    let s = pi.dot(&v);
    v /= s;
    Ok((chi, v))
}

fn leading_eigen_2x2(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    if !(b > 0.0 && c > 0.0) {
        return Err(Error::Numerical(format!("2x2 exponent has a zero off-diagonal ({b}, {c}): reducible")));
    }
    let h = 0.5 * (a - d);
    let r = (h * h + b * c).sqrt();
    // χ - a and χ - d, each computed without cancellation
    let (above_a, above_d) = if h >= 0.0 { (b * c / (h + r), h + r) } else { (r - h, b * c / (r - h)) };
    let chi = if h >= 0.0 { a + above_a } else { d + above_d };
    // second component from whichever row is better conditioned
    let ratio = if above_a >= above_d { above_a / b } else { c / above_d };
    Ok((chi, DVector::from_vec(vec![1.0, ratio])))
}

fn leading_eigen_iterative(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = m.nrows();
    let scale = m.amax().max(1.0);
    // a row-sum bound dominates χ for Metzler matrices
    let bound = (0..n).map(|i| m.row(i).sum()).fold(f64::NEG_INFINITY, f64::max);
    let mut sigma = bound + scale;
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut chi = bound;
    let eye = DMatrix::<f64>::identity(n, n);
    for iter in 0..2000 {
        let lu = (&eye * sigma - m).lu();
        let w = lu.solve(&v).ok_or_else(|| Error::Numerical("singular shifted matrix".into()))?;
        let mu = w.dot(&v) / v.dot(&v);
        let new_chi = sigma - 1.0 / mu;
        let mut nv = &w / w.norm();
        if nv.sum() < 0.0 {
            nv = -nv;
        }
        let dv = (&nv - &v).amax();
        let dchi = (new_chi - chi).abs();
        v = nv;
        chi = new_chi;
        let resid = (m * &v - &v * chi).amax();
        if dv < 1e-13 && dchi <= 1e-12 * scale && resid <= 1e-10 * scale {
            return Ok((chi, v));
        }
        // pull the shift towards χ once the estimate settles
        if iter >= 3 && dchi < 1e-2 * scale {
            sigma = chi + 1e-3 * scale;
        }
    }
    Err(Error::Numerical("leading eigenvalue iteration did not converge".into()))
}

/// Spectral summary of a MAP (or any matrix exponent).
#[derive(Clone)]
pub struct SpectralData {
    exponent: Arc<dyn MatrixExponent>,
    pub pi: DVector<f64>,
    pub theta: f64,
    pub v_theta: DVector<f64>,
    /// stationary law of the chain tilted at θ
    pub pi_theta: DVector<f64>,
    pub chi_prime_0: f64,
    pub chi_prime_theta: f64,
}

impl fmt::Debug for SpectralData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralData")
            .field("theta", &self.theta)
            .field("pi", &self.pi.as_slice())
            .field("v_theta", &self.v_theta.as_slice())
            .field("pi_theta", &self.pi_theta.as_slice())
            .field("chi_prime_0", &self.chi_prime_0)
            .field("chi_prime_theta", &self.chi_prime_theta)
            .finish()
    }
}

/// Finite-difference step for χ' and v'.
const FD_STEP: f64 = 1e-5;

fn richardson<G: Fn(f64) -> Result<T>, T>(g: G, z: f64, combine: impl Fn(T, T, f64) -> T, mix: impl Fn(T, T) -> T) -> Result<T> {
    let d1 = combine(g(z + FD_STEP)?, g(z - FD_STEP)?, 2.0 * FD_STEP);
    let h2 = 0.5 * FD_STEP;
    let d2 = combine(g(z + h2)?, g(z - h2)?, 2.0 * h2);
    Ok(mix(d2, d1))
}

impl SpectralData {
    pub fn n_states(&self) -> usize {
        self.exponent.n_states()
    }

    pub fn exponent(&self) -> &Arc<dyn MatrixExponent> {
        &self.exponent
    }

    pub fn domain(&self) -> (f64, f64) {
        self.exponent.domain()
    }

    /// `(χ(z), v(z))`.
    pub fn eigen(&self, z: f64) -> Result<(f64, DVector<f64>)> {
        leading_eigen(&self.exponent.eval(z)?, &self.pi)
    }

    pub fn chi(&self, z: f64) -> Result<f64> {
        Ok(self.eigen(z)?.0)
    }

    pub fn v(&self, z: f64) -> Result<DVector<f64>> {
        Ok(self.eigen(z)?.1)
    }

    /// χ'(z) by Richardson-extrapolated central differences.
    pub fn chi_prime(&self, z: f64) -> Result<f64> {
        chi_prime(self.exponent.as_ref(), &self.pi, z)
    }

    /// v'(z) by Richardson-extrapolated central differences.
    pub fn v_prime(&self, z: f64) -> Result<DVector<f64>> {
        richardson(|x| self.v(x), z, |a, b, h| (a - b) / h, |fine, coarse| (&fine * 4.0 - coarse) / 3.0)
    }

    /// Generator of the chain under the tilt at `gamma`:
    /// `Δ_v⁻¹ F(γ) Δ_v − χ(γ) I`.
    pub fn tilted_generator(&self, gamma: f64) -> Result<DMatrix<f64>> {
        let f = self.exponent.eval(gamma)?;
        let (chi, v) = leading_eigen(&f, &self.pi)?;
        let n = f.nrows();
        Ok(DMatrix::from_fn(n, n, |i, j| f[(i, j)] * v[j] / v[i] - if i == j { chi } else { 0.0 }))
    }

    /// Long-run drift under the θ-tilt by the extended formula
    /// `χ'(θ) + π^θ·k − π^θ (Q^θ − I)^{-1} k` with `k = v'(θ)`.
    pub fn mu_theta_full(&self) -> Result<f64> {
        let k = self.v_prime(self.theta)?;
        let qt = self.tilted_generator(self.theta)?;
        let n = qt.nrows();
        let a = qt - DMatrix::<f64>::identity(n, n);
        let sol = a.lu().solve(&k).ok_or_else(|| Error::Numerical("Q^θ − I singular".into()))?;
        Ok(self.chi_prime_theta + self.pi_theta.dot(&k) - self.pi_theta.dot(&sol))
    }
}

fn chi_prime(exp: &dyn MatrixExponent, pi: &DVector<f64>, z: f64) -> Result<f64> {
    let chi = |x: f64| -> Result<f64> { Ok(leading_eigen(&exp.eval(x)?, pi)?.0) };
    let d = richardson(chi, z, |a, b, h| (a - b) / h, |fine, coarse| (4.0 * fine - coarse) / 3.0)
        .map_err(|e| Error::Numerical(format!("χ' at {z} not available: {e}")))?;
    if !d.is_finite() {
        return Err(Error::Numerical(format!("χ'({z}) is not finite")));
    }
    Ok(d)
}

/// Locate the Cramér root inside `bracket` and assemble the spectral data.
pub fn spectral_data(exponent: Arc<dyn MatrixExponent>, bracket: (f64, f64)) -> Result<SpectralData> {
    let q = exponent.eval(0.0)?;
    let pi = stationary(&q)?;
    let (lo, hi) = bracket;
    let chi = |z: f64| leading_eigen(&exponent.eval(z)?, &pi).map(|p| p.0);
    let (c_lo, c_hi) = (chi(lo)?, chi(hi)?);
    if c_lo.signum() == c_hi.signum() && c_lo != 0.0 && c_hi != 0.0 {
        return Err(Error::NoRootInBracket { lo, hi, g_lo: c_lo, g_hi: c_hi });
    }
    let theta = find_root(|z| chi(z).unwrap_or(f64::NAN), lo, hi, 1e-14)?;
    finish(exponent, pi, theta)
}

/// Spectral data when θ is known in closed form.
pub fn spectral_data_at(exponent: Arc<dyn MatrixExponent>, theta: f64) -> Result<SpectralData> {
    let pi = stationary(&exponent.eval(0.0)?)?;
    finish(exponent, pi, theta)
}

fn finish(exponent: Arc<dyn MatrixExponent>, pi: DVector<f64>, theta: f64) -> Result<SpectralData> {
    if theta == 0.0 {
        return Err(Error::NoCramerRoot("root found at z = 0".into()));
    }
    let (_, v_theta) = leading_eigen(&exponent.eval(theta)?, &pi)?;
    let chi_prime_0 = chi_prime(exponent.as_ref(), &pi, 0.0)?;
    let chi_prime_theta = chi_prime(exponent.as_ref(), &pi, theta)?;
    let mut sd = SpectralData {
        exponent,
        pi,
        theta,
        v_theta,
        pi_theta: DVector::zeros(0),
        chi_prime_0,
        chi_prime_theta,
    };
    sd.pi_theta = stationary(&sd.tilted_generator(theta)?)?;
    Ok(sd)
}

/// Scan χ on a log-spaced grid away from 0 and return a bracket around the
/// first sign change, searching on the side opposite to the drift.
pub fn cramer_bracket(exponent: &dyn MatrixExponent) -> Result<(f64, f64)> {
    let pi = stationary(&exponent.eval(0.0)?)?;
    let slope = chi_prime(exponent, &pi, 0.0)?;
    if slope == 0.0 {
        return Err(Error::NoCramerRoot("χ'(0) = 0".into()));
    }
    let dir = -slope.signum();
    let (dlo, dhi) = exponent.domain();
    let edge = if dir > 0.0 { dhi } else { -dlo };
    let mut prev = 1e-4;
    let chi = |z: f64| leading_eigen(&exponent.eval(z)?, &pi).map(|p| p.0);
    let mut prev_val = chi(dir * prev)?;
    for k in 1..=400 {
        let r = 1e-4 * 10f64.powf(k as f64 * 0.025);
        let r = if r >= edge { 0.5 * (prev + edge) } else { r };
        if r > 1e4 || r - prev < 1e-15 * edge.min(1e4).max(1.0) {
            break;
        }
        let val = match chi(dir * r) {
            Ok(v) => v,
            Err(_) => break,
        };
        if val.signum() != prev_val.signum() {
            let (a, b) = (dir * prev, dir * r);
            return Ok((a.min(b), a.max(b)));
        }
        prev = r;
        prev_val = val;
    }
    Err(Error::NoCramerRoot("χ has no sign change on the scanned side of 0".into()))
}

/// Cramér bracket scan plus [`spectral_data`] in one call.
pub fn spectral_data_auto(exponent: Arc<dyn MatrixExponent>) -> Result<SpectralData> {
    let bracket = cramer_bracket(exponent.as_ref())?;
    spectral_data(exponent, bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::jump::JumpLaw;
    use crate::map::spec::LevyComponent;
    use proptest::prelude::*;

    /// Direct quadratic formula, no cancellation guards.
    fn naive_2x2(m: &DMatrix<f64>) -> (f64, f64) {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let tr = a + d;
        let det = a * d - b * c;
        let chi = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
        (chi, (chi - a) / b)
    }

    #[test]
    fn generator_gives_zero_and_ones() {
        let q = DMatrix::from_row_slice(3, 3, &[-1.0, 0.4, 0.6, 2.0, -3.0, 1.0, 0.5, 0.5, -1.0]);
        let pi = stationary(&q).unwrap();
        let (chi, v) = leading_eigen(&q, &pi).unwrap();
        assert!(chi.abs() < 1e-12);
        assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-10));
        let q2 = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 3.0, -3.0]);
        let pi2 = stationary(&q2).unwrap();
        let (chi, v) = leading_eigen(&q2, &pi2).unwrap();
        assert!(chi.abs() < 1e-15);
        assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn iterative_solves_3x3() {
        // compare against the spectrum from a Schur decomposition
        let m = DMatrix::from_row_slice(3, 3, &[-2.0, 1.0, 0.5, 0.3, 0.7, 0.2, 1.0, 1.5, -1.0]);
        let pi = DVector::from_vec(vec![0.2, 0.5, 0.3]);
        let (chi, v) = leading_eigen(&m, &pi).unwrap();
        let r = &m * &v - &v * chi;
        assert!(r.amax() < 1e-11);
        let eig = m.complex_eigenvalues();
        let best = eig.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        assert!((best - chi).abs() < 1e-11);
        assert!((pi.dot(&v) - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn two_by_two_matches_quadratic_formula(a in -3.0f64..3.0, d in -3.0f64..3.0, b in 0.05f64..3.0, c in 0.05f64..3.0, p in 0.05f64..0.95) {
            let m = DMatrix::from_row_slice(2, 2, &[a, b, c, d]);
            let pi = DVector::from_vec(vec![p, 1.0 - p]);
            let (chi, v) = leading_eigen(&m, &pi).unwrap();
            let (chi0, ratio0) = naive_2x2(&m);
            prop_assert!((chi - chi0).abs() < 1e-12 * (1.0 + chi0.abs()));
            prop_assert!((v[1] / v[0] - ratio0).abs() < 1e-10 * (1.0 + ratio0.abs()));
            prop_assert!((pi.dot(&v) - 1.0).abs() < 1e-14);
        }

        #[test]
        fn iterative_agrees_with_closed_form(a in -3.0f64..3.0, d in -3.0f64..3.0, b in 0.05f64..3.0, c in 0.05f64..3.0) {
            let m = DMatrix::from_row_slice(2, 2, &[a, b, c, d]);
            let (chi, v) = leading_eigen_iterative(&m).unwrap();
            let (chi2, v2) = leading_eigen_2x2(&m).unwrap();
            prop_assert!((chi - chi2).abs() < 1e-10 * (1.0 + chi2.abs()));
            prop_assert!((v[1] / v[0] - v2[1] / v2[0]).abs() < 1e-9 * (1.0 + v2[1].abs()));
        }
    }

    #[test]
    fn brownian_with_drift_root() {
        let c = LevyComponent { drift: -1.0, gaussian_sd: 1.0, cp_rate: 0.0, cp_jump: JumpLaw::zero() };
        let spec = Arc::new(MapSpec::replicated(c, 2).unwrap());
        let sd = spectral_data(spec.clone(), (1.0, 3.0)).unwrap();
        assert!((sd.theta - 2.0).abs() < 1e-12);
        let auto = cramer_bracket(spec.as_ref()).unwrap();
        assert!(auto.0 <= 2.0 && 2.0 <= auto.1);
        assert!((sd.chi_prime_0 + 1.0).abs() < 1e-8);
        assert!((sd.chi_prime_theta - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bracket_without_root() {
        let c = LevyComponent { drift: -1.0, gaussian_sd: 1.0, cp_rate: 0.0, cp_jump: JumpLaw::zero() };
        let spec = Arc::new(MapSpec::replicated(c, 2).unwrap());
        assert!(matches!(spectral_data(spec, (3.0, 5.0)), Err(Error::NoRootInBracket { .. })));
    }
}
