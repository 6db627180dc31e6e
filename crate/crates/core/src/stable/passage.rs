//! Closed-form interval passage probabilities for stable processes.

use super::model::StableParams;
use crate::error::{Error, Result};
use crate::numerics::{integrate_singular, log_gamma, QuadratureSpec};

const REL_TOL: f64 = 1e-12;

/// `(α−1) x^{α−1} ∫_1^{1/x} (t−1)^{αρ−1} (t+1)^{αρ̂−1} dt` for `α ∈ (1,2)`,
/// `x ∈ (0,1)`, evaluated verbatim.
pub fn exit_interval_value(params: &StableParams, x: f64) -> Result<f64> {
    params.validate()?;
    let a = params.alpha;
    if !(a > 1.0 && a < 2.0) {
        return Err(Error::Domain(format!("exit formula needs alpha in (1,2), got {a}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("exit formula needs x in (0,1), got {x}")));
    }
    let (ar, arh) = (a * params.rho, a * params.rho_hat());
    let spec = QuadratureSpec::new(1.0, 1.0 / x).left(ar - 1.0).tol(REL_TOL);
    let integral = integrate_singular(|t: f64| (t + 1.0).powf(arh - 1.0), &spec)?;
    Ok((a - 1.0) * x.powf(a - 1.0) * integral)
}

/// `Γ(1−αρ)/(Γ(αρ̂)Γ(1−α)) ∫_{(x−1)/(x+1)}^1 t^{αρ̂−1}(1−t)^{−α} dt` for
/// `α ∈ (0,1)`, `x > 1`: probability of ever entering `(−1, 1)` from `x`.
/// At `x = 1` the whole beta integral is computed by quadrature.
pub fn hit_interval_value(params: &StableParams, x: f64) -> Result<f64> {
    params.validate()?;
    let a = params.alpha;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("hit formula needs alpha in (0,1), got {a}")));
    }
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("hit formula needs finite x >= 1, got {x}")));
    }
    let arh = a * params.rho_hat();
    let prefactor = (log_gamma(1.0 - a * params.rho)? - log_gamma(arh)? - log_gamma(1.0 - a)?).exp();
    // (x-1)/(x+1) = 1 - 2/(x+1), written to keep precision near x = 1
    let lower = (x - 1.0) / (x + 1.0);
    let integral = if lower == 0.0 {
        let spec = QuadratureSpec::new(0.0, 1.0).left(arh - 1.0).right(-a).tol(REL_TOL);
        integrate_singular(|_| 1.0, &spec)?
    } else if lower < 0.5 {
        // complete beta minus the piece near 0, to keep t^{αρ̂−1} out of the
        // interior panels
        let beta = (log_gamma(arh)? + log_gamma(1.0 - a)? - log_gamma(1.0 + arh - a)?).exp();
        let head = integrate_singular(
            |t: f64| (1.0 - t).powf(-a),
            &QuadratureSpec::new(0.0, lower).left(arh - 1.0).tol(REL_TOL),
        )?;
        beta - head
    } else {
        let upper_len = 2.0 / (x + 1.0);
        let spec = QuadratureSpec::new(1.0 - upper_len, 1.0).right(-a).tol(REL_TOL);
        integrate_singular(|t: f64| t.powf(arh - 1.0), &spec)?
    };
    Ok(prefactor * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::CompensatedSum;

    #[test]
    fn exit_small_x_limit() {
        let p = StableParams::new(1.5, 0.5).unwrap();
        let v3 = exit_interval_value(&p, 1e-3).unwrap();
        let v4 = exit_interval_value(&p, 1e-4).unwrap();
        assert!((1.0 - v4).abs() < (1.0 - v3).abs());
        assert!((1.0 - v4).abs() < 0.02, "{v4}");
    }

    #[test]
    fn exit_near_brownian() {
        let p = StableParams::new(1.99, 0.5).unwrap();
        for x in [0.2, 0.5, 0.8] {
            let v = exit_interval_value(&p, x).unwrap();
            assert!((v - (1.0 - x)).abs() < 2e-2, "x={x}: {v}");
        }
    }

    /// Midpoint rule after `u = (t−1)^{αρ}`: `dt = u^{1/(αρ)−1} du/(αρ)` and
    /// `(t−1)^{αρ−1} = u^{1−1/(αρ)}`, leaving `(t+1)^{αρ̂−1}/(αρ)`.
    fn exit_brute_force(p: &StableParams, x: f64, n: usize) -> f64 {
        let (ar, arh) = (p.alpha * p.rho, p.alpha * p.rho_hat());
        let umax = (1.0 / x - 1.0).powf(ar);
        let h = umax / n as f64;
        let mut acc = CompensatedSum::default();
        for k in 0..n {
            let u = (k as f64 + 0.5) * h;
            let t = 1.0 + u.powf(1.0 / ar);
            acc.add((t + 1.0).powf(arh - 1.0) / ar * h);
        }
        (p.alpha - 1.0) * x.powf(p.alpha - 1.0) * acc.value()
    }

    #[test]
    fn exit_matches_brute_force() {
        let p = StableParams::new(1.5, 0.5).unwrap();
        let q = exit_interval_value(&p, 0.5).unwrap();
        let b = exit_brute_force(&p, 0.5, 10_000_000);
        assert!((q - b).abs() < 1e-7, "{q} vs {b}");
    }

    #[test]
    fn hit_near_one_is_one() {
        let p = StableParams::new(0.6, 0.5).unwrap();
        assert!((hit_interval_value(&p, 1.0).unwrap() - 1.0).abs() < 1e-6);
        let q = StableParams::new(0.7, 0.3).unwrap();
        assert!((hit_interval_value(&q, 1.0).unwrap() - 1.0).abs() < 1e-6);
        // approach from above is like 1 − c (x−1)^{αρ̂}
        let mut prev = 1.0;
        for k in [12, 9, 6, 3] {
            let v = hit_interval_value(&p, 1.0 + 10f64.powi(-k)).unwrap();
            assert!(v < prev && v > 0.9, "{k}: {v}");
            prev = v;
        }
    }

    #[test]
    fn hit_decreasing() {
        let p = StableParams::new(0.6, 0.5).unwrap();
        let vals: Vec<f64> = [1.1, 1.5, 2.0, 5.0, 10.0].iter().map(|x| hit_interval_value(&p, *x).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        // both quadrature branches meet continuously at (x-1)/(x+1) = 1/2
        let l = hit_interval_value(&p, 3.0 - 1e-9).unwrap();
        let r = hit_interval_value(&p, 3.0 + 1e-9).unwrap();
        assert!((l - r).abs() < 1e-9);
    }

    #[test]
    fn domain_checks() {
        let p = StableParams::new(0.6, 0.5).unwrap();
        assert!(exit_interval_value(&p, 0.5).is_err());
        assert!(hit_interval_value(&p, 0.5).is_err());
        let q = StableParams::new(1.5, 0.5).unwrap();
        assert!(hit_interval_value(&q, 2.0).is_err());
    }
}
