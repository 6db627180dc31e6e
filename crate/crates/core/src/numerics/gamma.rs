use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `Γ(x)` on the real line, excluding the poles at non-positive integers.
pub fn gamma(x: f64) -> Result<f64> {
    if x > 0.0 {
        return Ok(log_gamma(x)?.exp());
    }
    if x == x.round() {
        return Err(Error::Domain(format!("gamma has a pole at {x}")));
    }
    // reflection
    Ok(PI / ((PI * x).sin() * log_gamma(1.0 - x)?.exp()))
}

/// `1 / (Γ(w) Γ(1 - w)) = sin(π w) / π`, finite for every real `w`.
pub fn reciprocal_reflection(w: f64) -> f64 {
    (PI * w).sin() / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-15);
        let half = 0.5 * PI.ln();
        assert!((log_gamma(0.5).unwrap() - half).abs() <= 1e-13 * half);
        // ln(10!) = ln Γ(11)
        let lf = (1..=10).map(|k| (k as f64).ln()).sum::<f64>();
        assert!((log_gamma(11.0).unwrap() - lf).abs() <= 1e-13 * lf);
    }

    #[test]
    fn reflection_identity() {
        for k in 1..=9 {
            let z = k as f64 / 10.0;
            let lhs = (log_gamma(z).unwrap() + log_gamma(1.0 - z).unwrap()).exp();
            let rhs = PI / (PI * z).sin();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs, "z={z}");
            assert!((lhs * (PI * z).sin() / PI - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-1.5), Err(Error::Domain(_))));
        assert!(gamma(-2.0).is_err());
    }

    #[test]
    fn negative_argument_via_reflection() {
        // Γ(-0.5) = -2√π
        let g = gamma(-0.5).unwrap();
        assert!((g + 2.0 * PI.sqrt()).abs() < 1e-13);
        let w = -0.3;
        let r = 1.0 / (gamma(w).unwrap() * gamma(1.0 - w).unwrap());
        assert!((r - reciprocal_reflection(w)).abs() < 1e-13);
    }
}
