//! Jump-size laws closed under exponential tilting.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-sided exponential jump: `sign · Exp(mean)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpJump {
    pub mean: f64,
    pub sign: i8,
}

impl ExpJump {
    fn rate(&self) -> f64 {
        1.0 / self.mean
    }

    fn validate(&self) -> Result<()> {
        if !(self.mean > 0.0) || !self.mean.is_finite() {
            return Err(Error::InvalidSpec(format!("exponential mean must be positive, got {}", self.mean)));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::InvalidSpec(format!("exponential sign must be +1 or -1, got {}", self.sign)));
        }
        Ok(())
    }

    /// Open interval of `z` with finite transform.
    fn domain(&self) -> (f64, f64) {
        if self.sign > 0 {
            (f64::NEG_INFINITY, self.rate())
        } else {
            (-self.rate(), f64::INFINITY)
        }
    }

    fn transform(&self, z: f64) -> f64 {
        let r = self.rate();
        r / (r - self.sign as f64 * z)
    }

    fn tilt(&self, gamma: f64) -> Option<ExpJump> {
        let r = self.rate() - self.sign as f64 * gamma;
        (r > 0.0).then(|| ExpJump { mean: 1.0 / r, sign: self.sign })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        self.sign as f64 * self.mean * e
    }
}

/// Law of a jump `Δ` together with its transform `G(z) = E[e^{zΔ}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpLaw {
    PointMass { at: f64 },
    Exponential { mean: f64, sign: i8 },
    TwoSidedMixture { weights: Vec<f64>, components: Vec<ExpJump> },
}

impl Default for JumpLaw {
    fn default() -> Self {
        JumpLaw::PointMass { at: 0.0 }
    }
}

impl JumpLaw {
    pub fn zero() -> Self {
        JumpLaw::PointMass { at: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, JumpLaw::PointMass { at } if *at == 0.0)
    }

    pub fn name(&self) -> String {
        match self {
            JumpLaw::PointMass { at } => format!("point_mass({at})"),
            JumpLaw::Exponential { mean, sign } => format!("exponential(mean={mean}, sign={sign})"),
            JumpLaw::TwoSidedMixture { weights, .. } => format!("two_sided_mixture({} components)", weights.len()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            JumpLaw::PointMass { at } => {
                if !at.is_finite() {
                    return Err(Error::InvalidSpec(format!("point mass location {at} not finite")));
                }
            }
            JumpLaw::Exponential { mean, sign } => ExpJump { mean: *mean, sign: *sign }.validate()?,
            JumpLaw::TwoSidedMixture { weights, components } => {
                if weights.is_empty() || weights.len() != components.len() {
                    return Err(Error::InvalidSpec("mixture needs matching non-empty weights and components".into()));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(Error::InvalidSpec("mixture weights must be non-negative".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidSpec(format!("mixture weights sum to {total}, not 1")));
                }
                for c in components {
                    c.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Open interval of real `z` on which `G(z)` is finite.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            JumpLaw::PointMass { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            JumpLaw::Exponential { mean, sign } => ExpJump { mean: *mean, sign: *sign }.domain(),
            JumpLaw::TwoSidedMixture { weights, components } => components
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(c, _)| c.domain())
                .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), (a, b)| (lo.max(a), hi.min(b))),
        }
    }

    /// `G(z) = E[e^{zΔ}]`.
    pub fn transform(&self, z: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(z > lo && z < hi) {
            return Err(Error::Domain(format!("{} transform infinite at z={z}", self.name())));
        }
        Ok(match self {
            JumpLaw::PointMass { at } => (at * z).exp(),
            JumpLaw::Exponential { mean, sign } => ExpJump { mean: *mean, sign: *sign }.transform(z),
            JumpLaw::TwoSidedMixture { weights, components } => components
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(c, w)| w * c.transform(z))
                .sum(),
        })
    }

    pub fn mean(&self) -> f64 {
        match self {
            JumpLaw::PointMass { at } => *at,
            JumpLaw::Exponential { mean, sign } => *sign as f64 * mean,
            JumpLaw::TwoSidedMixture { weights, components } => components
                .iter()
                .zip(weights)
                .map(|(c, w)| w * c.sign as f64 * c.mean)
                .sum(),
        }
    }

    /// Law with density proportional to `e^{γx}` against this one.
    pub fn tilt(&self, gamma: f64) -> Result<JumpLaw> {
        let fail = || Error::NotClosedUnderTilt { law: self.name(), gamma };
        match self {
            JumpLaw::PointMass { .. } => Ok(self.clone()),
            JumpLaw::Exponential { mean, sign } => {
                let t = ExpJump { mean: *mean, sign: *sign }.tilt(gamma).ok_or_else(fail)?;
                Ok(JumpLaw::Exponential { mean: t.mean, sign: t.sign })
            }
            JumpLaw::TwoSidedMixture { weights, components } => {
                let total = self.transform(gamma).map_err(|_| fail())?;
                let mut new_w = Vec::with_capacity(weights.len());
                let mut new_c = Vec::with_capacity(components.len());
                for (c, w) in components.iter().zip(weights) {
                    if *w > 0.0 {
                        new_w.push(w * c.transform(gamma) / total);
                        new_c.push(c.tilt(gamma).ok_or_else(fail)?);
                    } else {
                        new_w.push(0.0);
                        new_c.push(*c);
                    }
                }
                // keep the weights summing to one exactly enough for validation
                let s: f64 = new_w.iter().sum();
                new_w.iter_mut().for_each(|w| *w /= s);
                Ok(JumpLaw::TwoSidedMixture { weights: new_w, components: new_c })
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpLaw::PointMass { at } => *at,
            JumpLaw::Exponential { mean, sign } => ExpJump { mean: *mean, sign: *sign }.sample(rng),
            JumpLaw::TwoSidedMixture { weights, components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (c, w) in components.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return c.sample(rng);
                    }
                }
                components.last().expect("validated non-empty").sample(rng)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{replica_rng, Summary};

    fn mixture() -> JumpLaw {
        JumpLaw::TwoSidedMixture {
            weights: vec![0.3, 0.7],
            components: vec![ExpJump { mean: 0.5, sign: 1 }, ExpJump { mean: 1.5, sign: -1 }],
        }
    }

    #[test]
    fn transform_at_zero_is_one() {
        for law in [JumpLaw::PointMass { at: 0.7 }, JumpLaw::Exponential { mean: 2.0, sign: -1 }, mixture()] {
            assert_eq!(law.transform(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn domains() {
        assert_eq!(JumpLaw::Exponential { mean: 0.5, sign: 1 }.domain(), (f64::NEG_INFINITY, 2.0));
        let (lo, hi) = mixture().domain();
        assert!((lo + 1.0 / 1.5).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        assert!(mixture().transform(2.0).is_err());
    }

    #[test]
    fn tilted_transform_is_ratio() {
        let law = mixture();
        let g = 0.4;
        let t = law.tilt(g).unwrap();
        for z in [-0.2, 0.0, 0.3, 1.0] {
            let lhs = t.transform(z).unwrap();
            let rhs = law.transform(z + g).unwrap() / law.transform(g).unwrap();
            assert!((lhs - rhs).abs() < 1e-13 * rhs);
        }
    }

    #[test]
    fn tilt_to_rate_fails() {
        let law = JumpLaw::Exponential { mean: 0.5, sign: 1 };
        assert!(matches!(law.tilt(2.0), Err(Error::NotClosedUnderTilt { .. })));
    }

    #[test]
    fn sampling_matches_transform() {
        let law = mixture();
        let mut rng = replica_rng(11, 0);
        let xs: Vec<f64> = (0..200_000).map(|_| law.sample(&mut rng)).collect();
        let m = Summary::of(&xs);
        assert!(m.within(law.mean(), 4.0, 0.0), "{m:?} vs {}", law.mean());
        let z = 0.3;
        let ez: Vec<f64> = xs.iter().map(|x| (z * x).exp()).collect();
        let s = Summary::of(&ez);
        assert!(s.within(law.transform(z).unwrap(), 4.0, 0.0));
    }

    #[test]
    fn toml_tagging() {
        let s = toml::to_string(&mixture()).unwrap();
        assert!(s.contains("kind = \"two_sided_mixture\""));
        let back: JumpLaw = toml::from_str(&s).unwrap();
        assert_eq!(back, mixture());
    }
}
