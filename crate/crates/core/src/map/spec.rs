//! Parametric Markov additive process: modulating chain, per-state Lévy
//! components and switch jumps.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::jump::JumpLaw;
use crate::error::{Error, Result};

/// Lévy process run while the chain sits in one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyComponent {
    pub drift: f64,
    #[serde(default)]
    pub gaussian_sd: f64,
    #[serde(default)]
    pub cp_rate: f64,
    #[serde(default, rename = "jump")]
    pub cp_jump: JumpLaw,
}

impl LevyComponent {
    pub fn drift_only(drift: f64) -> Self {
        LevyComponent { drift, gaussian_sd: 0.0, cp_rate: 0.0, cp_jump: JumpLaw::zero() }
    }

    pub fn with_jumps(drift: f64, cp_rate: f64, cp_jump: JumpLaw) -> Self {
        LevyComponent { drift, gaussian_sd: 0.0, cp_rate, cp_jump }
    }

    fn validate(&self) -> Result<()> {
        if !self.drift.is_finite() {
            return Err(Error::InvalidSpec("drift must be finite".into()));
        }
        if !(self.gaussian_sd >= 0.0) || !self.gaussian_sd.is_finite() {
            return Err(Error::InvalidSpec("gaussian_sd must be finite and >= 0".into()));
        }
        if !(self.cp_rate >= 0.0) || !self.cp_rate.is_finite() {
            return Err(Error::InvalidSpec("cp_rate must be finite and >= 0".into()));
        }
        self.cp_jump.validate()
    }

    pub fn domain(&self) -> (f64, f64) {
        if self.cp_rate > 0.0 {
            self.cp_jump.domain()
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    /// Laplace exponent `ψ(z) = log E[e^{zξ(1)}]`.
    pub fn psi(&self, z: f64) -> Result<f64> {
        let mut v = self.drift * z + 0.5 * self.gaussian_sd * self.gaussian_sd * z * z;
        if self.cp_rate > 0.0 {
            v += self.cp_rate * (self.cp_jump.transform(z)? - 1.0);
        }
        Ok(v)
    }

    /// `E[ξ(1)]`.
    pub fn mean(&self) -> f64 {
        self.drift + self.cp_rate * self.cp_jump.mean()
    }
}

/// An `N`-state Markov additive process.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    q: DMatrix<f64>,
    components: Vec<LevyComponent>,
    /// `switch[i][j]` is the jump added to ξ when the chain moves `i → j`.
    switch: Vec<Vec<JumpLaw>>,
}

impl MapSpec {
    /// Build and validate. `switch` may be given as `None` for "no switch jumps".
    pub fn new(q: DMatrix<f64>, components: Vec<LevyComponent>, switch: Option<Vec<Vec<JumpLaw>>>) -> Result<Self> {
        let n = components.len();
        let switch = switch.unwrap_or_else(|| vec![vec![JumpLaw::zero(); n]; n]);
        let spec = MapSpec { q, components, switch };
        spec.validate()?;
        Ok(spec)
    }

    /// Single Lévy process written as an `n`-state MAP with identical states
    /// and unit switching rates.
    pub fn replicated(component: LevyComponent, n: usize) -> Result<Self> {
        let mut q = DMatrix::from_element(n, n, 1.0);
        for i in 0..n {
            q[(i, i)] = -((n - 1) as f64);
        }
        if n == 1 {
            q[(0, 0)] = 0.0;
        }
        MapSpec::new(q, vec![component; n], None)
    }

    fn validate(&self) -> Result<()> {
        let n = self.components.len();
        if n == 0 {
            return Err(Error::InvalidSpec("need at least one state".into()));
        }
        if self.q.nrows() != n || self.q.ncols() != n {
            return Err(Error::InvalidSpec(format!("rate matrix is {}x{}, expected {n}x{n}", self.q.nrows(), self.q.ncols())));
        }
        if self.switch.len() != n || self.switch.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSpec("switch jump table has wrong shape".into()));
        }
        for i in 0..n {
            let mut row = 0.0;
            let mut scale: f64 = 0.0;
            for j in 0..n {
                let r = self.q[(i, j)];
                if !r.is_finite() {
                    return Err(Error::InvalidSpec(format!("rate q[{i}][{j}] not finite")));
                }
                if i != j && r < 0.0 {
                    return Err(Error::InvalidSpec(format!("negative off-diagonal rate q[{i}][{j}] = {r}")));
                }
                row += r;
                scale = scale.max(r.abs());
            }
            if row.abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidSpec(format!("row {i} of the rate matrix sums to {row}")));
            }
            for j in 0..n {
                if i != j && self.q[(i, j)] == 0.0 && !self.switch[i][j].is_zero() {
                    return Err(Error::InvalidSpec(format!(
                        "switch jump for ({i},{j}) must be point_mass(0) since q[{i}][{j}] = 0"
                    )));
                }
            }
            self.components[i].validate().map_err(|e| Error::InvalidSpec(format!("component {i}: {e}")))?;
            for j in 0..n {
                self.switch[i][j].validate().map_err(|e| Error::InvalidSpec(format!("switch ({i},{j}): {e}")))?;
            }
        }
        if !self.irreducible() {
            return Err(Error::InvalidSpec("modulating chain is reducible".into()));
        }
        Ok(())
    }

    fn irreducible(&self) -> bool {
        let n = self.n_states();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let r = if forward { self.q[(i, j)] } else { self.q[(j, i)] };
                    if i != j && r > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    pub fn n_states(&self) -> usize {
        self.components.len()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn components(&self) -> &[LevyComponent] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &LevyComponent {
        &self.components[i]
    }

    pub fn switch_law(&self, i: usize, j: usize) -> &JumpLaw {
        &self.switch[i][j]
    }

    /// Total rate of leaving state `i`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.q[(i, i)]
    }

    pub fn is_simulable(&self) -> bool {
        self.components.iter().all(|c| c.gaussian_sd == 0.0)
    }

    /// Open interval of `z` on which every component and switch transform is finite.
    pub fn domain(&self) -> (f64, f64) {
        let n = self.n_states();
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for i in 0..n {
            let (a, b) = self.components[i].domain();
            lo = lo.max(a);
            hi = hi.min(b);
            for j in 0..n {
                if i != j && self.q[(i, j)] > 0.0 {
                    let (a, b) = self.switch[i][j].domain();
                    lo = lo.max(a);
                    hi = hi.min(b);
                }
            }
        }
        (lo, hi)
    }

    /// `F(z) = diag(ψ_i(z)) + Q ∘ G(z)`.
    pub fn matrix_exponent(&self, z: f64) -> Result<DMatrix<f64>> {
        let n = self.n_states();
        let mut f = self.q.clone();
        for i in 0..n {
            let psi = self.components[i]
                .psi(z)
                .map_err(|_| Error::Domain(format!("z={z} outside the domain of component {i} ({})", self.components[i].cp_jump.name())))?;
            f[(i, i)] += psi;
            for j in 0..n {
                if i != j && self.q[(i, j)] > 0.0 {
                    let g = self.switch[i][j]
                        .transform(z)
                        .map_err(|_| Error::Domain(format!("z={z} outside the domain of switch jump ({i},{j}) ({})", self.switch[i][j].name())))?;
                    f[(i, j)] *= g;
                }
            }
        }
        Ok(f)
    }

    /// Stationary mean speed `Σ_i π_i (E ξ_i(1) + Σ_{j≠i} q_ij E Δ_ij)`.
    pub fn mean_drift(&self) -> Result<f64> {
        let pi = super::spectral::stationary(&self.q)?;
        let n = self.n_states();
        let mut total = 0.0;
        for i in 0..n {
            let mut m = self.components[i].mean();
            for j in 0..n {
                if i != j {
                    m += self.q[(i, j)] * self.switch[i][j].mean();
                }
            }
            if !m.is_finite() {
                return Err(Error::Numerical(format!("infinite first moment in state {i}")));
            }
            total += pi[i] * m;
        }
        Ok(total)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: MapConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.into_spec()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&MapConfig::from_spec(self)).expect("map config always serializes")
    }
}

/// On-disk layout of a [`MapSpec`]:
///
/// ```toml
/// [chain]
/// rates = [[-1.0, 1.0], [2.0, -2.0]]
///
/// [component.0]
/// drift = -1.0
/// gaussian_sd = 0.0
/// cp_rate = 1.0
/// jump = { kind = "exponential", mean = 0.5, sign = 1 }
///
/// [switch.0.1]
/// kind = "point_mass"
/// at = 0.25
/// ```
///
/// Omitted switch entries are `point_mass(0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub chain: ChainConfig,
    pub component: BTreeMap<String, LevyComponent>,
    #[serde(default)]
    pub switch: BTreeMap<String, BTreeMap<String, JumpLaw>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub rates: Vec<Vec<f64>>,
}

fn parse_index(key: &str, n: usize, what: &str) -> Result<usize> {
    let i: usize = key.parse().map_err(|_| Error::Config(format!("{what} key '{key}' is not a state index")))?;
    if i >= n {
        return Err(Error::Config(format!("{what} index {i} out of range for {n} states")));
    }
    Ok(i)
}

impl MapConfig {
    pub fn into_spec(self) -> Result<MapSpec> {
        let n = self.chain.rates.len();
        if n == 0 || self.chain.rates.iter().any(|r| r.len() != n) {
            return Err(Error::Config("chain.rates must be a square matrix".into()));
        }
        let q = DMatrix::from_fn(n, n, |i, j| self.chain.rates[i][j]);
        let mut comps: Vec<Option<LevyComponent>> = vec![None; n];
        for (k, c) in self.component {
            let i = parse_index(&k, n, "component")?;
            comps[i] = Some(c);
        }
        let components = comps
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| Error::Config(format!("missing [component.{i}]"))))
            .collect::<Result<Vec<_>>>()?;
        let mut switch = vec![vec![JumpLaw::zero(); n]; n];
        for (ki, row) in self.switch {
            let i = parse_index(&ki, n, "switch")?;
            for (kj, law) in row {
                let j = parse_index(&kj, n, "switch")?;
                if i == j {
                    return Err(Error::Config(format!("switch.{i}.{j} on the diagonal")));
                }
                switch[i][j] = law;
            }
        }
        MapSpec::new(q, components, Some(switch))
    }

    pub fn from_spec(spec: &MapSpec) -> Self {
        let n = spec.n_states();
        let rates = (0..n).map(|i| (0..n).map(|j| spec.q[(i, j)]).collect()).collect();
        let component = (0..n).map(|i| (i.to_string(), spec.components[i].clone())).collect();
        let mut switch: BTreeMap<String, BTreeMap<String, JumpLaw>> = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && !spec.switch[i][j].is_zero() {
                    switch.entry(i.to_string()).or_default().insert(j.to_string(), spec.switch[i][j].clone());
                }
            }
        }
        MapConfig { chain: ChainConfig { rates }, component, switch }
    }
}

/// Standalone `F(z)` for a spec.
pub fn matrix_exponent(spec: &MapSpec, z: f64) -> Result<DMatrix<f64>> {
    spec.matrix_exponent(z)
}

/// Standalone stationary mean speed.
pub fn mean_drift(spec: &MapSpec) -> Result<f64> {
    spec.mean_drift()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::jump::ExpJump;
    use proptest::prelude::*;

    fn two_state(d1: f64, d2: f64, a12: f64, a21: f64) -> MapSpec {
        let q = DMatrix::from_row_slice(2, 2, &[-1.5, 1.5, 0.5, -0.5]);
        let sw = vec![
            vec![JumpLaw::zero(), JumpLaw::PointMass { at: a12 }],
            vec![JumpLaw::PointMass { at: a21 }, JumpLaw::zero()],
        ];
        MapSpec::new(q, vec![LevyComponent::drift_only(d1), LevyComponent::drift_only(d2)], Some(sw)).unwrap()
    }

    #[test]
    fn exponent_at_zero_is_generator() {
        let s = two_state(1.0, -2.0, 0.3, -0.4);
        assert_eq!(s.matrix_exponent(0.0).unwrap(), *s.q());
    }

    #[test]
    fn drift_point_mass_closed_form() {
        let (d1, d2, a12, a21) = (0.7, -1.3, 0.25, -0.6);
        let s = two_state(d1, d2, a12, a21);
        for z in [-1.0, -0.2, 0.5, 2.0] {
            let f = s.matrix_exponent(z).unwrap();
            let expect = [d1 * z - 1.5, 1.5 * (a12 * z).exp(), 0.5 * (a21 * z).exp(), d2 * z - 0.5];
            for (k, e) in expect.iter().enumerate() {
                assert!((f[(k / 2, k % 2)] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn domain_error_names_component() {
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        let c = LevyComponent::with_jumps(-1.0, 1.0, JumpLaw::Exponential { mean: 0.5, sign: 1 });
        let s = MapSpec::new(q, vec![LevyComponent::drift_only(1.0), c], None).unwrap();
        let e = s.matrix_exponent(2.5).unwrap_err().to_string();
        assert!(e.contains("component 1"), "{e}");
    }

    #[test]
    fn rejects_bad_specs() {
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -0.5]);
        assert!(MapSpec::new(q, vec![LevyComponent::drift_only(1.0); 2], None).is_err());
        let q = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, -1.0]);
        assert!(MapSpec::new(q, vec![LevyComponent::drift_only(1.0); 2], None).is_err());
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, 0.0]);
        assert!(MapSpec::new(q, vec![LevyComponent::drift_only(1.0); 2], None).is_err());
    }

    #[test]
    fn mean_drift_examples() {
        let q = DMatrix::from_row_slice(2, 2, &[-2.0, 2.0, 2.0, -2.0]);
        let s = MapSpec::new(q, vec![LevyComponent::drift_only(1.0), LevyComponent::drift_only(-1.0)], None).unwrap();
        assert!(s.mean_drift().unwrap().abs() < 1e-15);
        let q = DMatrix::from_row_slice(2, 2, &[-0.3, 0.3, 4.0, -4.0]);
        let s = MapSpec::new(q, vec![LevyComponent::drift_only(-2.0); 2], None).unwrap();
        assert!((s.mean_drift().unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn toml_round_trip() {
        let q = DMatrix::from_row_slice(3, 3, &[-1.0, 0.5, 0.5, 2.0, -2.0, 0.0, 0.1, 0.2, -0.30000000000000004]);
        let comps = vec![
            LevyComponent::with_jumps(-1.0, 1.0, JumpLaw::Exponential { mean: 0.5, sign: 1 }),
            LevyComponent { drift: 0.3, gaussian_sd: 0.2, cp_rate: 0.0, cp_jump: JumpLaw::zero() },
            LevyComponent::with_jumps(
                0.0,
                2.0,
                JumpLaw::TwoSidedMixture {
                    weights: vec![0.25, 0.75],
                    components: vec![ExpJump { mean: 1.0, sign: 1 }, ExpJump { mean: 0.1, sign: -1 }],
                },
            ),
        ];
        let mut sw = vec![vec![JumpLaw::zero(); 3]; 3];
        sw[0][1] = JumpLaw::PointMass { at: 0.125 };
        sw[2][0] = JumpLaw::Exponential { mean: 3.0, sign: -1 };
        let s = MapSpec::new(q, comps, Some(sw)).unwrap();
        let text = s.to_toml();
        let back = MapSpec::from_toml(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn config_errors_are_reported() {
        let text = "[chain]\nrates = [[-1.0, 1.0], [1.0, -1.0]]\n[component.0]\ndrift = 1.0\n";
        let e = MapSpec::from_toml(text).unwrap_err().to_string();
        assert!(e.contains("component.1"), "{e}");
        let e = MapSpec::from_toml("[chain]\nrates = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    proptest! {
        #[test]
        fn exponent_rows_at_zero_sum_to_zero(a in 0.01f64..5.0, b in 0.01f64..5.0, d1 in -3.0f64..3.0, d2 in -3.0f64..3.0) {
            let q = DMatrix::from_row_slice(2, 2, &[-a, a, b, -b]);
            let s = MapSpec::new(q, vec![LevyComponent::drift_only(d1), LevyComponent::drift_only(d2)], None).unwrap();
            let f = s.matrix_exponent(0.0).unwrap();
            prop_assert_eq!(f[(0, 0)] + f[(0, 1)], 0.0);
            prop_assert_eq!(f[(1, 0)] + f[(1, 1)], 0.0);
        }
    }
}
