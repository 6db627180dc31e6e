//! Discrete-time Markov additive random walks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::map::{stationary, JumpLaw, MapSpec};
use crate::simulate::{MapSimulator, StopRule};
use crate::stats::ReplicaRng;

/// One-step sampler of `(Δ_n, M_n)` given `M_{n−1}`.
pub trait MarwSampler: Sync {
    fn n_states(&self) -> usize;
    fn step(&self, state: usize, rng: &mut ReplicaRng) -> Result<(f64, usize)>;
    /// stationary law of the embedded chain
    fn stationary(&self) -> DVector<f64>;
    /// `η_i = E[Δ_1 | M_0 = i]`
    fn mean_increments(&self) -> DVector<f64>;

    /// `Σ_i π_i η_i`
    fn stationary_mean(&self) -> f64 {
        self.stationary().dot(&self.mean_increments())
    }
}

/// Kernel `P_{ij}(dx) = p_ij · law_ij(dx)` with parametric increment laws.
#[derive(Debug, Clone, PartialEq)]
pub struct MarwSpec {
    p: DMatrix<f64>,
    laws: Vec<Vec<JumpLaw>>,
    cdf: Vec<Vec<f64>>,
    pi: DVector<f64>,
}

impl MarwSpec {
    pub fn new(p: DMatrix<f64>, laws: Vec<Vec<JumpLaw>>) -> Result<Self> {
        let n = p.nrows();
        if n == 0 || p.ncols() != n || laws.len() != n || laws.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSpec("transition matrix and laws must be square and matching".into()));
        }
        let mut cdf = Vec::with_capacity(n);
        for i in 0..n {
            let row = p.row(i);
            if row.iter().any(|x| !(*x >= 0.0)) || (row.sum() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSpec(format!("row {i} of the transition matrix is not a distribution")));
            }
            let mut acc = 0.0;
            cdf.push(row.iter().map(|x| {
                acc += x;
                acc
            }).collect());
            for law in &laws[i] {
                law.validate()?;
            }
        }
        let eye = DMatrix::<f64>::identity(n, n);
        let pi = stationary(&(&p - eye)).map_err(|_| Error::InvalidSpec("transition matrix is reducible".into()))?;
        Ok(MarwSpec { p, laws, cdf, pi })
    }

    /// Ordinary random walk with i.i.d. increments.
    pub fn single(law: JumpLaw) -> Result<Self> {
        MarwSpec::new(DMatrix::from_element(1, 1, 1.0), vec![vec![law]])
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }
}

impl MarwSampler for MarwSpec {
    fn n_states(&self) -> usize {
        self.p.nrows()
    }

    fn step(&self, state: usize, rng: &mut ReplicaRng) -> Result<(f64, usize)> {
        let u: f64 = rng.random();
        let row = &self.cdf[state];
        let j = row.iter().position(|c| u < *c).unwrap_or(row.len() - 1);
        Ok((self.laws[state][j].sample(rng), j))
    }

    fn stationary(&self) -> DVector<f64> {
        self.pi.clone()
    }

    fn mean_increments(&self) -> DVector<f64> {
        let n = self.n_states();
        DVector::from_fn(n, |i, _| (0..n).map(|j| self.p[(i, j)] * self.laws[i][j].mean()).sum())
    }
}

/// A MAP observed at the epochs of an independent unit-rate Poisson process.
#[derive(Debug, Clone)]
pub struct Poissonized {
    sim: MapSimulator,
    pi: DVector<f64>,
    eta: DVector<f64>,
}

/// Sampling kernel of `(ξ(Θ_n) − ξ(Θ_{n−1}), J(Θ_n))` with unit-exponential
/// gaps `Θ_n − Θ_{n−1}`.
pub fn poissonize(spec: &MapSpec) -> Result<Poissonized> {
    let sim = MapSimulator::new(spec)?;
    let n = spec.n_states();
    let pi = stationary(spec.q())?;
    // E_i ξ(e) = ((I − Q)^{-1} m)_i with m the instantaneous mean speed
    let m = DVector::from_fn(n, |i, _| {
        spec.component(i).mean() + (0..n).filter(|j| *j != i).map(|j| spec.q()[(i, j)] * spec.switch_law(i, j).mean()).sum::<f64>()
    });
    let a = DMatrix::<f64>::identity(n, n) - spec.q();
    let eta = a.lu().solve(&m).ok_or_else(|| Error::Numerical("I − Q singular".into()))?;
    Ok(Poissonized { sim, pi, eta })
}

impl MarwSampler for Poissonized {
    fn n_states(&self) -> usize {
        self.pi.len()
    }

    fn step(&self, state: usize, rng: &mut ReplicaRng) -> Result<(f64, usize)> {
        let gap: f64 = Exp1.sample(rng);
        let term = self.sim.run(0.0, state, StopRule::FixedHorizon(gap), rng, &mut ())?;
        Ok((term.xi, term.state))
    }

    fn stationary(&self) -> DVector<f64> {
        self.pi.clone()
    }

    fn mean_increments(&self) -> DVector<f64> {
        self.eta.clone()
    }
}
