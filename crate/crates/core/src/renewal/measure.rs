//! Monte Carlo estimates of Markov renewal measures
//! `R_{i,j}(A) = Σ_{n≥1} P(Ξ_n ∈ A, M_n = j | M_0 = i)`.

use serde::{Deserialize, Serialize};

use super::marw::MarwSampler;
use crate::error::{Error, Result};
use crate::stats::{run_replicas, EstimateReport, Summary};

/// Replication settings shared by the renewal estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalRun {
    pub start: usize,
    pub n_paths: usize,
    pub len: WalkLength,
    pub seed: u64,
}

/// How far each simulated walk is followed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkLength {
    pub max_steps: usize,
    /// stop early once `Ξ_n` exceeds this level (walks drifting to +∞ only
    /// return below it with small probability)
    pub stop_above: Option<f64>,
}

/// Binned renewal measure from one start state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalMeasure {
    pub start: usize,
    pub edges: Vec<f64>,
    /// `mass[j][b]`: expected number of visits to bin `b` in state `j`
    pub mass: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub n_paths: usize,
}

impl RenewalMeasure {
    /// Rows `(i, j, bin_lo, bin_hi, mass, stderr)`.
    pub fn csv_rows(&self) -> Vec<(usize, usize, f64, f64, f64, f64)> {
        let mut rows = vec![];
        for (j, (m, s)) in self.mass.iter().zip(&self.stderr).enumerate() {
            for b in 0..m.len() {
                rows.push((self.start, j, self.edges[b], self.edges[b + 1], m[b], s[b]));
            }
        }
        rows
    }
}

fn walk<S: MarwSampler + ?Sized>(
    sampler: &S,
    start: usize,
    len: WalkLength,
    rng: &mut crate::stats::ReplicaRng,
    mut visit: impl FnMut(f64, usize),
) -> Result<()> {
    let mut pos = 0.0;
    let mut state = start;
    for _ in 0..len.max_steps {
        let (d, j) = sampler.step(state, rng)?;
        pos += d;
        state = j;
        visit(pos, state);
        if len.stop_above.is_some_and(|l| pos > l) {
            break;
        }
    }
    Ok(())
}

/// Per-path visit counts to each bin, averaged over paths.
pub fn renewal_measure<S: MarwSampler + ?Sized>(sampler: &S, edges: &[f64], run: RenewalRun) -> Result<RenewalMeasure> {
    let RenewalRun { start, n_paths, len, seed } = run;
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("bin edges must be strictly increasing, at least two".into()));
    }
    let n = sampler.n_states();
    let nb = edges.len() - 1;
    let counts = run_replicas(seed, n_paths, |rng, _| -> Result<Vec<f64>> {
        let mut c = vec![0.0; n * nb];
        walk(sampler, start, len, rng, |x, j| {
            if x >= edges[0] && x < edges[nb] {
                let b = edges.partition_point(|e| *e <= x) - 1;
                c[j * nb + b] += 1.0;
            }
        })?;
        Ok(c)
    });
    let counts: Vec<Vec<f64>> = counts.into_iter().collect::<Result<_>>()?;
    let mut mass = vec![vec![0.0; nb]; n];
    let mut stderr = vec![vec![0.0; nb]; n];
    let mut column = vec![0.0; n_paths];
    for j in 0..n {
        for b in 0..nb {
            for (k, c) in counts.iter().enumerate() {
                column[k] = c[j * nb + b];
            }
            let s = Summary::of(&column);
            mass[j][b] = s.mean;
            stderr[j][b] = s.stderr;
        }
    }
    Ok(RenewalMeasure { start, edges: edges.to_vec(), mass, stderr, n_paths })
}

/// Non-negative, piecewise-monotone test function with a known integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFn {
    /// `scale · 1[lo, hi)`
    Indicator { lo: f64, hi: f64, scale: f64 },
    /// `scale · e^{−rate·x}` on `x ≥ 0`
    Exponential { rate: f64, scale: f64 },
    Zero,
}

impl TestFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFn::Indicator { lo, hi, scale } => {
                if x >= lo && x < hi {
                    scale
                } else {
                    0.0
                }
            }
            TestFn::Exponential { rate, scale } => {
                if x >= 0.0 {
                    scale * (-rate * x).exp()
                } else {
                    0.0
                }
            }
            TestFn::Zero => 0.0,
        }
    }

    pub fn integral(&self) -> f64 {
        match *self {
            TestFn::Indicator { lo, hi, scale } => scale * (hi - lo),
            TestFn::Exponential { rate, scale } => scale / rate,
            TestFn::Zero => 0.0,
        }
    }
}

/// `∫ g_j(t − s) R_{i,j}(ds)` per state `j` and per `t`, judged against the
/// limit `π_j ∫g_j / Σ_k π_k η_k` with tolerance `3·SE + margin·|limit|`.
pub fn renewal_limit_check<S: MarwSampler + ?Sized>(
    sampler: &S,
    g: &[TestFn],
    t_grid: &[f64],
    rel_margin: f64,
    run: RenewalRun,
) -> Result<Vec<EstimateReport>> {
    let RenewalRun { start, n_paths, len, seed } = run;
    let n = sampler.n_states();
    if g.len() != n {
        return Err(Error::Domain(format!("need one test function per state ({n}), got {}", g.len())));
    }
    let mu = sampler.stationary_mean();
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("renewal theorem needs positive mean increment, got {mu}")));
    }
    let pi = sampler.stationary();
    let nt = t_grid.len();
    let sums = run_replicas(seed, n_paths, |rng, _| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; n * nt];
        walk(sampler, start, len, rng, |x, j| {
            for (k, t) in t_grid.iter().enumerate() {
                acc[j * nt + k] += g[j].eval(t - x);
            }
        })?;
        Ok(acc)
    });
    let sums: Vec<Vec<f64>> = sums.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n * nt);
    let mut column = vec![0.0; n_paths];
    for j in 0..n {
        let limit = pi[j] * g[j].integral() / mu;
        for (k, t) in t_grid.iter().enumerate() {
            for (p, s) in sums.iter().enumerate() {
                column[p] = s[j * nt + k];
            }
            let rep = EstimateReport::new(format!("renewal(i={start}, j={j}, t={t})"), Summary::of(&column), seed)
                .judge(limit, 3.0, rel_margin * limit.abs());
            out.push(rep);
        }
    }
    Ok(out)
}
