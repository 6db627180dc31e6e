//! Replica-parallel Monte Carlo plumbing.
//!
//! Every replica draws from its own ChaCha stream keyed by `(seed, replica)`,
//! and all aggregation happens in replica order with compensated summation,
//! so results do not depend on the rayon thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Random stream owned by a single replica.
pub type ReplicaRng = ChaCha8Rng;

/// RNG for replica `index` under master `seed`.
pub fn replica_rng(seed: u64, index: u64) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derive an independent master seed for a named sub-experiment.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run `n` replicas in parallel; output is in replica order.
pub fn run_replicas<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ReplicaRng, usize) -> T + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i as u64);
            f(&mut rng, i)
        })
        .collect()
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                stderr: f64::NAN,
                n,
            };
        }
        let mean = compensated_sum(xs.iter().copied()) / n as f64;
        let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
        let var = if n > 1 { ss / (n as f64 - 1.0) } else { 0.0 };
        Summary {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }

    /// Ratio `sum(num) / sum(den)` of paired samples with a delta-method
    /// standard error.
    pub fn ratio(num: &[f64], den: &[f64]) -> Self {
        assert_eq!(num.len(), den.len());
        let n = num.len();
        let sn = compensated_sum(num.iter().copied());
        let sd = compensated_sum(den.iter().copied());
        let r = sn / sd;
        let mean_den = sd / n as f64;
        let resid = compensated_sum(
            num.iter()
                .zip(den)
                .map(|(a, b)| (a - r * b) * (a - r * b)),
        );
        let var = if n > 1 { resid / (n as f64 - 1.0) } else { 0.0 };
        Summary {
            mean: r,
            stderr: (var / n as f64).sqrt() / mean_den.abs(),
            n,
        }
    }

    /// `|self - target| <= k * stderr + margin`
    /// Multiply the estimate and its error by a constant.
    pub fn scaled(&self, c: f64) -> Self {
        Summary { mean: self.mean * c, stderr: self.stderr * c.abs(), n: self.n }
    }

    pub fn within(&self, target: f64, k: f64, margin: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + margin
    }
}

/// A Monte Carlo or quadrature result with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, summary: Summary, seed: u64) -> Self {
        EstimateReport {
            name: name.into(),
            value: summary.mean,
            stderr: summary.stderr,
            n: summary.n,
            seed,
            target: None,
            tolerance: None,
            verdict: None,
        }
    }

    /// Exact (non-random) value, e.g. from quadrature.
    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        EstimateReport {
            name: name.into(),
            value,
            stderr: 0.0,
            n: 0,
            seed: 0,
            target: None,
            tolerance: None,
            verdict: None,
        }
    }

    /// Judge against `target` with tolerance `k * stderr + margin`.
    pub fn judge(mut self, target: f64, k: f64, margin: f64) -> Self {
        let tol = k * self.stderr + margin;
        self.target = Some(target);
        self.tolerance = Some(tol);
        self.verdict = Some((self.value - target).abs() <= tol);
        self
    }

    /// Judge against an independent estimate with tolerance `k` combined
    /// standard errors.
    pub fn judge_against(mut self, other: &Summary, k: f64) -> Self {
        let tol = k * self.stderr.hypot(other.stderr);
        self.target = Some(other.mean);
        self.tolerance = Some(tol);
        self.verdict = Some((self.value - other.mean).abs() <= tol);
        self
    }

    pub fn summary(&self) -> Summary {
        Summary {
            mean: self.value,
            stderr: self.stderr,
            n: self.n,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.unwrap_or(true)
    }
}

/// Two independent estimates agree within `k` combined standard errors.
pub fn agree(a: &Summary, b: &Summary, k: f64) -> bool {
    (a.mean - b.mean).abs() <= k * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt()
}

/// Two-sample Kolmogorov–Smirnov statistic and the asymptotic critical value
/// at level 1%.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let crit = 1.628 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt();
    (d, crit)
}

/// One-sample KS statistic against `cdf`, with the 1% critical value.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> (f64, f64) {
    let mut xs = xs.to_vec();
    xs.sort_by(|x, y| x.total_cmp(y));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (k, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((f - k as f64 / n).abs()).max(((k + 1) as f64 / n - f).abs());
    }
    (d, 1.628 / n.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = vec![1e16, 1.0, -1e16];
        xs.extend(std::iter::repeat(1e-3).take(1000));
        assert!((compensated_sum(xs) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn replicas_are_reproducible_and_order_stable() {
        let a = run_replicas(7, 64, |rng, _| rng.random::<f64>());
        let b = run_replicas(7, 64, |rng, _| rng.random::<f64>());
        assert_eq!(a, b);
        let c = run_replicas(8, 64, |rng, _| rng.random::<f64>());
        assert_ne!(a, c);
    }

    #[test]
    fn ratio_summary_of_proportional_samples() {
        let num = [2.0, 4.0, 6.0];
        let den = [1.0, 2.0, 3.0];
        let s = Summary::ratio(&num, &den);
        assert!((s.mean - 2.0).abs() < 1e-15);
        assert!(s.stderr < 1e-15);
    }
}
