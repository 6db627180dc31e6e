//! Quadrature for integrands with algebraic endpoint singularities.
//!
//! The integral computed is
//! `∫_lower^upper (t - lower)^left (upper - t)^right f(t) dt`
//! with `f` smooth. Endpoint panels use Gauss–Jacobi rules whose weight
//! absorbs the singular factor; the interior is handled by adaptive
//! Gauss–Kronrod (21-point) bisection.

use nalgebra::{DMatrix, SymmetricEigen};

use super::gamma::log_gamma;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub lower: f64,
    pub upper: f64,
    /// integrand behaves like `(t - lower)^left_exponent` near `lower`
    pub left_exponent: f64,
    /// integrand behaves like `(upper - t)^right_exponent` near `upper`
    pub right_exponent: f64,
    pub rel_tol: f64,
}

impl QuadratureSpec {
    pub fn new(lower: f64, upper: f64) -> Self {
        QuadratureSpec {
            lower,
            upper,
            left_exponent: 0.0,
            right_exponent: 0.0,
            rel_tol: 1e-12,
        }
    }

    pub fn left(mut self, exponent: f64) -> Self {
        self.left_exponent = exponent;
        self
    }

    pub fn right(mut self, exponent: f64) -> Self {
        self.right_exponent = exponent;
        self
    }

    pub fn tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::Domain(format!(
                "quadrature needs finite lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if !(self.left_exponent > -1.0) || !(self.right_exponent > -1.0) {
            return Err(Error::Domain(format!(
                "endpoint exponents must exceed -1, got ({}, {})",
                self.left_exponent, self.right_exponent
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Domain("rel_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Nodes and weights for `∫_{-1}^{1} (1-u)^a (1+u)^b g(u) du` (Golub–Welsch).
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || !(a > -1.0) || !(b > -1.0) {
        return Err(Error::Domain(format!("gauss_jacobi(n={n}, a={a}, b={b})")));
    }
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        jac[(k, k)] = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        if k + 1 < n {
            let m = kf + 1.0;
            let off = if k == 0 {
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let s = 2.0 * m + ab;
                (4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + log_gamma(a + 1.0)? + log_gamma(b + 1.0)?
        - log_gamma(ab + 2.0)?)
        .exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairs.into_iter().unzip())
}

/// `∫_lo^hi (t-lo)^left (hi-t)^right f(t) dt` with an `n`-point Jacobi rule.
fn jacobi_panel<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    left: f64,
    right: f64,
    n: usize,
) -> Result<f64> {
    let (nodes, weights) = gauss_jacobi(n, right, left)?;
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let scale = half.powf(left + right + 1.0);
    let s: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(u, w)| w * f(mid + half * u))
        .sum();
    Ok(scale * s)
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Kronrod estimate and |Kronrod - Gauss| on one panel.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    for k in 0..10 {
        let dx = half * XGK[k];
        let pair = f(mid - dx) + f(mid + dx);
        kron += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod on a finite interval to absolute tolerance `tol`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    const MAX_PANELS: usize = 5000;
    let (r, e) = gk21(f, a, b);
    let mut panels = vec![(a, b, r, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand value".into()));
        }
        if err <= tol {
            return Ok((total, err));
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureNoConvergence {
                estimate: total,
                error_bound: err,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let pm = 0.5 * (pa + pb);
        if !(pm > pa && pm < pb) {
            return Err(Error::QuadratureNoConvergence {
                estimate: total,
                error_bound: err,
            });
        }
        let (r1, e1) = gk21(f, pa, pm);
        let (r2, e2) = gk21(f, pm, pb);
        if !(r1 + r2).is_finite() {
            // refinement ran into an undeclared singularity
            return Err(Error::QuadratureNoConvergence {
                estimate: total,
                error_bound: err,
            });
        }
        panels.push((pa, pm, r1, e1));
        panels.push((pm, pb, r2, e2));
    }
}

/// Integrate `(t-lower)^left (upper-t)^right f(t)` over `[lower, upper]`.
pub fn integrate_singular<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let QuadratureSpec {
        lower: lo,
        upper: hi,
        left_exponent: a,
        right_exponent: b,
        rel_tol,
    } = *spec;

    // A single Jacobi rule over the whole interval settles smooth cases.
    let coarse = jacobi_panel(&f, lo, hi, a, b, 24)?;
    let fine = jacobi_panel(&f, lo, hi, a, b, 48)?;
    if !fine.is_finite() {
        return Err(Error::Numerical("non-finite integrand value".into()));
    }
    if (fine - coarse).abs() <= 0.1 * rel_tol * fine.abs() {
        return Ok(fine);
    }

    let full = |t: f64| {
        let mut v = f(t);
        if a != 0.0 {
            v *= (t - lo).powf(a);
        }
        if b != 0.0 {
            v *= (hi - t).powf(b);
        }
        v
    };

    let mut scale = fine.abs().max(f64::MIN_POSITIVE);
    let mut last = (f64::NAN, f64::INFINITY);
    for _ in 0..3 {
        let tol = rel_tol * scale;
        let mut err_total = 0.0;
        let mut total = 0.0;
        let width = hi - lo;
        let mut left_edge = lo;
        let mut right_edge = hi;

        if a != 0.0 {
            let g = |t: f64| if b != 0.0 { f(t) * (hi - t).powf(b) } else { f(t) };
            let (w, val, err) = graded_endpoint_panel(&g, lo, width * 0.25, a, true, tol / 4.0)?;
            left_edge = lo + w;
            total += val;
            err_total += err;
        }
        if b != 0.0 {
            let g = |t: f64| if a != 0.0 { f(t) * (t - lo).powf(a) } else { f(t) };
            let (w, val, err) = graded_endpoint_panel(&g, hi, width * 0.25, b, false, tol / 4.0)?;
            right_edge = hi - w;
            total += val;
            err_total += err;
        }
        let (mid, mid_err) = adaptive_gk(&full, left_edge, right_edge, tol / 2.0)?;
        total += mid;
        err_total += mid_err;

        if err_total <= rel_tol * total.abs() {
            return Ok(total);
        }
        last = (total, err_total);
        // the whole-interval magnitude overshot; retry against the better one
        scale = (0.5 * total.abs()).max(f64::MIN_POSITIVE);
    }
    Err(Error::QuadratureNoConvergence {
        estimate: last.0,
        error_bound: last.1,
    })
}

/// Shrink a Jacobi panel at `edge` until 24- and 48-point rules agree.
/// Returns (panel width, value, error estimate).
fn graded_endpoint_panel<G: Fn(f64) -> f64>(
    g: &G,
    edge: f64,
    mut width: f64,
    exponent: f64,
    is_left: bool,
    tol: f64,
) -> Result<(f64, f64, f64)> {
    let mut last = (f64::NAN, f64::INFINITY);
    for _ in 0..40 {
        let (lo, hi) = if is_left {
            (edge, edge + width)
        } else {
            (edge - width, edge)
        };
        let (l, r) = if is_left { (exponent, 0.0) } else { (0.0, exponent) };
        let c = jacobi_panel(g, lo, hi, l, r, 24)?;
        let fnl = jacobi_panel(g, lo, hi, l, r, 48)?;
        let err = (fnl - c).abs();
        if err <= tol {
            return Ok((width, fnl, err));
        }
        last = (fnl, err);
        width *= 0.25;
    }
    Err(Error::QuadratureNoConvergence {
        estimate: last.0,
        error_bound: last.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_gamma;

    #[test]
    fn jacobi_weights_integrate_moments() {
        // ∫ (1+u)^b du over [-1,1] = 2^(b+1)/(b+1)
        let b = -0.5;
        let (x, w) = gauss_jacobi(10, 0.0, b).unwrap();
        let s: f64 = w.iter().sum();
        assert!((s - 2f64.powf(b + 1.0) / (b + 1.0)).abs() < 1e-13);
        let m1: f64 = x.iter().zip(&w).map(|(x, w)| w * x).sum();
        // ∫ u (1+u)^b du = 2^(b+2)/(b+2) - 2^(b+1)/(b+1)
        let expect = 2f64.powf(b + 2.0) / (b + 2.0) - 2f64.powf(b + 1.0) / (b + 1.0);
        assert!((m1 - expect).abs() < 1e-13);
    }

    #[test]
    fn inverse_sqrt_on_unit_interval() {
        let spec = QuadratureSpec::new(0.0, 1.0).left(-0.5);
        let v = integrate_singular(|_| 1.0, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn beta_integral() {
        let (a, b) = (0.6, 0.4);
        let spec = QuadratureSpec::new(0.0, 1.0).left(a - 1.0).right(b - 1.0);
        let v = integrate_singular(|_| 1.0, &spec).unwrap();
        let expect = (log_gamma(a).unwrap() + log_gamma(b).unwrap() - log_gamma(1.0).unwrap()).exp();
        assert!((v - expect).abs() < 1e-12 * expect);
    }

    /// Midpoint rule after u = (t-1)^(3/4): dt = (4/3) u^(1/3) du and
    /// (t-1)^(-1/4) = u^(-1/3), so the integrand becomes (4/3)(t+1)^(-1/4).
    fn brute_force_oracle() -> f64 {
        let n = 10_000_000usize;
        let h = 1.0 / n as f64;
        let mut acc = crate::stats::CompensatedSum::default();
        for k in 0..n {
            let u = (k as f64 + 0.5) * h;
            let t = 1.0 + u.powf(4.0 / 3.0);
            acc.add(4.0 / 3.0 * (t + 1.0).powf(-0.25) * h);
        }
        acc.value()
    }

    #[test]
    fn singular_integral_matches_brute_force() {
        let spec = QuadratureSpec::new(1.0, 2.0).left(-0.25);
        let v = integrate_singular(|t: f64| (t + 1.0).powf(-0.25), &spec).unwrap();
        let oracle = brute_force_oracle();
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn long_decaying_interval() {
        // ∫_1^T (t-1)^(-1/4) (t+1)^(-1/4) dt with T large; compare to
        // substitution route handled by adaptive GK alone.
        let spec = QuadratureSpec::new(1.0, 1e4).left(-0.25);
        let v = integrate_singular(|t: f64| (t + 1.0).powf(-0.25), &spec).unwrap();
        // u = (t-1)^(3/4): smooth integrand (4/3)(1 + u^(4/3) + 1)^(-1/4)
        let umax = (1e4f64 - 1.0).powf(0.75);
        let g = |u: f64| 4.0 / 3.0 * (2.0 + u.powf(4.0 / 3.0)).powf(-0.25);
        let (w, _) = adaptive_gk(&g, 0.0, umax, 1e-12).unwrap();
        assert!((v - w).abs() < 1e-9 * w);
    }

    #[test]
    fn additive_over_splits() {
        let f = |t: f64| (t + 1.0).powf(-0.25) * (3.0 - t).powf(0.3);
        let whole = integrate_singular(f, &QuadratureSpec::new(1.0, 2.5).left(-0.25).tol(1e-10)).unwrap();
        let a = integrate_singular(f, &QuadratureSpec::new(1.0, 1.7).left(-0.25).tol(1e-10)).unwrap();
        let b = integrate_singular(
            |t: f64| f(t) * (t - 1.0).powf(-0.25),
            &QuadratureSpec::new(1.7, 2.5).tol(1e-10),
        )
        .unwrap();
        assert!((whole - a - b).abs() <= 2e-10 * whole.abs());
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(integrate_singular(|_| 1.0, &QuadratureSpec::new(1.0, 0.0)).is_err());
        assert!(integrate_singular(|_| 1.0, &QuadratureSpec::new(0.0, 1.0).left(-1.0)).is_err());
    }

    #[test]
    fn non_convergence_carries_estimate() {
        // integrand with an undeclared singularity in the interior
        let spec = QuadratureSpec::new(0.0, 1.0).tol(1e-15);
        let c = std::f64::consts::E / 7.0;
        let err = integrate_singular(|t: f64| (t - c).abs().powf(-0.9) * (t * 37.0).sin(), &spec);
        match err {
            Err(Error::QuadratureNoConvergence { estimate, error_bound }) => {
                assert!(estimate.is_finite());
                assert!(error_bound > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
