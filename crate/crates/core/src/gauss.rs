//! Gaussian utilities: moments, Gauss-Hermite quadrature, structured
//! Gaussian sampling and Monte Carlo estimates with standard errors.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Double factorial `j!!` as a float, with `0!! = (-1)!! = 1`.
pub fn double_factorial(j: i64) -> Result<f64> {
    if j < -1 {
        return domain(format!("double factorial undefined for {j}"));
    }
    let mut acc = 1.0;
    let mut i = j;
    while i > 1 {
        acc *= i as f64;
        i -= 2;
    }
    Ok(acc)
}

/// `E[Z^p]` for a standard normal `Z`.
pub fn gaussian_moment(p: u32) -> f64 {
    if p % 2 == 1 {
        0.0
    } else {
        double_factorial(p as i64 - 1).expect("p - 1 >= -1")
    }
}

/// Gauss-Hermite rule normalised for the standard normal density, so that
/// `sum_i w_i f(x_i) ~ E[f(Z)]`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return domain("quadrature order must be positive");
        }
        // Newton iteration on orthonormal Hermite polynomials (physicists'),
        // then rescale to the probabilists' weight.
        const PIM4: f64 = 0.751_125_544_464_942_5;
        let n = order;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut z: f64 = 0.0;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * n as f64 + 1.0).sqrt() - 1.855_75 * (2.0 * n as f64 + 1.0).powf(-0.166_67),
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let nodes = x.iter().map(|v| v * std::f64::consts::SQRT_2).collect();
        let weights = w.iter().map(|v| v / sqrt_pi).collect();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn expect_1d(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `E[f(a1, a2)]` for independent standard normals.
    pub fn expect_2d(&self, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&x1, &w1) in self.nodes.iter().zip(&self.weights) {
            for (&x2, &w2) in self.nodes.iter().zip(&self.weights) {
                let v = f(x1, x2);
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand { a1: x1, a2: x2 });
                }
                acc += w1 * w2 * v;
            }
        }
        Ok(acc)
    }
}

/// Two-dimensional Gauss-Hermite expectation with the given order.
pub fn gh_expect_2d(f: impl Fn(f64, f64) -> f64, order: usize) -> Result<f64> {
    GaussHermite::new(order)?.expect_2d(f)
}

/// Same as [`gh_expect_2d`] but also returns the change observed when the
/// order is doubled, as a crude error estimate.
pub fn gh_expect_2d_with_estimate(
    f: impl Fn(f64, f64) -> f64,
    order: usize,
) -> Result<(f64, f64)> {
    let lo = gh_expect_2d(&f, order)?;
    let hi = gh_expect_2d(&f, 2 * order)?;
    Ok((lo, (hi - lo).abs()))
}

fn check_structured(iso: f64, rank1: f64) -> Result<()> {
    if !(iso >= 0.0) || !(rank1 >= 0.0) {
        return domain(format!("covariance coefficients must be nonnegative, got iso={iso}, rank1={rank1}"));
    }
    Ok(())
}

/// Fills `out` with a draw of `N(mean, iso * I + rank1 * dir dir^T)`.
pub fn fill_structured_gaussian<R: Rng + ?Sized>(
    out: &mut [f64],
    mean: &[f64],
    iso: f64,
    dir: &[f64],
    rank1: f64,
    rng: &mut R,
) -> Result<()> {
    check_structured(iso, rank1)?;
    if mean.len() != out.len() || dir.len() != out.len() {
        return domain("dimension mismatch in structured Gaussian");
    }
    let s_iso = iso.sqrt();
    let xi: f64 = rng.sample(StandardNormal);
    let s_r = rank1.sqrt() * xi;
    for i in 0..out.len() {
        let z: f64 = rng.sample(StandardNormal);
        out[i] = mean[i] + s_iso * z + s_r * dir[i];
    }
    Ok(())
}

pub fn sample_structured_gaussian<R: Rng + ?Sized>(
    mean: &[f64],
    iso: f64,
    dir: &[f64],
    rank1: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; mean.len()];
    fill_structured_gaussian(&mut out, mean, iso, dir, rank1, rng)?;
    Ok(out)
}

/// Monte Carlo estimate of an expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl McEstimate {
    /// Standardised distance to a reference value.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY * d.signum()
        }
    }
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningStats {
    n: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate { mean: self.mean, stderr: self.stderr(), n_samples: self.n }
    }
}

/// Averages `n_samples` draws of `sampler`, failing on the first
/// non-finite value.
pub fn mc_estimate<R: Rng + ?Sized>(
    mut sampler: impl FnMut(&mut R) -> f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    if n_samples < 2 {
        return domain("at least two samples are needed for a standard error");
    }
    let mut acc = RunningStats::new();
    for index in 0..n_samples {
        let v = sampler(rng);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { index });
        }
        acc.push(v);
    }
    Ok(acc.estimate())
}
