use rand::Rng;
use rand_distr::StandardNormal;

use super::{canonical_spike, dot, rest_norm, LinkFunction};
use crate::error::{domain, Result};

/// Single-index regression `y = f(<v, a>) + eps` with Gaussian features and
/// squared loss. The sample gradient is `2 (f(s) - y) f'(s) a`, `s = <x, a>`.
#[derive(Debug, Clone)]
pub struct SingleIndexModel {
    pub n: usize,
    pub link: LinkFunction,
    pub sigma2: f64,
    pub spike: Vec<f64>,
}

impl SingleIndexModel {
    pub fn new(n: usize, link: LinkFunction, sigma2: f64) -> Result<Self> {
        if n < 4 {
            return domain("dimension must be at least 4");
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return domain("noise variance must be finite and nonnegative");
        }
        Ok(Self { n, link, sigma2, spike: canonical_spike(n) })
    }

    fn coefficient(&self, s: f64, t: f64, eps: f64) -> f64 {
        2.0 * (self.link.eval(s) - self.link.eval(t) + eps) * self.link.derivative(s)
    }

    /// Gradient for a given feature vector and label noise.
    pub fn gradient_for(&self, x: &[f64], a: &[f64], eps: f64) -> Vec<f64> {
        let c = self.coefficient(dot(x, a), dot(&self.spike, a), eps);
        a.iter().map(|ai| c * ai).collect()
    }

    fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma2 > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            self.sigma2.sqrt() * z
        } else {
            0.0
        }
    }

    pub fn sample_gradient_into<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        let mut s = 0.0;
        let mut t = 0.0;
        for i in 0..out.len() {
            let a: f64 = rng.sample(StandardNormal);
            out[i] = a;
            s += x[i] * a;
            t += self.spike[i] * a;
        }
        let eps = self.draw_noise(rng);
        let c = self.coefficient(s, t, eps);
        out.iter_mut().for_each(|g| *g *= c);
    }

    pub fn sample_gradient<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.sample_gradient_into(x, rng, &mut out);
        out
    }

    pub fn sample_frame_gradient<R: Rng + ?Sized>(&self, m: f64, r: f64, rng: &mut R) -> [f64; 4] {
        let a_v: f64 = rng.sample(StandardNormal);
        let a_1: f64 = rng.sample(StandardNormal);
        let a_2: f64 = rng.sample(StandardNormal);
        let rho = rest_norm(self.n, rng);
        let eps = self.draw_noise(rng);
        let c = self.coefficient(m * a_v + r * a_1, a_v, eps);
        [c * a_v, c * a_1, c * a_2, c * rho]
    }
}
