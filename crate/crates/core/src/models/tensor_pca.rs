use rand::Rng;
use rand_distr::StandardNormal;

use super::{canonical_spike, dot, rest_norm};
use crate::error::{domain, Result};

/// Spiked tensor PCA of order `k`. The gradient of the sample loss at `x`
/// is Gaussian with mean `-2 lambda k m^{k-1} v + 2 k R^{2k-2} x` and
/// covariance `4k R^{2k-2} I + 4k(k-1) R^{2k-4} x x^T`.
#[derive(Debug, Clone)]
pub struct TensorPcaModel {
    pub n: usize,
    pub k: u32,
    pub lambda: f64,
    pub spike: Vec<f64>,
}

impl TensorPcaModel {
    pub fn new(n: usize, k: u32, lambda: f64) -> Result<Self> {
        if n < 4 {
            return domain("dimension must be at least 4");
        }
        if k < 2 {
            return domain("tensor order must be at least 2");
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return domain("signal strength must be finite and nonnegative");
        }
        Ok(Self { n, k, lambda, spike: canonical_spike(n) })
    }

    fn mean_coefficients(&self, m: f64, rr: f64) -> (f64, f64) {
        let k = self.k as f64;
        let alpha = -2.0 * self.lambda * k * m.powi(self.k as i32 - 1);
        let gamma = 2.0 * k * rr.powi(self.k as i32 - 1);
        (alpha, gamma)
    }

    /// Isotropic and rank-one covariance coefficients at squared norm `rr`.
    pub fn covariance_coefficients(&self, rr: f64) -> (f64, f64) {
        let k = self.k as f64;
        let iso = 4.0 * k * rr.powi(self.k as i32 - 1);
        let rank1 = 4.0 * k * (k - 1.0) * rr.powi(self.k as i32 - 2);
        (iso, rank1)
    }

    pub fn population_gradient(&self, x: &[f64]) -> Vec<f64> {
        let m = dot(x, &self.spike);
        let rr = dot(x, x);
        let (alpha, gamma) = self.mean_coefficients(m, rr);
        x.iter().zip(&self.spike).map(|(xi, vi)| alpha * vi + gamma * xi).collect()
    }

    /// `E|grad L(x)|^2`, the squared norm of the mean plus the trace of the
    /// covariance.
    pub fn expected_sq_norm(&self, x: &[f64]) -> f64 {
        let g = self.population_gradient(x);
        let rr = dot(x, x);
        let (iso, rank1) = self.covariance_coefficients(rr);
        dot(&g, &g) + iso * self.n as f64 + rank1 * rr
    }

    pub fn sample_gradient_into<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        let m = dot(x, &self.spike);
        let rr = dot(x, x);
        let (alpha, gamma) = self.mean_coefficients(m, rr);
        let (iso, rank1) = self.covariance_coefficients(rr);
        let s_iso = iso.sqrt();
        let xi: f64 = rng.sample(StandardNormal);
        let x_coef = gamma + rank1.sqrt() * xi;
        for i in 0..out.len() {
            let z: f64 = rng.sample(StandardNormal);
            out[i] = alpha * self.spike[i] + x_coef * x[i] + s_iso * z;
        }
    }

    pub fn sample_gradient<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.sample_gradient_into(x, rng, &mut out);
        out
    }

    /// Gradient of `|x x^T|^2 - 2 <Y, x x^T>` for an explicitly drawn
    /// `Y = lambda v v^T + W` with iid standard normal `W`. Only `k = 2`.
    pub fn explicit_gradient_k2<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        if self.k != 2 {
            return domain("explicit noise-tensor oracle is implemented for k = 2 only");
        }
        let n = self.n;
        let m = dot(x, &self.spike);
        let rr = dot(x, x);
        let mut wx = vec![0.0; n];
        let mut wtx = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w: f64 = rng.sample(StandardNormal);
                wx[i] += w * x[j];
                wtx[j] += w * x[i];
            }
        }
        Ok((0..n)
            .map(|i| 4.0 * rr * x[i] - 4.0 * self.lambda * m * self.spike[i] - 2.0 * (wx[i] + wtx[i]))
            .collect())
    }

    pub fn sample_frame_gradient<R: Rng + ?Sized>(&self, m: f64, r: f64, rng: &mut R) -> [f64; 4] {
        let rr = m * m + r * r;
        let (alpha, gamma) = self.mean_coefficients(m, rr);
        let (iso, rank1) = self.covariance_coefficients(rr);
        let s_iso = iso.sqrt();
        let xi: f64 = rng.sample(StandardNormal);
        let z_v: f64 = rng.sample(StandardNormal);
        let z_1: f64 = rng.sample(StandardNormal);
        let z_2: f64 = rng.sample(StandardNormal);
        let rho = rest_norm(self.n, rng);
        let x_coef = gamma + rank1.sqrt() * xi;
        [alpha + x_coef * m + s_iso * z_v, x_coef * r + s_iso * z_1, s_iso * z_2, s_iso * rho]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::RunningStats;
    use crate::rng::RngStream;

    #[test]
    fn population_gradient_k2() {
        let t = TensorPcaModel::new(8, 2, 1.5).unwrap();
        let mut x = vec![0.0; 8];
        x[0] = 0.6;
        x[1] = 0.8;
        let g = t.population_gradient(&x);
        // -2*1.5*2*0.6 + 4*0.6 and 4*0.8.
        assert!((g[0] - (-3.6 + 2.4)).abs() < 1e-14);
        assert!((g[1] - 3.2).abs() < 1e-14);
    }

    #[test]
    fn expected_norm_closed_form() {
        for &(k, lambda, m, r) in &[(2u32, 1.0, 0.5, 0.75f64.sqrt()), (3, 2.0, 0.3, 0.9), (4, 0.5, -0.7, 0.2)] {
            let n = 50;
            let t = TensorPcaModel::new(n, k, lambda).unwrap();
            let mut x = vec![0.0; n];
            x[0] = m;
            x[1] = r;
            let rr: f64 = m * m + r * r;
            let kf = k as f64;
            let ki = k as i32;
            let closed = 4.0 * kf * kf
                * (lambda * lambda * m.powi(2 * ki - 2) + rr.powf(2.0 * kf - 1.0)
                    - 2.0 * lambda * m.powi(ki) * rr.powi(ki - 1))
                + 4.0 * (n as f64 + kf - 1.0) * kf * rr.powi(ki - 1);
            assert!((t.expected_sq_norm(&x) - closed).abs() < 1e-10 * closed);
        }
    }

    #[test]
    fn explicit_oracle_matches_structured_law() {
        let n = 6;
        let t = TensorPcaModel::new(n, 2, 1.3).unwrap();
        let x = [0.5, 0.3, -0.2, 0.1, 0.0, 0.4];
        let mut rng = RngStream::new(11, 0).generator();
        let mut a = [RunningStats::new(), RunningStats::new()];
        let mut b = [RunningStats::new(), RunningStats::new()];
        for _ in 0..100_000 {
            let g1 = t.explicit_gradient_k2(&x, &mut rng).unwrap();
            let g2 = t.sample_gradient(&x, &mut rng);
            a[0].push(g1[0]);
            a[1].push(g1[0] * g1[5]);
            b[0].push(g2[0]);
            b[1].push(g2[0] * g2[5]);
        }
        for j in 0..2 {
            let se = (a[j].stderr().powi(2) + b[j].stderr().powi(2)).sqrt();
            assert!((a[j].mean() - b[j].mean()).abs() < 5.0 * se, "moment {j}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TensorPcaModel::new(2, 2, 1.0).is_err());
        assert!(TensorPcaModel::new(10, 1, 1.0).is_err());
        assert!(TensorPcaModel::new(10, 2, -1.0).is_err());
    }
}
