//! Stochastic gradient oracles for spiked tensor PCA and single-index
//! regression.

mod link;
mod single_index;
mod tensor_pca;

pub use link::{CustomLink, LinkFunction, LinkSpec};
pub use single_index::SingleIndexModel;
pub use tensor_pca::TensorPcaModel;

use rand::Rng;

/// Correlation with the spike and orthogonal mass of `x`.
pub fn summary(x: &[f64], v: &[f64]) -> (f64, f64) {
    let m = dot(x, v);
    let r2 = (dot(x, x) - m * m).max(0.0);
    (m, r2)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// First canonical basis vector of length `n`.
pub fn canonical_spike(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    if n > 0 {
        v[0] = 1.0;
    }
    v
}

/// The two model families behind one interface.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    TensorPca(TensorPcaModel),
    SingleIndex(SingleIndexModel),
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::TensorPca(m) => m.n,
            ModelSpec::SingleIndex(m) => m.n,
        }
    }

    pub fn spike(&self) -> &[f64] {
        match self {
            ModelSpec::TensorPca(m) => &m.spike,
            ModelSpec::SingleIndex(m) => &m.spike,
        }
    }

    pub fn sample_gradient_into<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        match self {
            ModelSpec::TensorPca(m) => m.sample_gradient_into(x, rng, out),
            ModelSpec::SingleIndex(m) => m.sample_gradient_into(x, rng, out),
        }
    }

    /// Gradient draw at a point with summary `(m, r)`, expressed in the
    /// orthonormal frame `(v, e1, e2, e3)` where `x = m v + r e1`, `e2` is a
    /// caller-chosen direction orthogonal to both, and `e3` carries the
    /// entire remaining component (its coordinate is a nonnegative norm).
    pub fn sample_frame_gradient<R: Rng + ?Sized>(&self, m: f64, r: f64, rng: &mut R) -> [f64; 4] {
        match self {
            ModelSpec::TensorPca(t) => t.sample_frame_gradient(m, r, rng),
            ModelSpec::SingleIndex(s) => s.sample_frame_gradient(m, r, rng),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModelSpec::TensorPca(m) => format!("tensor_pca(n={}, k={}, lambda={})", m.n, m.k, m.lambda),
            ModelSpec::SingleIndex(m) => {
                format!("single_index(n={}, f={}, sigma2={})", m.n, m.link.name(), m.sigma2)
            }
        }
    }
}

/// Norm of the part of an `(n-3)`-dimensional standard Gaussian.
pub(crate) fn rest_norm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
    let dof = n.saturating_sub(3) as f64;
    if dof == 0.0 {
        return 0.0;
    }
    let chi = rand_distr::ChiSquared::new(dof).expect("positive degrees of freedom");
    rng.sample(chi).sqrt()
}
