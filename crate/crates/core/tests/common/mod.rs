#![allow(dead_code)]

use manifold_mean_core::linalg::orthonormalize_columns;
use manifold_mean_core::{Matrix64, Subspace64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix64 {
    Matrix64::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_subspace(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Subspace64 {
    Subspace64::span(&gaussian(rng, n, k)).unwrap()
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix64 {
    orthonormalize_columns(&gaussian(rng, n, n))
}

/// `base` tilted towards random directions by a graph map of norm at most `size`.
pub fn nearby_subspace(rng: &mut ChaCha8Rng, base: &Subspace64, size: f64) -> Subspace64 {
    let (n, k) = (base.ambient_dim(), base.dim());
    let u = gaussian(rng, n - k, k);
    let scale = size * rng.random::<f64>() / u.operator_norm().max(1e-300);
    manifold_mean_core::grassmann::graph_subspace(base, &u.scale(scale)).unwrap()
}

pub fn to_na(m: &Matrix64) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// A fixed direction of motion on the Grassmannian: the graph of `mu · u`
/// over a subspace.
pub struct Direction {
    u: Matrix64,
}

impl Direction {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Self {
        let speed = rng.random::<f64>();
        let u = gaussian(rng, n - k, k);
        let norm = u.operator_norm();
        Self { u: u.scale(speed / norm) }
    }

    pub fn moved(&self, s: &Subspace64, mu: f64) -> Subspace64 {
        manifold_mean_core::grassmann::graph_subspace(s, &self.u.scale(mu)).unwrap()
    }
}
