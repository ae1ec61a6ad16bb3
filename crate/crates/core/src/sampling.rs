//! Seeded sampling. Every random draw in the crate goes through
//! [`ChaCha8Rng`] seeded by `seed_from_u64`, which is portable across
//! platforms and stable across releases of `rand_chacha`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{SymMatrix, Vector};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for sub-task `k` of a run seeded with `seed`.
pub fn substream(seed: u64, k: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k + 1);
    r
}

pub fn gaussian_vector(rng: &mut SampleRng, dim: usize) -> Vector {
    Vector::new((0..dim).map(|_| rng.sample(StandardNormal)).collect())
}

/// Uniform point on the Euclidean unit sphere.
pub fn unit_vector(rng: &mut SampleRng, dim: usize) -> Vector {
    loop {
        if let Some(v) = gaussian_vector(rng, dim).normalized() {
            return v;
        }
    }
}

/// Symmetric matrix with independent standard normal upper entries.
pub fn gaussian_symmetric(rng: &mut SampleRng, dim: usize) -> SymMatrix {
    SymMatrix::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Random positive semidefinite matrix `B Bᵀ` of the given rank.
pub fn random_psd(rng: &mut SampleRng, dim: usize, rank: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for _ in 0..rank {
        m = &m + &SymMatrix::outer(&gaussian_vector(rng, dim));
    }
    m
}

/// Integer vector with entries in `[-bound, bound]`, not all zero.
pub fn small_integer_vector(rng: &mut SampleRng, dim: usize, bound: i64) -> Vector {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-bound..=bound) as f64)
            .collect();
        if v.iter().any(|&x| x != 0.0) {
            return Vector::new(v);
        }
    }
}

/// Dyadic rational vector `k / 2^s` with `|k| ≤ bound`, not all zero. These
/// hit ties exactly in floating point.
pub fn dyadic_vector(rng: &mut SampleRng, dim: usize, bound: i64, shift: i32) -> Vector {
    small_integer_vector(rng, dim, bound).scaled(2f64.powi(-shift))
}

pub fn uniform(rng: &mut SampleRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
