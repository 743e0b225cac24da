//! Test-side oracles, independent of the crate's index and estimators.
#![allow(dead_code)]

use entmetrics::synth::{sample_gaussian, GaussianSpec};
use entmetrics::EmbeddingSet;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared distances from `q` to every row of `set` except `exclude`,
/// sorted by (distance, row index).
pub fn sorted_neighbours(set: &EmbeddingSet, q: &[f64], exclude: Option<usize>) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = (0..set.n())
        .filter(|&i| Some(i) != exclude)
        .map(|i| (d2(set.row(i), q), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all
}

pub fn brute_kth_dist2(set: &EmbeddingSet, q: &[f64], k: usize, exclude: Option<usize>) -> f64 {
    sorted_neighbours(set, q, exclude)[k - 1].0
}

pub fn brute_count(set: &EmbeddingSet, q: &[f64], r2: f64, exclude: Option<usize>) -> usize {
    (0..set.n())
        .filter(|&i| Some(i) != exclude && d2(set.row(i), q) <= r2)
        .count()
}

pub fn gaussian(d: usize, variance: f64, n: usize, seed: u64) -> EmbeddingSet {
    sample_gaussian(&GaussianSpec::centered(d, variance).unwrap(), n, seed)
        .unwrap()
        .embeddings
}

pub fn uniform(n: usize, d: usize, rng: &mut ChaCha8Rng) -> EmbeddingSet {
    EmbeddingSet::new((0..n * d).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect(), d).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_rotation(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    m.qr().q()
}

pub fn rigid(set: &EmbeddingSet, rot: &DMatrix<f64>, shift: &[f64]) -> EmbeddingSet {
    let d = set.d();
    set.map_rows(d, |_, row, out| {
        for i in 0..d {
            out[i] = (0..d).map(|j| rot[(i, j)] * row[j]).sum::<f64>() + shift[i];
        }
    })
    .unwrap()
}

pub fn scaled(set: &EmbeddingSet, c: f64) -> EmbeddingSet {
    set.map_rows(set.d(), |_, row, out| {
        for (o, x) in out.iter_mut().zip(row) {
            *o = c * x;
        }
    })
    .unwrap()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
