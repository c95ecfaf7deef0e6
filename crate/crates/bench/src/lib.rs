//! Synthetic workloads shared by the benchmarks.

use dpkmeans_core::{normalize, select_initial_centroids, CentroidSet, Dataset, InitConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `len` points in `dim` dimensions scattered around `blobs` random centers,
/// normalized onto `[-1, 1]^dim`.
pub fn blob_dataset(len: usize, dim: usize, blobs: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..blobs)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    let raw: Vec<Vec<f64>> = (0..len)
        .map(|i| {
            centers[i % blobs]
                .iter()
                .map(|c| c + rng.random_range(-2.0..2.0))
                .collect()
        })
        .collect();
    normalize("blobs", &raw, 1.0).expect("finite synthetic data")
}

pub fn initial_centroids(count: usize, dim: usize, seed: u64) -> CentroidSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    select_initial_centroids(&InitConfig::new(count), dim, 1.0, &mut rng)
        .expect("initialization")
        .centroids
}

/// Random noisy counts in roughly the range a small dataset produces.
pub fn noisy_counts(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(-50.0..400.0)).collect()
}
