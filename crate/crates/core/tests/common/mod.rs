#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Normal};

use dpkmeans_core::{normalize, Dataset};

/// Well separated isotropic blobs, normalized onto `[-1, 1]^dim`.
pub fn gaussian_mixture<R: Rng>(rng: &mut R, n: usize, dim: usize, blobs: usize) -> Dataset {
    let centers: Vec<Vec<f64>> = (0..blobs)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    let spread = Normal::new(0.0, 1.0).unwrap();
    let raw: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let c = &centers[i % blobs];
            c.iter().map(|m| m + spread.sample(rng)).collect()
        })
        .collect();
    normalize("mixture", &raw, 1.0).unwrap()
}

pub fn uniform_points<R: Rng>(rng: &mut R, n: usize, dim: usize, r: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-r..=r)).collect())
        .collect()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let t = a[i] - b[i];
        s += t * t;
    }
    s
}

/// Index of the closest centroid, lowest index on ties.
pub fn nearest(x: &[f64], cs: &[Vec<f64>]) -> usize {
    let mut best = 0;
    for j in 1..cs.len() {
        if sq(x, &cs[j]) < sq(x, &cs[best]) {
            best = j;
        }
    }
    best
}

/// Plain Lloyd for a fixed number of rounds. Empty clusters keep their centroid.
pub fn reference_lloyd(points: &[Vec<f64>], init: &[Vec<f64>], rounds: usize) -> Vec<Vec<f64>> {
    let dim = init[0].len();
    let mut cs = init.to_vec();
    for _ in 0..rounds {
        let mut sums = vec![vec![0.0; dim]; cs.len()];
        let mut counts = vec![0usize; cs.len()];
        for x in points {
            let j = nearest(x, &cs);
            counts[j] += 1;
            for t in 0..dim {
                sums[j][t] += x[t];
            }
        }
        for j in 0..cs.len() {
            if counts[j] > 0 {
                cs[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    cs
}

/// Mean over points of the squared distance to the closest centroid.
pub fn brute_nicv(points: &[Vec<f64>], cs: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for x in points {
        let mut best = f64::INFINITY;
        for c in cs {
            let d: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best {
                best = d;
            }
        }
        total += best;
    }
    total / points.len() as f64
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn laplace_cdf_reference(b: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / b).exp()
    } else {
        1.0 - 0.5 * (-x / b).exp()
    }
}
