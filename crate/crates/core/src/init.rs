//! Data-independent initial centroid selection by rejection sampling.
//!
//! Centroids are drawn uniformly from the inner box `[-r + a, r - a]^d` (so each
//! one keeps margin `a` from the domain boundary) and rejected unless they sit
//! at least `2a` from every centroid already accepted. When a single centroid
//! exhausts its attempt budget the whole selection restarts with a smaller `a`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{squared_distance, CentroidSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitConfig {
    /// Starting separation parameter.
    pub a: f64,
    pub max_attempts_per_centroid: usize,
    pub shrink_factor: f64,
    pub a_floor: f64,
    pub target_count: usize,
}

impl InitConfig {
    pub fn new(target_count: usize) -> Self {
        Self {
            a: 0.5,
            max_attempts_per_centroid: 100,
            shrink_factor: 0.5,
            a_floor: 1e-4,
            target_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_floor > 0.0 && self.a_floor <= self.a && self.a.is_finite()) {
            return Err(Error::invalid(
                "init a",
                format!(
                    "need 0 < a_floor <= a, got a={}, a_floor={}",
                    self.a, self.a_floor
                ),
            ));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(Error::invalid(
                "shrink_factor",
                format!("must lie in (0, 1), got {}", self.shrink_factor),
            ));
        }
        if self.max_attempts_per_centroid == 0 {
            return Err(Error::invalid(
                "max_attempts_per_centroid",
                "must be at least 1",
            ));
        }
        if self.target_count == 0 {
            return Err(Error::invalid("target_count", "must be at least 1"));
        }
        Ok(())
    }
}

/// Selected centroids together with the separation parameter that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitOutcome {
    pub centroids: CentroidSet,
    pub a_used: f64,
}

pub fn select_initial_centroids<R: Rng + ?Sized>(
    cfg: &InitConfig,
    dim: usize,
    r: f64,
    rng: &mut R,
) -> Result<InitOutcome> {
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::invalid("d", "dimensionality must be at least 1"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(
            "r",
            format!("must be positive and finite, got {r}"),
        ));
    }

    let mut a = cfg.a;
    let mut last_attempted = a;
    while a >= cfg.a_floor {
        last_attempted = a;
        if let Some(centroids) = try_select(cfg, dim, r, a, rng) {
            return Ok(InitOutcome {
                centroids: CentroidSet::new(centroids)?,
                a_used: a,
            });
        }
        a *= cfg.shrink_factor;
    }
    Err(Error::InitializationFailed {
        target_count: cfg.target_count,
        dim,
        last_attempted_a: last_attempted,
        floor: cfg.a_floor,
    })
}

fn try_select<R: Rng + ?Sized>(
    cfg: &InitConfig,
    dim: usize,
    r: f64,
    a: f64,
    rng: &mut R,
) -> Option<Vec<Vec<f64>>> {
    let half = r - a;
    if half < 0.0 {
        return None;
    }
    let min_sep2 = 4.0 * a * a;
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(cfg.target_count);
    while chosen.len() < cfg.target_count {
        let mut accepted = false;
        for _ in 0..cfg.max_attempts_per_centroid {
            let candidate: Vec<f64> = (0..dim)
                .map(|_| {
                    if half > 0.0 {
                        rng.random_range(-half..=half)
                    } else {
                        0.0
                    }
                })
                .collect();
            if chosen
                .iter()
                .all(|c| squared_distance(c, &candidate) >= min_sep2)
            {
                chosen.push(candidate);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return None;
        }
    }
    Some(chosen)
}
