//! Laplace mechanism primitives and privacy-budget bookkeeping.
//!
//! Every iteration of the private Lloyd loop releases `d` noisy coordinate sums
//! and one noisy count per cluster, all at scale `Δ / ε_iter` with the global
//! sensitivity `Δ = d·r + 1`. Iterations compose sequentially, so a run spends
//! exactly the sum of its schedule shares; [`BudgetLedger`] records that spend.

use std::fmt;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack allowed when comparing summed floating-point shares to a total.
pub const BUDGET_TOLERANCE: f64 = 1e-12;

/// Scale `b` of a zero-mean Laplace distribution.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct LaplaceScale(f64);

impl LaplaceScale {
    pub fn new(b: f64) -> Result<Self> {
        if b > 0.0 && b.is_finite() {
            Ok(Self(b))
        } else {
            Err(Error::invalid(
                "laplace scale",
                format!("must be positive and finite, got {b}"),
            ))
        }
    }

    /// Scale of the mechanism answering a `sensitivity`-bounded query with budget `epsilon`.
    pub fn for_query(sensitivity: f64, epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::invalid(
                "epsilon",
                format!("must be positive, got {epsilon}"),
            ));
        }
        Self::new(sensitivity / epsilon)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Draws one sample from `Lap(b)` by inverse-CDF transform of a uniform variate.
///
/// With `u` uniform on the open interval `(-1/2, 1/2)` the sample is
/// `-b · sgn(u) · ln(1 - 2|u|)`. Exactly one uniform is consumed per draw.
pub fn laplace_sample<R: Rng + ?Sized>(scale: LaplaceScale, rng: &mut R) -> f64 {
    let p: f64 = Open01.sample(rng);
    laplace_inverse_cdf(scale, p)
}

/// Inverse CDF of `Lap(b)` at probability `p ∈ (0, 1)`.
pub fn laplace_inverse_cdf(scale: LaplaceScale, p: f64) -> f64 {
    let u = p - 0.5;
    -scale.0 * u.signum() * (-2.0 * u.abs()).ln_1p()
}

/// CDF of `Lap(b)`.
pub fn laplace_cdf(scale: LaplaceScale, x: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale.0).exp()
    } else {
        1.0 - 0.5 * (-x / scale.0).exp()
    }
}

/// Global sensitivity `d·r + 1` of one iteration's sum and count queries.
pub fn global_sensitivity(dim: usize, r: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::invalid("d", "dimensionality must be at least 1"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(
            "r",
            format!("must be positive and finite, got {r}"),
        ));
    }
    Ok(dim as f64 * r + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulePolicy {
    /// Equal share every iteration.
    Uniform,
    /// Three equal phases with per-iteration weights 1 : 2 : 3.
    Adaptive,
}

impl SchedulePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            SchedulePolicy::Uniform => "uniform",
            SchedulePolicy::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for SchedulePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SchedulePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(SchedulePolicy::Uniform),
            "adaptive" => Ok(SchedulePolicy::Adaptive),
            other => Err(format!(
                "unknown schedule policy `{other}` (expected uniform|adaptive)"
            )),
        }
    }
}

/// Per-iteration split of a total privacy budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetSchedule {
    shares: Vec<f64>,
    total: f64,
    policy: SchedulePolicy,
}

impl BudgetSchedule {
    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn policy(&self) -> SchedulePolicy {
        self.policy
    }

    pub fn iterations(&self) -> usize {
        self.shares.len()
    }
}

/// Splits `epsilon` across `iterations` according to `policy`.
///
/// The adaptive policy needs `iterations` divisible by 3; for 12 iterations it
/// yields four shares each of `ε/24`, `ε/12` and `ε/8`.
pub fn build_schedule(
    epsilon: f64,
    iterations: usize,
    policy: SchedulePolicy,
) -> Result<BudgetSchedule> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(
            "epsilon",
            format!("must be positive and finite, got {epsilon}"),
        ));
    }
    if iterations == 0 {
        return Err(Error::invalid("iterations", "must be at least 1"));
    }
    let shares = match policy {
        SchedulePolicy::Uniform => vec![epsilon / iterations as f64; iterations],
        SchedulePolicy::Adaptive => {
            if !iterations.is_multiple_of(3) {
                return Err(Error::invalid(
                    "iterations",
                    format!("adaptive schedule needs a multiple of 3, got {iterations}"),
                ));
            }
            let phase = iterations / 3;
            // weights 1, 2, 3 per phase; total weight 6·phase
            let denom = (6 * phase) as f64;
            (0..iterations)
                .map(|i| epsilon * (i / phase + 1) as f64 / denom)
                .collect()
        }
    };
    Ok(BudgetSchedule {
        shares,
        total: epsilon,
        policy,
    })
}

/// One iteration's release, as recorded in the ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub iteration: usize,
    pub epsilon: f64,
    pub sensitivity: f64,
    /// Laplace scale used for every value released in this iteration.
    pub scale: f64,
    /// Number of noisy values released.
    pub draws: usize,
}

/// Running account of budget spent under sequential composition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetLedger {
    total: f64,
    consumed: f64,
    entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn new(total: f64) -> Result<Self> {
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::invalid(
                "epsilon",
                format!("must be positive and finite, got {total}"),
            ));
        }
        Ok(Self {
            total,
            consumed: 0.0,
            entries: Vec::new(),
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn consumed(&self) -> f64 {
        self.consumed
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total_draws(&self) -> usize {
        self.entries.iter().map(|e| e.draws).sum()
    }

    /// Records an iteration spending `epsilon` at the given sensitivity.
    pub fn record(
        &mut self,
        iteration: usize,
        epsilon: f64,
        sensitivity: f64,
        draws: usize,
    ) -> Result<&LedgerEntry> {
        let scale = LaplaceScale::for_query(sensitivity, epsilon)?;
        let after = self.consumed + epsilon;
        if after > self.total * (1.0 + BUDGET_TOLERANCE) {
            return Err(Error::BudgetExceeded {
                consumed: self.consumed,
                requested: epsilon,
                total: self.total,
            });
        }
        self.consumed = after;
        self.entries.push(LedgerEntry {
            iteration,
            epsilon,
            sensitivity,
            scale: scale.get(),
            draws,
        });
        Ok(self.entries.last().expect("just pushed"))
    }
}
