//! Sampling criteria: expected improvement, a confidence bound, and the
//! weighted score, all in minimization orientation.
//!
//! The textbook EI and UCB formulas are written for maximization; here
//! every experiment minimizes, so EI uses the margin `f_best - mu` and
//! the confidence bound subtracts its exploration bonus and is selected
//! by argmin. The weighted score combines a min-max-normalized predicted
//! value (0 = lowest prediction) with a min-max-normalized negated
//! distance to the evaluated set (0 = most remote candidate) and is also
//! selected by argmin.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcquisitionKind {
    Ei,
    Ucb,
    Wscore,
}

impl AcquisitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AcquisitionKind::Ei => "ei",
            AcquisitionKind::Ucb => "ucb",
            AcquisitionKind::Wscore => "wscore",
        }
    }
}

impl fmt::Display for AcquisitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AcquisitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ei" => Ok(AcquisitionKind::Ei),
            "ucb" => Ok(AcquisitionKind::Ucb),
            "wscore" => Ok(AcquisitionKind::Wscore),
            _ => Err(Error::UnknownName {
                kind: "acquisition",
                name: s.to_string(),
            }),
        }
    }
}

/// Acquisition selection plus the state the weighted score carries
/// between iterations (its position in the weight cycle).
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionConfig {
    pub kind: AcquisitionKind,
    pub beta_t: f64,
    pub weight_cycle: Vec<f64>,
    pub cycle_position: usize,
}

pub const DEFAULT_BETA_T: f64 = 4.0;
pub const DEFAULT_WEIGHT_CYCLE: [f64; 4] = [0.3, 0.5, 0.8, 0.95];

impl AcquisitionConfig {
    pub fn new(kind: AcquisitionKind) -> Self {
        AcquisitionConfig {
            kind,
            beta_t: DEFAULT_BETA_T,
            weight_cycle: DEFAULT_WEIGHT_CYCLE.to_vec(),
            cycle_position: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_t.is_finite() && self.beta_t > 0.0) {
            return Err(Error::InvalidConfig("beta_t must be positive".to_string()));
        }
        if self.weight_cycle.is_empty() {
            return Err(Error::InvalidConfig("weight cycle must be non-empty".to_string()));
        }
        if self.weight_cycle.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidConfig(
                "weight cycle entries must lie in [0, 1]".to_string(),
            ));
        }
        Ok(())
    }

    /// Current `w_r` of the weight cycle.
    pub fn current_weight(&self) -> f64 {
        self.weight_cycle[self.cycle_position % self.weight_cycle.len()]
    }

    /// Step to the next cycle entry, wrapping around.
    pub fn advance_cycle(&mut self) {
        self.cycle_position = (self.cycle_position + 1) % self.weight_cycle.len();
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * core::f64::consts::PI)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / libm::sqrt(2.0))
}

/// Closed-form expected improvement for minimization:
/// `E[max(0, f_best - N(mu, sigma^2))]`. At `sigma = 0` this degenerates
/// to `max(0, f_best - mu)`.
pub fn expected_improvement(mu: f64, sigma: f64, f_best: f64) -> f64 {
    let margin = f_best - mu;
    if sigma <= 0.0 {
        return margin.max(0.0);
    }
    let z = margin / sigma;
    (margin * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
}

/// Confidence bound for minimization: `mu - sqrt(beta_t) * sigma`,
/// selected by argmin.
pub fn confidence_bound(mu: f64, sigma: f64, beta_t: f64) -> f64 {
    mu - libm::sqrt(beta_t) * sigma
}

fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let span = hi - lo;
    if span <= 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / span).collect()
}

/// Weighted score `W = (1 - w_r) * V_d + w_r * V_r` per candidate, where
/// `V_r` normalizes the predicted values (lowest prediction scores 0) and
/// `V_d` normalizes negated distances to the nearest evaluated point
/// (largest distance scores 0). Lower is better; constant inputs
/// normalize to all zeros.
pub fn weighted_score(pred_values: &[f64], min_distances: &[f64], w_r: f64) -> Result<Vec<f64>> {
    if pred_values.len() != min_distances.len() {
        return Err(Error::DimensionMismatch {
            expected: pred_values.len(),
            got: min_distances.len(),
        });
    }
    if pred_values.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let v_r = min_max_normalize(pred_values);
    let negated: Vec<f64> = min_distances.iter().map(|d| -d).collect();
    let v_d = min_max_normalize(&negated);
    Ok(v_d
        .iter()
        .zip(&v_r)
        .map(|(d, r)| (1.0 - w_r) * d + w_r * r)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Maximize,
    Minimize,
}

/// Candidates with their acquisition scores and the direction in which
/// the scores are preferred.
#[derive(Debug, Clone)]
pub struct ScoredCandidates {
    pub candidates: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
    pub orientation: Orientation,
}

/// Index of the best-scoring candidate; ties go to the lowest index.
pub fn select_candidate(scored: &ScoredCandidates) -> Result<usize> {
    if scored.scores.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    debug_assert_eq!(scored.candidates.len(), scored.scores.len());
    let mut best = 0;
    for (i, s) in scored.scores.iter().enumerate().skip(1) {
        let better = match scored.orientation {
            Orientation::Maximize => *s > scored.scores[best],
            Orientation::Minimize => *s < scored.scores[best],
        };
        if better {
            best = i;
        }
    }
    Ok(best)
}
