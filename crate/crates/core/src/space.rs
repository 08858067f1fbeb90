//! The box domain: per-dimension lower and upper bounds.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A closed hypercube `[lower_1, upper_1] x ... x [lower_d, upper_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidConfig("bounds need at least one dimension".to_string()));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "bounds for dimension {i} must satisfy lower < upper (got [{lo}, {hi}])"
                )));
            }
        }
        Ok(Bounds { lower, upper })
    }

    /// Same `[lo, hi]` interval in every dimension.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Bounds::new(alloc::vec![lo; dim], alloc::vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Width of the interval in dimension `i`.
    pub fn range(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, lo), hi)| *v >= *lo && *v <= *hi)
    }

    /// Like [`Bounds::contains`] but reports which check failed.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (i, v) in x.iter().enumerate() {
            if !(*v >= self.lower[i] && *v <= self.upper[i]) {
                return Err(Error::OutOfBounds { dim: i, value: *v });
            }
        }
        Ok(())
    }

    /// Clamp every coordinate into its interval.
    pub fn clip(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    /// Min-max map into the unit cube.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| (v - self.lower[i]) / self.range(i))
            .collect()
    }
}
