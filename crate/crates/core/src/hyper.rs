//! Tunable algorithmic hyperparameters and their bandit state.

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};
use crate::rng::SeededRandom;

/// How values are spread over the range when drawn or stepped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Logarithmic,
}

/// Which direction of change corresponds to more exploitation. Only the
/// decay policy consults this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExploitDirection {
    Decrease,
    Increase,
}

/// One tunable hyperparameter: a name, a closed range, and the metadata
/// the update rules need.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperparameterSpec {
    name: String,
    lower: f64,
    upper: f64,
    scale: Scale,
    exploit_direction: ExploitDirection,
}

impl HyperparameterSpec {
    pub fn new(
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        scale: Scale,
        exploit_direction: ExploitDirection,
    ) -> Result<Self> {
        let name = name.into();
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidConfig(format!(
                "hyperparameter `{name}` range must satisfy lower < upper (got [{lower}, {upper}])"
            )));
        }
        if scale == Scale::Logarithmic && lower <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "hyperparameter `{name}` uses a logarithmic scale and needs lower > 0"
            )));
        }
        Ok(HyperparameterSpec {
            name,
            lower,
            upper,
            scale,
            exploit_direction,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn exploit_direction(&self) -> ExploitDirection {
        self.exploit_direction
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower && value <= self.upper
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.lower, self.upper)
    }

    /// Uniform draw over the range, on the configured scale.
    pub fn sample(&self, rng: &mut SeededRandom) -> f64 {
        match self.scale {
            Scale::Linear => rng.uniform(self.lower, self.upper),
            Scale::Logarithmic => {
                let v = rng.uniform(libm::log(self.lower), libm::log(self.upper));
                self.clamp(libm::exp(v))
            }
        }
    }
}

/// A hyperparameter together with its currently accepted value and the
/// Beta(α, β) success counts of its bandit arm.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperparameterState {
    spec: HyperparameterSpec,
    accepted_value: f64,
    alpha: u32,
    beta: u32,
}

impl HyperparameterState {
    /// Fresh arm: α = β = 1 (uniform prior, no preference).
    pub fn new(spec: HyperparameterSpec, initial_value: f64) -> Result<Self> {
        HyperparameterState::with_counts(spec, initial_value, 1, 1)
    }

    /// Arm with explicit success/failure counts (both must be >= 1).
    pub fn with_counts(
        spec: HyperparameterSpec,
        initial_value: f64,
        alpha: u32,
        beta: u32,
    ) -> Result<Self> {
        if !spec.contains(initial_value) {
            return Err(Error::InvalidConfig(format!(
                "initial value {initial_value} for `{}` is outside [{}, {}]",
                spec.name, spec.lower, spec.upper
            )));
        }
        if alpha < 1 || beta < 1 {
            return Err(Error::InvalidConfig(format!(
                "shape counts for `{}` must be >= 1 (got alpha = {alpha}, beta = {beta})",
                spec.name
            )));
        }
        Ok(HyperparameterState {
            spec,
            accepted_value: initial_value,
            alpha,
            beta,
        })
    }

    pub fn spec(&self) -> &HyperparameterSpec {
        &self.spec
    }

    pub fn accepted_value(&self) -> f64 {
        self.accepted_value
    }

    pub(crate) fn set_accepted_value(&mut self, value: f64) {
        debug_assert!(self.spec.contains(value));
        self.accepted_value = value;
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    pub(crate) fn record_success(&mut self) {
        self.alpha += 1;
    }

    pub(crate) fn record_failure(&mut self) {
        self.beta += 1;
    }

    /// Fraction of successes, α / (α + β).
    pub fn success_fraction(&self) -> f64 {
        f64::from(self.alpha) / f64::from(self.alpha + self.beta)
    }
}
