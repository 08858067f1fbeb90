//! Sensitivity sweeps: run a non-adaptive policy once per listed value
//! of a single hyperparameter, with shared initial designs across values.

use anyhow::{bail, Result};

use hasso_core::tuner::PolicyKind;

use crate::config::ExperimentSpec;
use crate::experiment::{execute_cells, CellPlan, ExperimentOutcome};

/// One entry of the sweep's value list. `r-rule` is accepted for the
/// radius and swaps the cell's policy to the streak rule instead of
/// pinning a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue {
    Number(f64),
    RRule,
}

impl std::str::FromStr for SweepValue {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "r-rule" {
            return Ok(SweepValue::RRule);
        }
        match s.parse::<f64>() {
            Ok(v) => Ok(SweepValue::Number(v)),
            Err(_) => bail!("sweep values must be numbers or `r-rule` (got `{s}`)"),
        }
    }
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Number(v) => write!(f, "{v}"),
            SweepValue::RRule => write!(f, "r-rule"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    /// Base panel settings; `policies` is ignored in favor of `policy`.
    pub spec: ExperimentSpec,
    /// One of `lengthscale`, `radius`, `beta_t`, `w_r`.
    pub hyperparameter: String,
    pub values: Vec<SweepValue>,
    /// The non-adaptive policy each value runs under.
    pub policy: PolicyKind,
}

/// Validate every value against its hyperparameter's range, then run one
/// cell per value. Fails before any run starts if a value is out of
/// range or the hyperparameter is unknown.
pub fn run_sweep(request: &SweepRequest, workers: usize) -> Result<ExperimentOutcome> {
    if request.values.is_empty() {
        bail!("sweep needs at least one value");
    }
    if request.policy.is_adaptive() {
        bail!("sweeps pin hyperparameters; use a non-adaptive policy");
    }
    for value in &request.values {
        validate_value(&request.spec, &request.hyperparameter, *value)?;
    }
    let mut spec = request.spec.clone();
    if request.hyperparameter == "w_r" {
        // A w_r value only exists inside the weighted score.
        spec.acquisition = hasso_core::acquisition::AcquisitionKind::Wscore;
    }
    let spec = &spec;

    let mut cells = Vec::new();
    for value in &request.values {
        let label = format!("{}={}", request.hyperparameter, value);
        let mut cell_spec = spec.clone();
        let mut policy = request.policy;
        match (request.hyperparameter.as_str(), value) {
            ("lengthscale", SweepValue::Number(v)) => cell_spec.lengthscale_init = *v,
            ("radius", SweepValue::Number(v)) => cell_spec.radius_init = *v,
            ("radius", SweepValue::RRule) => policy = PolicyKind::RRule,
            ("beta_t", SweepValue::Number(v)) => cell_spec.beta_t = *v,
            ("w_r", SweepValue::Number(v)) => cell_spec.weight_cycle = vec![*v],
            _ => unreachable!("validated above"),
        }
        let configs = (0..cell_spec.repetitions)
            .map(|r| cell_spec.run_config(policy, cell_spec.base_seed + r as u64))
            .collect::<Result<Vec<_>>>()?;
        cells.push(CellPlan {
            label,
            policy,
            configs,
            record_timing: cell_spec.record_timing,
        });
    }

    // The cell labels already carry `<hp>=<value>`.
    let title = format!("{}-{}d-{}-sweep", spec.problem, spec.dim, spec.acquisition);
    execute_cells(&spec.output_dir, &title, spec.budget, cells, workers)
}

fn validate_value(spec: &ExperimentSpec, hp: &str, value: SweepValue) -> Result<()> {
    match (hp, value) {
        ("lengthscale", SweepValue::Number(v)) => {
            let (lo, hi) = spec.lengthscale_range;
            if !(v >= lo && v <= hi) {
                bail!("lengthscale {v} is outside [{lo}, {hi}]");
            }
        }
        ("radius", SweepValue::Number(v)) => {
            let (lo, hi) = spec.radius_range;
            if !(v >= lo && v <= hi) {
                bail!("radius {v} is outside [{lo}, {hi}]");
            }
        }
        ("radius", SweepValue::RRule) => {}
        ("beta_t", SweepValue::Number(v)) => {
            if !(v > 0.0 && v.is_finite()) {
                bail!("beta_t {v} must be positive");
            }
        }
        ("w_r", SweepValue::Number(v)) => {
            if !(0.0..=1.0).contains(&v) {
                bail!("w_r {v} is outside [0, 1]");
            }
        }
        (hp, SweepValue::RRule) => bail!("`r-rule` is only meaningful for the radius, not `{hp}`"),
        (hp, _) => bail!("unknown hyperparameter `{hp}` (expected lengthscale, radius, beta_t, or w_r)"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hasso_core::testbed::ProblemId;

    fn base_spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(ProblemId::Ackley, 2).unwrap();
        spec.repetitions = 1;
        spec.budget = 3;
        spec.candidates = 30;
        spec
    }

    #[test]
    fn out_of_range_values_fail_before_any_run() {
        let request = SweepRequest {
            spec: base_spec(),
            hyperparameter: "radius".to_string(),
            values: vec![SweepValue::Number(7.0)],
            policy: PolicyKind::Fixed,
        };
        let err = run_sweep(&request, 1).unwrap_err();
        assert!(format!("{err}").contains("outside"));
    }

    #[test]
    fn unknown_hyperparameter_is_rejected() {
        let request = SweepRequest {
            spec: base_spec(),
            hyperparameter: "kernel".to_string(),
            values: vec![SweepValue::Number(0.5)],
            policy: PolicyKind::Fixed,
        };
        assert!(run_sweep(&request, 1).is_err());
    }

    #[test]
    fn r_rule_token_parses_and_only_applies_to_radius() {
        assert_eq!("r-rule".parse::<SweepValue>().unwrap(), SweepValue::RRule);
        let request = SweepRequest {
            spec: base_spec(),
            hyperparameter: "lengthscale".to_string(),
            values: vec![SweepValue::RRule],
            policy: PolicyKind::Fixed,
        };
        assert!(run_sweep(&request, 1).is_err());
    }
}
