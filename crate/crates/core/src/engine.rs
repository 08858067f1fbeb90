//! The optimization loop: one surrogate step, and the full run that
//! wraps it with a configuration policy.
//!
//! A run starts from a Latin hypercube design of `init_points`
//! evaluations and then iterates `budget` times; the true objective is
//! therefore called exactly `init_points + budget` times. Each iteration
//! asks the policy for a trial hyperparameter configuration, fits the
//! surrogate from scratch with the trial lengthscale, generates
//! candidates with the trial radius, scores them with the configured
//! acquisition, evaluates the selected candidate, and feeds the resulting
//! improvement back to the policy. Only improving iterations overwrite
//! the accepted configuration; a failed trial value is discarded.
//!
//! Randomness is split into two streams derived from the run seed: the
//! initial design uses the seed itself and the optimizer loop uses
//! `seed + 1_000_000`, so harness repetitions can share designs across
//! policies while keeping optimizer draws independent of design draws.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::acquisition::{
    confidence_bound, expected_improvement, select_candidate, weighted_score, AcquisitionConfig,
    AcquisitionKind, Orientation, ScoredCandidates,
};
use crate::archive::{improvement, Archive};
use crate::candidates::{generate_dynamic, generate_uniform, CandidateConfig, CandidateMode};
use crate::doe::lhs_maximin;
use crate::error::{Error, Result};
use crate::hyper::{ExploitDirection, HyperparameterSpec, HyperparameterState, Scale};
use crate::rng::SeededRandom;
use crate::surrogate::{GpModel, KernelConfig};
use crate::testbed::Problem;
use crate::tuner::{ArmSummary, PolicyKind, PolicyState, TunerConfig};

/// Offset between the design stream and the optimizer stream.
pub const OPTIMIZER_STREAM_OFFSET: u64 = 1_000_000;

/// Candidates closer than this to an already-evaluated point are dropped
/// before scoring.
const EXCLUSION_DISTANCE: f64 = 1e-9;

/// Monotonic time source injected by the caller; the core never touches
/// an OS clock. [`NullClock`] stands in where timing is irrelevant.
pub trait Clock {
    fn now_nanos(&mut self) -> u64;
}

/// Always reports zero; step timings come out as zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_nanos(&mut self) -> u64 {
        0
    }
}

/// One tunable hyperparameter with its starting value.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmInit {
    pub spec: HyperparameterSpec,
    pub initial: f64,
}

impl ArmInit {
    pub fn new(spec: HyperparameterSpec, initial: f64) -> Self {
        ArmInit { spec, initial }
    }
}

/// Default lengthscale arm: `[0.05, 2.0]` on normalized inputs, starting
/// at 0.5, with decrease as the exploiting direction.
pub fn default_lengthscale_arm() -> ArmInit {
    ArmInit::new(
        HyperparameterSpec::new("lengthscale", 0.05, 2.0, Scale::Linear, ExploitDirection::Decrease)
            .expect("static spec"),
        0.5,
    )
}

/// Default radius arm: `[0.01, 1.0]` as a fraction of each range,
/// starting at 0.2, with decrease as the exploiting direction.
pub fn default_radius_arm() -> ArmInit {
    ArmInit::new(
        HyperparameterSpec::new("radius", 0.01, 1.0, Scale::Linear, ExploitDirection::Decrease)
            .expect("static spec"),
        0.2,
    )
}

/// Everything one run needs. Construct with [`RunConfig::new`] and adjust
/// fields; dimension-dependent defaults follow the experiment protocol
/// (budget 400 and 1000 candidates up to 10-d, 500 and 4000 above).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    pub policy: PolicyKind,
    pub acquisition: AcquisitionConfig,
    pub kernel: KernelConfig,
    pub candidates: CandidateConfig,
    pub arms: Vec<ArmInit>,
    pub budget: usize,
    pub init_points: usize,
    pub lhs_restarts: usize,
    pub seed: u64,
    pub tuner: TunerConfig,
}

impl RunConfig {
    pub fn new(problem: Problem, policy: PolicyKind) -> Self {
        let d = problem.dim();
        let (budget, candidate_count) = if d <= 10 { (400, 1000) } else { (500, 4000) };
        let candidates = CandidateConfig {
            count: candidate_count,
            radius: 0.2,
            perturb_prob: CandidateConfig::default_perturb_prob(d),
            mode: CandidateMode::Dynamic,
        };
        RunConfig {
            problem,
            policy,
            acquisition: AcquisitionConfig::new(AcquisitionKind::Ei),
            kernel: KernelConfig::default(),
            candidates,
            arms: alloc::vec![default_lengthscale_arm(), default_radius_arm()],
            budget,
            init_points: 2 * (d + 1),
            lhs_restarts: 50,
            seed: 0,
            tuner: TunerConfig::for_run(d, budget),
        }
    }

    /// Change the budget, keeping the decay schedule tied to it.
    pub fn set_budget(&mut self, budget: usize) {
        self.budget = budget;
        self.tuner.decay_gamma = crate::tuner::decay_gamma_for_budget(budget);
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget < 1 {
            return Err(Error::InvalidConfig("budget must be >= 1".to_string()));
        }
        if self.init_points < 2 {
            return Err(Error::InvalidConfig("init_points must be >= 2".to_string()));
        }
        self.acquisition.validate()?;
        for arm in &self.arms {
            if !matches!(arm.spec.name(), "lengthscale" | "radius" | "beta_t") {
                return Err(Error::InvalidConfig(alloc::format!(
                    "hyperparameter `{}` has no attachment point (expected lengthscale, radius, or beta_t)",
                    arm.spec.name()
                )));
            }
        }
        Ok(())
    }

    fn arm_value(&self, values: &[f64], name: &str) -> Option<f64> {
        self.arms
            .iter()
            .position(|a| a.spec.name() == name)
            .map(|i| values[i])
    }
}

/// One row of the run trace.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub point: Vec<f64>,
    pub value: f64,
    pub best_value: f64,
    pub trial: Vec<f64>,
    pub selected_arm: Option<usize>,
    pub imp: f64,
    pub success: bool,
    pub step_nanos: u64,
}

/// Complete record of one optimization run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    init_evaluations: usize,
    records: Vec<IterationRecord>,
    best_point: Vec<f64>,
    best_value: f64,
    arms: Option<Vec<ArmSummary>>,
    arm_names: Vec<alloc::string::String>,
}

impl RunTrace {
    pub fn init_evaluations(&self) -> usize {
        self.init_evaluations
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn best_point(&self) -> &[f64] {
        &self.best_point
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    /// Final arm statistics; `None` for non-bandit policies.
    pub fn arms(&self) -> Option<&[ArmSummary]> {
        self.arms.as_deref()
    }

    /// Hyperparameter names in trial-vector order.
    pub fn arm_names(&self) -> &[alloc::string::String] {
        &self.arm_names
    }

    pub fn total_evaluations(&self) -> usize {
        self.init_evaluations + self.records.len()
    }
}

/// One surrogate-optimization step: fit, discretize, score, select.
///
/// `trial_values` is aligned with `config.arms` and overrides the
/// matching kernel/candidate/acquisition knobs for this step only.
/// `acquisition` carries the weight-cycle position between steps.
pub fn srg_opt_step(
    archive: &Archive,
    trial_values: &[f64],
    config: &RunConfig,
    acquisition: &mut AcquisitionConfig,
    rng: &mut SeededRandom,
) -> Result<Vec<f64>> {
    let kernel = match config.arm_value(trial_values, "lengthscale") {
        Some(l) => config.kernel.with_lengthscale(l)?,
        None => config.kernel.clone(),
    };
    let mut cand_cfg = config.candidates.clone();
    if let Some(r) = config.arm_value(trial_values, "radius") {
        cand_cfg.radius = r;
    }
    let beta_t = config
        .arm_value(trial_values, "beta_t")
        .unwrap_or(acquisition.beta_t);

    let model = GpModel::fit(archive, &kernel)?;
    let (_, f_best) = archive.best()?;
    let bounds = archive.bounds();

    // Generate, then drop anything indistinguishable from an evaluated
    // point; one regeneration attempt before giving up.
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut distances: Vec<f64> = Vec::new();
    for attempt in 0..2 {
        let raw = match cand_cfg.mode {
            CandidateMode::Uniform => generate_uniform(&cand_cfg, bounds, rng),
            CandidateMode::Dynamic => {
                let (center, _) = archive.best()?;
                generate_dynamic(center, &cand_cfg, bounds, rng)
            }
        };
        for c in raw {
            let min_dist = nearest_distance(&c, archive);
            if min_dist >= EXCLUSION_DISTANCE {
                kept.push(c);
                distances.push(min_dist);
            }
        }
        if !kept.is_empty() {
            break;
        }
        if attempt == 1 {
            return Err(Error::EmptyCandidates);
        }
    }

    let mut predictions = Vec::with_capacity(kept.len());
    for c in &kept {
        predictions.push(model.predict(c)?);
    }

    let scored = match acquisition.kind {
        AcquisitionKind::Ei => ScoredCandidates {
            scores: predictions
                .iter()
                .map(|(mu, sigma)| expected_improvement(*mu, *sigma, f_best))
                .collect(),
            candidates: kept,
            orientation: Orientation::Maximize,
        },
        AcquisitionKind::Ucb => ScoredCandidates {
            scores: predictions
                .iter()
                .map(|(mu, sigma)| confidence_bound(*mu, *sigma, beta_t))
                .collect(),
            candidates: kept,
            orientation: Orientation::Minimize,
        },
        AcquisitionKind::Wscore => {
            let w_r = acquisition.current_weight();
            acquisition.advance_cycle();
            let preds: Vec<f64> = predictions.iter().map(|(mu, _)| *mu).collect();
            ScoredCandidates {
                scores: weighted_score(&preds, &distances, w_r)?,
                candidates: kept,
                orientation: Orientation::Minimize,
            }
        }
    };

    let idx = select_candidate(&scored)?;
    Ok(scored.candidates.into_iter().nth(idx).expect("index in range"))
}

fn nearest_distance(candidate: &[f64], archive: &Archive) -> f64 {
    let mut min_sq = f64::INFINITY;
    for p in archive.points() {
        let d_sq: f64 = candidate.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
        if d_sq < min_sq {
            min_sq = d_sq;
        }
    }
    libm::sqrt(min_sq)
}

/// Run the full loop against the configured test problem.
pub fn run_optimization(config: &RunConfig, clock: &mut dyn Clock) -> Result<RunTrace> {
    let problem = config.problem.clone();
    run_optimization_with(config, |x| problem.evaluate(x), clock)
}

/// Run the full loop with a caller-supplied objective (which must agree
/// with the configured problem's bounds).
pub fn run_optimization_with<F>(
    config: &RunConfig,
    mut objective: F,
    clock: &mut dyn Clock,
) -> Result<RunTrace>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    config.validate()?;
    let bounds = config.problem.bounds().clone();
    let mut design_rng = SeededRandom::new(config.seed);
    let mut opt_rng = SeededRandom::new(config.seed.wrapping_add(OPTIMIZER_STREAM_OFFSET));

    let mut archive = Archive::new(bounds.clone());
    let design = lhs_maximin(config.init_points, &bounds, config.lhs_restarts, &mut design_rng);
    for point in design.points() {
        let value = objective(point)?;
        archive.insert(point.clone(), value)?;
    }

    let arms: Vec<HyperparameterState> = config
        .arms
        .iter()
        .map(|a| HyperparameterState::new(a.spec.clone(), a.initial))
        .collect::<Result<_>>()?;
    let arm_names = config
        .arms
        .iter()
        .map(|a| a.spec.name().to_string())
        .collect();
    let mut policy = PolicyState::new(config.policy, arms, &config.tuner)?;
    let mut acquisition = config.acquisition.clone();

    let mut records = Vec::with_capacity(config.budget);
    for t in 1..=config.budget {
        let started = clock.now_nanos();
        let prev_best = archive.best()?.1;
        let trial = policy.propose(&mut opt_rng).map_err(|e| e.at_iteration(t))?;
        let point = srg_opt_step(&archive, &trial, config, &mut acquisition, &mut opt_rng)
            .map_err(|e| e.at_iteration(t))?;
        let value = objective(&point).map_err(|e| e.at_iteration(t))?;
        archive
            .insert(point.clone(), value)
            .map_err(|e| e.at_iteration(t))?;
        let new_best = archive.best()?.1;
        let imp = improvement(prev_best, new_best);
        let success = imp > 0.0;
        policy.feedback(imp).map_err(|e| e.at_iteration(t))?;
        let step_nanos = clock.now_nanos().saturating_sub(started);
        records.push(IterationRecord {
            iteration: t,
            point,
            value,
            best_value: new_best,
            trial,
            selected_arm: policy.last_selected_arm(),
            imp,
            success,
            step_nanos,
        });
    }

    let (best_point, best_value) = archive.best()?;
    Ok(RunTrace {
        init_evaluations: config.init_points,
        records,
        best_point: best_point.to_vec(),
        best_value,
        arms: policy.arms_summary().ok(),
        arm_names,
    })
}
