//! Hyperparameter configuration policies.
//!
//! Six policies share one propose/feedback protocol. Each iteration the
//! engine asks the policy for a trial configuration, runs one surrogate
//! step with it, and reports back the improvement of the best observed
//! objective value. The bandit policies (`hasso-rand`, `hasso-decay`)
//! hold one Beta(α, β) arm per hyperparameter: a proposal draws a sample
//! from every arm, modifies only the hyperparameter whose draw is
//! largest, and the feedback either keeps the trial configuration and
//! increments that arm's α (improvement) or discards the trial value and
//! increments its β (no improvement).
//!
//! The baselines: `fixed` never changes anything, `r-rule` drives only
//! the radius through the streak rule, `rand` redraws every
//! hyperparameter uniformly each iteration, and `grid` cycles through a
//! Cartesian grid of levels, remembering the best-performing cell at the
//! end of each full pass.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;
use core::str::FromStr;

use crate::candidates::RadiusRuleState;
use crate::error::{Error, Result};
use crate::hyper::{ExploitDirection, HyperparameterState};
use crate::rng::SeededRandom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Fixed,
    RRule,
    Grid,
    Rand,
    HassoRand,
    HassoDecay,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Fixed,
        PolicyKind::RRule,
        PolicyKind::Grid,
        PolicyKind::Rand,
        PolicyKind::HassoRand,
        PolicyKind::HassoDecay,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Fixed => "fixed",
            PolicyKind::RRule => "r-rule",
            PolicyKind::Grid => "grid",
            PolicyKind::Rand => "rand",
            PolicyKind::HassoRand => "hasso-rand",
            PolicyKind::HassoDecay => "hasso-decay",
        }
    }

    /// True for the two bandit policies that keep Beta arms.
    pub fn is_adaptive(self) -> bool {
        matches!(self, PolicyKind::HassoRand | PolicyKind::HassoDecay)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(PolicyKind::Fixed),
            "r-rule" => Ok(PolicyKind::RRule),
            "grid" => Ok(PolicyKind::Grid),
            "rand" => Ok(PolicyKind::Rand),
            "hasso-rand" => Ok(PolicyKind::HassoRand),
            "hasso-decay" => Ok(PolicyKind::HassoDecay),
            _ => Err(Error::UnknownName {
                kind: "policy",
                name: s.to_string(),
            }),
        }
    }
}

/// Knobs for the policy internals that are not per-hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct TunerConfig {
    /// Grid levels per hyperparameter for the `grid` policy.
    pub grid_levels: usize,
    /// Initial decay step as a fraction of each range.
    pub decay_m0: f64,
    /// Per-iteration multiplier of the decay step.
    pub decay_gamma: f64,
    /// Consecutive successes that double the radius (r-rule).
    pub rule_success_threshold: usize,
    /// Consecutive failures that halve the radius (r-rule).
    pub rule_fail_threshold: usize,
    /// The r-rule floor as a fraction of the initial radius.
    pub rule_shrink: f64,
}

impl TunerConfig {
    /// Defaults wired to the run shape: the fail threshold grows with the
    /// dimension and the decay step shrinks to 5% of its initial size by
    /// the end of the budget.
    pub fn for_run(dim: usize, budget: usize) -> Self {
        TunerConfig {
            grid_levels: 5,
            decay_m0: 0.25,
            decay_gamma: decay_gamma_for_budget(budget),
            rule_success_threshold: 3,
            rule_fail_threshold: 5usize.max(dim),
            rule_shrink: 1.0 / 64.0,
        }
    }
}

/// γ such that γ^budget = 0.05.
pub fn decay_gamma_for_budget(budget: usize) -> f64 {
    libm::pow(0.05, 1.0 / budget.max(1) as f64)
}

/// Success statistics of one bandit arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub name: String,
    pub alpha: u32,
    pub beta: u32,
    pub fraction: f64,
}

#[derive(Debug, Clone)]
struct GridState {
    levels: Vec<Vec<f64>>,
    total: usize,
    cursor: usize,
    active_cell: usize,
    completed: usize,
    /// Best running objective level seen while each cell was active,
    /// stored relative to the level at policy creation (feedback only
    /// reports differences, so scores are offset-free).
    cell_scores: Vec<f64>,
    running_level: f64,
    best_cell: Option<usize>,
}

impl GridState {
    fn new(params: &[HyperparameterState], grid_levels: usize) -> GridState {
        let levels: Vec<Vec<f64>> = params
            .iter()
            .map(|p| {
                let (a, b) = (p.spec().lower(), p.spec().upper());
                if grid_levels == 1 {
                    vec![0.5 * (a + b)]
                } else {
                    (0..grid_levels)
                        .map(|i| a + (b - a) * i as f64 / (grid_levels - 1) as f64)
                        .collect()
                }
            })
            .collect();
        let total = levels.iter().map(Vec::len).product::<usize>().max(1);
        GridState {
            levels,
            total,
            cursor: 0,
            active_cell: 0,
            completed: 0,
            cell_scores: vec![f64::INFINITY; total],
            running_level: 0.0,
            best_cell: None,
        }
    }

    /// Row-major decomposition: the last hyperparameter varies fastest.
    fn cell_values(&self, cell: usize) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.levels.len());
        let mut stride = self.total;
        for levels in &self.levels {
            stride /= levels.len();
            values.push(levels[(cell / stride) % levels.len()]);
        }
        values
    }
}

/// One configuration policy and everything it remembers between
/// iterations. Single-owner, updated by value.
#[derive(Debug, Clone)]
pub struct PolicyState {
    kind: PolicyKind,
    params: Vec<HyperparameterState>,
    trial: Vec<f64>,
    last_selected: Option<usize>,
    pending: bool,
    iteration_clock: u64,
    last_improved: bool,
    radius_index: Option<usize>,
    radius_rule: Option<RadiusRuleState>,
    grid: Option<GridState>,
    decay_m0: f64,
    decay_gamma: f64,
}

impl PolicyState {
    pub fn new(
        kind: PolicyKind,
        params: Vec<HyperparameterState>,
        config: &TunerConfig,
    ) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::PolicyState("no hyperparameters configured"));
        }
        let radius_index = params.iter().position(|p| p.spec().name() == "radius");
        let radius_rule = if kind == PolicyKind::RRule {
            let idx = radius_index
                .ok_or(Error::PolicyState("r-rule needs a hyperparameter named `radius`"))?;
            let p = &params[idx];
            let r0 = p.accepted_value();
            let r_min = (r0 * config.rule_shrink).max(p.spec().lower());
            Some(RadiusRuleState::new(
                r0,
                config.rule_fail_threshold,
                config.rule_success_threshold,
                r_min,
                r0,
            )?)
        } else {
            None
        };
        let grid = (kind == PolicyKind::Grid).then(|| GridState::new(&params, config.grid_levels));
        let trial = params.iter().map(HyperparameterState::accepted_value).collect();
        Ok(PolicyState {
            kind,
            params,
            trial,
            last_selected: None,
            pending: false,
            iteration_clock: 0,
            last_improved: false,
            radius_index,
            radius_rule,
            grid,
            decay_m0: config.decay_m0,
            decay_gamma: config.decay_gamma,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn params(&self) -> &[HyperparameterState] {
        &self.params
    }

    pub fn accepted_values(&self) -> Vec<f64> {
        self.params.iter().map(HyperparameterState::accepted_value).collect()
    }

    pub fn trial_values(&self) -> &[f64] {
        &self.trial
    }

    /// Arm index modified by the most recent proposal (bandit kinds only).
    pub fn last_selected_arm(&self) -> Option<usize> {
        self.last_selected
    }

    /// Produce the trial configuration for the next iteration.
    pub fn propose(&mut self, rng: &mut SeededRandom) -> Result<Vec<f64>> {
        let mut trial = self.accepted_values();
        self.last_selected = None;
        match self.kind {
            PolicyKind::Fixed => {}
            PolicyKind::RRule => {
                let idx = self.radius_index.ok_or(Error::PolicyState("radius index lost"))?;
                let rule = self.radius_rule.as_ref().ok_or(Error::PolicyState("radius rule missing"))?;
                trial[idx] = rule.radius();
            }
            PolicyKind::Rand => {
                for (slot, p) in trial.iter_mut().zip(&self.params) {
                    *slot = p.spec().sample(rng);
                }
            }
            PolicyKind::Grid => {
                let grid = self.grid.as_mut().ok_or(Error::PolicyState("grid state missing"))?;
                grid.active_cell = grid.cursor;
                trial = grid.cell_values(grid.active_cell);
                grid.cursor = (grid.cursor + 1) % grid.total;
            }
            PolicyKind::HassoRand | PolicyKind::HassoDecay => {
                let mut best_draw = f64::NEG_INFINITY;
                let mut selected = 0;
                for (j, p) in self.params.iter().enumerate() {
                    let u = rng.beta(f64::from(p.alpha()), f64::from(p.beta()));
                    if u > best_draw {
                        best_draw = u;
                        selected = j;
                    }
                }
                self.last_selected = Some(selected);
                let p = &self.params[selected];
                trial[selected] = if self.kind == PolicyKind::HassoRand {
                    p.spec().sample(rng)
                } else {
                    // Shrinking directional step: exploit after an
                    // improving iteration, explore otherwise.
                    let spec = p.spec();
                    let step = self.decay_m0
                        * (spec.upper() - spec.lower())
                        * libm::pow(self.decay_gamma, self.iteration_clock as f64);
                    let sign = match (spec.exploit_direction(), self.last_improved) {
                        (ExploitDirection::Decrease, true) | (ExploitDirection::Increase, false) => -1.0,
                        (ExploitDirection::Decrease, false) | (ExploitDirection::Increase, true) => 1.0,
                    };
                    spec.clamp(p.accepted_value() + sign * step)
                };
            }
        }
        self.trial = trial.clone();
        self.pending = true;
        self.iteration_clock += 1;
        Ok(trial)
    }

    /// Report the improvement achieved by the last proposal. `imp > 0`
    /// counts as success; zero or negative improvement is failure.
    pub fn feedback(&mut self, imp: f64) -> Result<()> {
        if !self.pending {
            return Err(Error::ProposalMissing);
        }
        self.pending = false;
        let success = imp > 0.0;
        match self.kind {
            PolicyKind::Fixed | PolicyKind::Rand => {}
            PolicyKind::RRule => {
                let idx = self.radius_index.ok_or(Error::PolicyState("radius index lost"))?;
                let rule = self.radius_rule.as_mut().ok_or(Error::PolicyState("radius rule missing"))?;
                rule.update(success);
                let r = rule.radius();
                self.params[idx].set_accepted_value(r);
            }
            PolicyKind::Grid => {
                let grid = self.grid.as_mut().ok_or(Error::PolicyState("grid state missing"))?;
                grid.running_level -= imp;
                let cell = grid.active_cell;
                if grid.running_level < grid.cell_scores[cell] {
                    grid.cell_scores[cell] = grid.running_level;
                }
                grid.completed += 1;
                if grid.completed % grid.total == 0 {
                    let mut best = 0;
                    for (i, score) in grid.cell_scores.iter().enumerate() {
                        if *score < grid.cell_scores[best] {
                            best = i;
                        }
                    }
                    grid.best_cell = Some(best);
                    let values = grid.cell_values(best);
                    for (p, v) in self.params.iter_mut().zip(values) {
                        p.set_accepted_value(v);
                    }
                }
            }
            PolicyKind::HassoRand | PolicyKind::HassoDecay => {
                let k = self.last_selected.ok_or(Error::ProposalMissing)?;
                if success {
                    let trial = self.trial.clone();
                    for (p, v) in self.params.iter_mut().zip(trial) {
                        p.set_accepted_value(v);
                    }
                    self.params[k].record_success();
                } else {
                    self.params[k].record_failure();
                }
            }
        }
        self.last_improved = success;
        Ok(())
    }

    /// Per-arm `(name, α, β, α/(α+β))`; only the bandit kinds keep arms.
    pub fn arms_summary(&self) -> Result<Vec<ArmSummary>> {
        if !self.kind.is_adaptive() {
            return Err(Error::UnsupportedPolicy("arms_summary"));
        }
        Ok(self
            .params
            .iter()
            .map(|p| ArmSummary {
                name: p.spec().name().to_string(),
                alpha: p.alpha(),
                beta: p.beta(),
                fraction: p.success_fraction(),
            })
            .collect())
    }

    /// The grid cell adopted after the most recent full pass, if any.
    pub fn grid_best_cell(&self) -> Option<usize> {
        self.grid.as_ref().and_then(|g| g.best_cell)
    }
}
