//! Experiment configuration: a flat `key = value` text format.
//!
//! Grammar (EBNF sketch):
//!
//! ```text
//! config  = { line } ;
//! line    = [ pair ] [ comment ] newline ;
//! pair    = key , "=" , value ;
//! key     = identifier ;
//! value   = scalar | list | range ;
//! list    = scalar , { "," , scalar } ;
//! range   = number , ".." , number ;
//! comment = "#" , { any character } ;
//! ```
//!
//! Keys (defaults in parentheses; `problem` and `dim` are required):
//!
//! | key                 | meaning                                              |
//! |---------------------|------------------------------------------------------|
//! | `problem`           | ackley, rosenbrock, rastrigin, perm, shubert         |
//! | `dim`               | problem dimension                                    |
//! | `policies` (or `policy`) | comma list of fixed, r-rule, grid, rand, hasso-rand, hasso-decay (hasso-rand) |
//! | `acquisition`       | ei, ucb, wscore (ei)                                 |
//! | `repetitions`       | runs per policy (30)                                 |
//! | `base_seed`         | seed of repetition 0 (42)                            |
//! | `budget`            | iterations after the design (400 if dim <= 10, else 500) |
//! | `candidates`        | candidate-set size (1000 if dim <= 10, else 4000)    |
//! | `init_points`       | initial design size (2 * (dim + 1))                  |
//! | `lhs_restarts`      | maximin restarts (50)                                |
//! | `output_dir`        | where CSVs go (hasso-out)                            |
//! | `discretization`    | dynamic or uniform (dynamic)                         |
//! | `lengthscale`       | initial lengthscale (0.5)                            |
//! | `lengthscale_range` | lo..hi of the lengthscale arm (0.05..2.0)            |
//! | `radius`            | initial radius (0.2)                                 |
//! | `radius_range`      | lo..hi of the radius arm (0.01..1.0)                 |
//! | `perturb_prob`      | coordinate perturbation probability (min(20/dim, 1)) |
//! | `matern_nu`         | 0.5, 1.5, or 2.5 (2.5)                               |
//! | `jitter`            | kernel diagonal jitter (1e-8)                        |
//! | `beta_t`            | confidence-bound trade-off (4.0)                     |
//! | `w_cycle`           | comma list of w_r weights (0.3,0.5,0.8,0.95)         |
//! | `perm_beta`         | beta of the Perm problem (0.5)                       |
//! | `grid_levels`       | grid levels per hyperparameter (5)                   |
//! | `record_timing`     | write real step timings, true/false (true)           |
//!
//! Unknown keys are rejected with their line number.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use hasso_core::acquisition::{AcquisitionConfig, AcquisitionKind};
use hasso_core::candidates::{CandidateConfig, CandidateMode};
use hasso_core::engine::{ArmInit, RunConfig};
use hasso_core::hyper::{ExploitDirection, HyperparameterSpec, Scale};
use hasso_core::surrogate::{KernelConfig, MaternNu};
use hasso_core::testbed::{Problem, ProblemId};
use hasso_core::tuner::{PolicyKind, TunerConfig};

/// A fully resolved experiment: one problem/dimension/acquisition panel
/// with one run cell per policy.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub problem: ProblemId,
    pub dim: usize,
    pub policies: Vec<PolicyKind>,
    pub acquisition: AcquisitionKind,
    pub repetitions: usize,
    pub base_seed: u64,
    pub budget: usize,
    pub candidates: usize,
    pub init_points: usize,
    pub lhs_restarts: usize,
    pub output_dir: PathBuf,
    pub mode: CandidateMode,
    pub lengthscale_init: f64,
    pub lengthscale_range: (f64, f64),
    pub radius_init: f64,
    pub radius_range: (f64, f64),
    pub perturb_prob: Option<f64>,
    pub matern_nu: MaternNu,
    pub jitter: f64,
    pub beta_t: f64,
    pub weight_cycle: Vec<f64>,
    pub perm_beta: f64,
    pub grid_levels: usize,
    pub record_timing: bool,
}

impl ExperimentSpec {
    /// Defaults for a problem/dimension pair, following the experiment
    /// protocol (budget 400 with 1000 candidates up to 10-d, 500 with
    /// 4000 above).
    pub fn new(problem: ProblemId, dim: usize) -> Result<Self> {
        Problem::new(problem, dim).map_err(|e| anyhow!("{e}"))?;
        let (budget, candidates) = if dim <= 10 { (400, 1000) } else { (500, 4000) };
        Ok(ExperimentSpec {
            problem,
            dim,
            policies: vec![PolicyKind::HassoRand],
            acquisition: AcquisitionKind::Ei,
            repetitions: 30,
            base_seed: 42,
            budget,
            candidates,
            init_points: 2 * (dim + 1),
            lhs_restarts: 50,
            output_dir: PathBuf::from("hasso-out"),
            mode: CandidateMode::Dynamic,
            lengthscale_init: 0.5,
            lengthscale_range: (0.05, 2.0),
            radius_init: 0.2,
            radius_range: (0.01, 1.0),
            perturb_prob: None,
            matern_nu: MaternNu::FiveHalves,
            jitter: 1e-8,
            beta_t: 4.0,
            weight_cycle: vec![0.3, 0.5, 0.8, 0.95],
            perm_beta: hasso_core::testbed::DEFAULT_PERM_BETA,
            grid_levels: 5,
            record_timing: true,
        })
    }

    /// File stem shared by every output of one policy cell.
    pub fn cell_stem(&self, policy_label: &str) -> String {
        format!(
            "{}-{}d-{}-{}",
            self.problem,
            self.dim,
            self.acquisition,
            policy_label.replace('=', "-")
        )
    }

    pub fn lengthscale_spec(&self) -> Result<HyperparameterSpec> {
        HyperparameterSpec::new(
            "lengthscale",
            self.lengthscale_range.0,
            self.lengthscale_range.1,
            Scale::Linear,
            ExploitDirection::Decrease,
        )
        .map_err(|e| anyhow!("{e}"))
    }

    pub fn radius_spec(&self) -> Result<HyperparameterSpec> {
        HyperparameterSpec::new(
            "radius",
            self.radius_range.0,
            self.radius_range.1,
            Scale::Linear,
            ExploitDirection::Decrease,
        )
        .map_err(|e| anyhow!("{e}"))
    }

    /// The engine configuration for one run of one policy.
    pub fn run_config(&self, policy: PolicyKind, seed: u64) -> Result<RunConfig> {
        let problem = Problem::with_perm_beta(self.problem, self.dim, self.perm_beta)
            .map_err(|e| anyhow!("{e}"))?;
        let mut acquisition = AcquisitionConfig::new(self.acquisition);
        acquisition.beta_t = self.beta_t;
        acquisition.weight_cycle = self.weight_cycle.clone();
        let kernel = KernelConfig::new(self.lengthscale_init, 1.0, self.matern_nu, self.jitter)
            .map_err(|e| anyhow!("{e}"))?;
        let candidates = CandidateConfig::new(
            self.candidates,
            self.radius_init,
            self.perturb_prob
                .unwrap_or_else(|| CandidateConfig::default_perturb_prob(self.dim)),
            self.mode,
        )
        .map_err(|e| anyhow!("{e}"))?;
        let arms = vec![
            ArmInit::new(self.lengthscale_spec()?, self.lengthscale_init),
            ArmInit::new(self.radius_spec()?, self.radius_init),
        ];
        let mut tuner = TunerConfig::for_run(self.dim, self.budget);
        tuner.grid_levels = self.grid_levels;
        let config = RunConfig {
            problem,
            policy,
            acquisition,
            kernel,
            candidates,
            arms,
            budget: self.budget,
            init_points: self.init_points,
            lhs_restarts: self.lhs_restarts,
            seed,
            tuner,
        };
        config.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(config)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, line: usize, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| anyhow!("line {line}: invalid value for `{key}`: {e}"))
}

fn parse_range(key: &str, line: usize, raw: &str) -> Result<(f64, f64)> {
    let (lo, hi) = raw
        .split_once("..")
        .ok_or_else(|| anyhow!("line {line}: `{key}` expects `lo..hi`"))?;
    let lo: f64 = parse_num(key, line, lo.trim())?;
    let hi: f64 = parse_num(key, line, hi.trim())?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        bail!("line {line}: `{key}` range must satisfy lo < hi");
    }
    Ok((lo, hi))
}

/// Parse and fully resolve an experiment file.
pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentSpec> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.split_once('#') {
            Some((before, _)) => before,
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if value.is_empty() {
            bail!("line {line_no}: `{key}` has no value");
        }
        pairs.push((line_no, key, value));
    }

    let find = |name: &str| {
        pairs
            .iter()
            .find(|(_, k, _)| k == name)
            .map(|(l, _, v)| (*l, v.clone()))
    };
    let (pl, problem_raw) = find("problem").ok_or_else(|| anyhow!("missing required key `problem`"))?;
    let problem: ProblemId = problem_raw
        .parse()
        .map_err(|e| anyhow!("line {pl}: {e}"))?;
    let dim = match find("dim") {
        Some((l, v)) => parse_num::<usize>("dim", l, &v)?,
        None if problem == ProblemId::Shubert => 2,
        None => bail!("missing required key `dim`"),
    };
    let mut spec = ExperimentSpec::new(problem, dim)?;

    for (line, key, value) in &pairs {
        let line = *line;
        match key.as_str() {
            "problem" | "dim" => {}
            "policies" | "policy" => {
                let mut policies = Vec::new();
                for item in value.split(',') {
                    let p: PolicyKind = item
                        .trim()
                        .parse()
                        .map_err(|e| anyhow!("line {line}: {e}"))?;
                    if !policies.contains(&p) {
                        policies.push(p);
                    }
                }
                if policies.is_empty() {
                    bail!("line {line}: `policies` needs at least one entry");
                }
                spec.policies = policies;
            }
            "acquisition" => {
                spec.acquisition = value.parse().map_err(|e| anyhow!("line {line}: {e}"))?;
            }
            "repetitions" => {
                spec.repetitions = parse_num("repetitions", line, value)?;
                if spec.repetitions == 0 {
                    bail!("line {line}: `repetitions` must be >= 1");
                }
            }
            "base_seed" => spec.base_seed = parse_num("base_seed", line, value)?,
            "budget" => spec.budget = parse_num("budget", line, value)?,
            "candidates" => spec.candidates = parse_num("candidates", line, value)?,
            "init_points" => spec.init_points = parse_num("init_points", line, value)?,
            "lhs_restarts" => spec.lhs_restarts = parse_num("lhs_restarts", line, value)?,
            "output_dir" => spec.output_dir = PathBuf::from(value),
            "discretization" => {
                spec.mode = value.parse().map_err(|e| anyhow!("line {line}: {e}"))?;
            }
            "lengthscale" => spec.lengthscale_init = parse_num("lengthscale", line, value)?,
            "lengthscale_range" => spec.lengthscale_range = parse_range("lengthscale_range", line, value)?,
            "radius" => spec.radius_init = parse_num("radius", line, value)?,
            "radius_range" => spec.radius_range = parse_range("radius_range", line, value)?,
            "perturb_prob" => spec.perturb_prob = Some(parse_num("perturb_prob", line, value)?),
            "matern_nu" => {
                spec.matern_nu = match value.as_str() {
                    "0.5" | "1/2" => MaternNu::Half,
                    "1.5" | "3/2" => MaternNu::ThreeHalves,
                    "2.5" | "5/2" => MaternNu::FiveHalves,
                    other => bail!("line {line}: `matern_nu` must be 0.5, 1.5, or 2.5 (got {other})"),
                };
            }
            "jitter" => spec.jitter = parse_num("jitter", line, value)?,
            "beta_t" => spec.beta_t = parse_num("beta_t", line, value)?,
            "w_cycle" => {
                let mut cycle = Vec::new();
                for item in value.split(',') {
                    cycle.push(parse_num::<f64>("w_cycle", line, item.trim())?);
                }
                spec.weight_cycle = cycle;
            }
            "perm_beta" => spec.perm_beta = parse_num("perm_beta", line, value)?,
            "grid_levels" => spec.grid_levels = parse_num("grid_levels", line, value)?,
            "record_timing" => {
                spec.record_timing = match value.as_str() {
                    "true" => true,
                    "false" => false,
                    other => bail!("line {line}: `record_timing` must be true or false (got {other})"),
                };
            }
            unknown => bail!("line {line}: unknown key `{unknown}`"),
        }
    }

    validate_spec(&spec)?;
    Ok(spec)
}

fn validate_spec(spec: &ExperimentSpec) -> Result<()> {
    if spec.budget == 0 {
        bail!("`budget` must be >= 1");
    }
    if spec.init_points < 2 {
        bail!("`init_points` must be >= 2");
    }
    if !spec.lengthscale_range.0.is_finite() || spec.lengthscale_range.0 <= 0.0 {
        bail!("`lengthscale_range` must be positive");
    }
    if !(spec.lengthscale_init >= spec.lengthscale_range.0
        && spec.lengthscale_init <= spec.lengthscale_range.1)
    {
        bail!("`lengthscale` must lie inside `lengthscale_range`");
    }
    if !(spec.radius_init >= spec.radius_range.0 && spec.radius_init <= spec.radius_range.1) {
        bail!("`radius` must lie inside `radius_range`");
    }
    if let Some(p) = spec.perturb_prob {
        if !(p > 0.0 && p <= 1.0) {
            bail!("`perturb_prob` must lie in (0, 1]");
        }
    }
    if !spec.beta_t.is_finite() || spec.beta_t <= 0.0 {
        bail!("`beta_t` must be positive");
    }
    if spec.weight_cycle.is_empty() || spec.weight_cycle.iter().any(|w| !(0.0..=1.0).contains(w)) {
        bail!("`w_cycle` entries must lie in [0, 1]");
    }
    // Construct one run config so every cross-field constraint is hit.
    for &policy in &spec.policies {
        spec.run_config(policy, spec.base_seed)?;
    }
    Ok(())
}
