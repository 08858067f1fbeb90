use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hasso_cli::config::{parse_config, ExperimentSpec};
use hasso_cli::experiment::{run_experiment, timing_report, ExperimentOutcome};
use hasso_cli::plot::{read_summaries, render_convergence};
use hasso_cli::sweep::{run_sweep, SweepRequest, SweepValue};
use hasso_core::testbed::ProblemId;
use hasso_core::tuner::PolicyKind;

/// Surrogate-optimization benchmark harness with self-adjusting
/// hyperparameter policies.
#[derive(Parser)]
#[command(name = "hasso", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file: every policy cell, R seeded repetitions
    /// each, CSV outputs.
    Run {
        /// Experiment config (flat key = value file).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one non-adaptive policy per listed hyperparameter value.
    Sweep {
        #[arg(long)]
        problem: ProblemIdArg,
        #[arg(long)]
        dim: usize,
        /// lengthscale, radius, beta_t, or w_r.
        #[arg(long)]
        hp: String,
        /// Comma-separated values; `r-rule` is accepted for the radius.
        #[arg(long)]
        values: String,
        #[arg(long, default_value = "fixed")]
        policy: PolicyArg,
        #[arg(long, default_value = "ei")]
        acquisition: String,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        candidates: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "hasso-out")]
        out: PathBuf,
    },
    /// Render the summary CSVs of a directory into one SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment with timing enabled and print the per-policy
    /// wall-clock comparison.
    BenchTiming {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone)]
struct ProblemIdArg(ProblemId);

impl std::str::FromStr for ProblemIdArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<ProblemId>().map(ProblemIdArg).map_err(|e| e.to_string())
    }
}

#[derive(Clone)]
struct PolicyArg(PolicyKind);

impl std::str::FromStr for PolicyArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<PolicyKind>().map(PolicyArg).map_err(|e| e.to_string())
    }
}

/// Worker count from `HASSO_WORKERS`; 0 (the default) lets the pool pick.
fn workers_from_env() -> Result<usize> {
    match std::env::var("HASSO_WORKERS") {
        Ok(v) => v
            .parse::<usize>()
            .with_context(|| format!("HASSO_WORKERS must be a number (got `{v}`)")),
        Err(_) => Ok(0),
    }
}

fn report(outcome: &ExperimentOutcome) -> Result<()> {
    for series in &outcome.table.series {
        if let Some(last) = series.median.last() {
            println!("{:<24} final median best {last}", series.label);
        }
    }
    println!("wrote {} files", outcome.files.len());
    if !outcome.failures.is_empty() {
        for f in &outcome.failures {
            eprintln!("run failed: {} repetition {}: {}", f.label, f.run, f.message);
        }
        bail!("{} run(s) failed", outcome.failures.len());
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let workers = workers_from_env()?;
    match cli.command {
        Command::Run { config, out } => {
            let mut spec = parse_config(&config)?;
            if let Some(out) = out {
                spec.output_dir = out;
            }
            let outcome = run_experiment(&spec, workers)?;
            report(&outcome)
        }
        Command::Sweep {
            problem,
            dim,
            hp,
            values,
            policy,
            acquisition,
            reps,
            budget,
            candidates,
            seed,
            out,
        } => {
            let mut spec = ExperimentSpec::new(problem.0, dim).map_err(|e| anyhow::anyhow!("{e}"))?;
            spec.acquisition = acquisition.parse().map_err(|e| anyhow::anyhow!("{e}"))?;
            if let Some(r) = reps {
                spec.repetitions = r;
            }
            if let Some(b) = budget {
                spec.budget = b;
            }
            if let Some(c) = candidates {
                spec.candidates = c;
            }
            if let Some(s) = seed {
                spec.base_seed = s;
            }
            spec.output_dir = out;
            let values = values
                .split(',')
                .map(|v| v.trim().parse::<SweepValue>())
                .collect::<Result<Vec<_>>>()?;
            let request = SweepRequest {
                spec,
                hyperparameter: hp,
                values,
                policy: policy.0,
            };
            let outcome = run_sweep(&request, workers)?;
            report(&outcome)
        }
        Command::Plot { input, out } => {
            let table = read_summaries(&input)?;
            render_convergence(&table, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::BenchTiming { config } => {
            let mut spec = parse_config(&config)?;
            spec.record_timing = true;
            let outcome = run_experiment(&spec, workers)?;
            print!("{}", timing_report(&outcome.table));
            if !outcome.failures.is_empty() {
                bail!("{} run(s) failed", outcome.failures.len());
            }
            Ok(())
        }
    }
}
