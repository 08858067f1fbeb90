//! Running experiment cells: seeded repetitions on a bounded worker
//! pool, per-run CSVs, per-cell summaries, arm statistics, and timing.
//!
//! Seeding: repetition `r` of any cell uses `base_seed + r`, so every
//! policy in a panel shares the r-th initial design (the engine derives
//! its optimizer stream from the same seed at a fixed offset, so
//! optimizer draws never overlap design draws). Runs are independent
//! work items; results are collected in job order and all files are
//! written by the coordinator, so any worker count produces bytewise
//! identical outputs.
//!
//! Per-run CSV columns, in order:
//! `run_id,iteration,eval_count,x0..x{d-1},f,best_f,policy,arm,trial_lengthscale,trial_radius,imp,success,step_ms`.
//! `step_ms` is wall-clock and therefore machine-dependent; with
//! `record_timing = false` it is written as zero, which makes repeated
//! runs of the same config bytewise identical including that column.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use hasso_core::engine::{run_optimization, Clock, NullClock, RunConfig, RunTrace};
use hasso_core::tuner::PolicyKind;

use crate::config::ExperimentSpec;

/// Monotonic nanosecond clock for step timing.
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock { start: Instant::now() }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        WallClock::new()
    }
}

impl Clock for WallClock {
    fn now_nanos(&mut self) -> u64 {
        self.start.elapsed().as_nanos() as u64
    }
}

/// One cell to execute: a labelled policy with its per-repetition
/// configs (seeds already assigned).
pub(crate) struct CellPlan {
    pub label: String,
    pub policy: PolicyKind,
    pub configs: Vec<RunConfig>,
    pub record_timing: bool,
}

/// Median and interquartile band of best-so-far values per iteration,
/// plus the raw rows they came from.
#[derive(Debug, Clone)]
pub struct PolicySeries {
    pub label: String,
    pub policy: PolicyKind,
    /// `repetitions x budget` best-so-far values.
    pub best_rows: Vec<Vec<f64>>,
    pub median: Vec<f64>,
    pub q25: Vec<f64>,
    pub q75: Vec<f64>,
    /// Total wall-clock per run, milliseconds.
    pub total_ms: Vec<f64>,
    /// Mean per-iteration wall-clock per run, milliseconds.
    pub mean_step_ms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    /// Panel id, e.g. `ackley-5d-ei`.
    pub title: String,
    pub budget: usize,
    pub series: Vec<PolicySeries>,
}

#[derive(Debug, Clone)]
pub struct RunFailure {
    pub label: String,
    pub run: usize,
    pub message: String,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub table: ConvergenceTable,
    pub failures: Vec<RunFailure>,
    /// Paths of every file written, in write order.
    pub files: Vec<PathBuf>,
}

/// Execute every cell of the spec and write its outputs.
///
/// `workers = 0` uses the default thread count. Failed runs are recorded
/// and the remaining runs still execute and get written; the caller
/// decides the exit status from `failures`.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentOutcome> {
    let mut cells = Vec::new();
    for &policy in &spec.policies {
        let configs = (0..spec.repetitions)
            .map(|r| spec.run_config(policy, spec.base_seed + r as u64))
            .collect::<Result<Vec<_>>>()?;
        cells.push(CellPlan {
            label: policy.to_string(),
            policy,
            configs,
            record_timing: spec.record_timing,
        });
    }
    let title = format!("{}-{}d-{}", spec.problem, spec.dim, spec.acquisition);
    execute_cells(&spec.output_dir, &title, spec.budget, cells, workers)
}

pub(crate) fn execute_cells(
    output_dir: &Path,
    title: &str,
    budget: usize,
    cells: Vec<CellPlan>,
    workers: usize,
) -> Result<ExperimentOutcome> {
    fs::create_dir_all(output_dir)
        .with_context(|| format!("cannot create output directory {}", output_dir.display()))?;

    struct Job<'a> {
        cell: usize,
        run: usize,
        config: &'a RunConfig,
        record_timing: bool,
    }
    let jobs: Vec<Job> = cells
        .iter()
        .enumerate()
        .flat_map(|(ci, cell)| {
            cell.configs.iter().enumerate().map(move |(r, config)| Job {
                cell: ci,
                run: r,
                config,
                record_timing: cell.record_timing,
            })
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| anyhow!("cannot build worker pool: {e}"))?;
    let results: Vec<std::result::Result<RunTrace, hasso_core::Error>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                if job.record_timing {
                    run_optimization(job.config, &mut WallClock::new())
                } else {
                    run_optimization(job.config, &mut NullClock)
                }
            })
            .collect()
    });

    let mut per_cell: Vec<Vec<Option<RunTrace>>> =
        cells.iter().map(|c| vec![None; c.configs.len()]).collect();
    let mut failures = Vec::new();
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(trace) => per_cell[job.cell][job.run] = Some(trace),
            Err(e) => failures.push(RunFailure {
                label: cells[job.cell].label.clone(),
                run: job.run,
                message: e.to_string(),
            }),
        }
    }

    let mut files = Vec::new();
    let mut series = Vec::new();
    for (cell, traces) in cells.iter().zip(per_cell) {
        let stem = format!("{title}-{}", sanitize(&cell.label));
        let complete: Vec<&RunTrace> = traces.iter().flatten().collect();
        for (r, trace) in traces.iter().enumerate() {
            if let Some(trace) = trace {
                let path = output_dir.join(format!("{stem}-run{r:03}.csv"));
                write_run_csv(&path, r, trace, &cell.label)?;
                files.push(path);
            }
        }
        if complete.len() == traces.len() && !complete.is_empty() {
            let s = summarize(&cell.label, cell.policy, &complete, budget);
            let path = output_dir.join(format!("{stem}-summary.csv"));
            write_summary_csv(&path, &s)?;
            files.push(path);
            let path = output_dir.join(format!("{stem}-timing.csv"));
            write_timing_csv(&path, &s)?;
            files.push(path);
            if cell.policy.is_adaptive() {
                let path = output_dir.join(format!("{stem}-arms.csv"));
                write_arms_csv(&path, &complete)?;
                files.push(path);
            }
            series.push(s);
        }
    }

    Ok(ExperimentOutcome {
        table: ConvergenceTable {
            title: title.to_string(),
            budget,
            series,
        },
        failures,
        files,
    })
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c == '=' || c == '/' || c.is_whitespace() { '-' } else { c })
        .collect()
}

/// Linear-interpolation quantile of a sorted slice (the common "type 7"
/// definition).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let idx = p * (sorted.len() - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    let frac = idx - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn summarize(label: &str, policy: PolicyKind, traces: &[&RunTrace], budget: usize) -> PolicySeries {
    let best_rows: Vec<Vec<f64>> = traces
        .iter()
        .map(|t| t.records().iter().map(|r| r.best_value).collect())
        .collect();
    let mut median = Vec::with_capacity(budget);
    let mut q25 = Vec::with_capacity(budget);
    let mut q75 = Vec::with_capacity(budget);
    for t in 0..budget {
        let mut column: Vec<f64> = best_rows.iter().map(|row| row[t]).collect();
        column.sort_by(f64::total_cmp);
        median.push(quantile(&column, 0.5));
        q25.push(quantile(&column, 0.25));
        q75.push(quantile(&column, 0.75));
    }
    let total_ms: Vec<f64> = traces
        .iter()
        .map(|t| t.records().iter().map(|r| r.step_nanos).sum::<u64>() as f64 / 1e6)
        .collect();
    let mean_step_ms: Vec<f64> = traces
        .iter()
        .map(|t| {
            let n = t.records().len().max(1);
            t.records().iter().map(|r| r.step_nanos).sum::<u64>() as f64 / 1e6 / n as f64
        })
        .collect();
    PolicySeries {
        label: label.to_string(),
        policy,
        best_rows,
        median,
        q25,
        q75,
        total_ms,
        mean_step_ms,
    }
}

fn write_run_csv(path: &Path, run_id: usize, trace: &RunTrace, label: &str) -> Result<()> {
    let mut out = String::new();
    let dim = trace.best_point().len();
    out.push_str("run_id,iteration,eval_count");
    for i in 0..dim {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",f,best_f,policy,arm,trial_lengthscale,trial_radius,imp,success,step_ms\n");
    let names = trace.arm_names();
    let ls_idx = names.iter().position(|n| n == "lengthscale");
    let r_idx = names.iter().position(|n| n == "radius");
    for record in trace.records() {
        out.push_str(&format!(
            "{run_id},{},{}",
            record.iteration,
            trace.init_evaluations() + record.iteration
        ));
        for v in &record.point {
            out.push_str(&format!(",{v}"));
        }
        let arm = record
            .selected_arm
            .map(|k| names[k].as_str())
            .unwrap_or("");
        let trial_ls = ls_idx.map(|i| record.trial[i]);
        let trial_r = r_idx.map(|i| record.trial[i]);
        out.push_str(&format!(
            ",{},{},{label},{arm},{},{},{},{},{:.6}\n",
            record.value,
            record.best_value,
            trial_ls.map_or(String::new(), |v| v.to_string()),
            trial_r.map_or(String::new(), |v| v.to_string()),
            record.imp,
            record.success,
            record.step_nanos as f64 / 1e6
        ));
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn write_summary_csv(path: &Path, series: &PolicySeries) -> Result<()> {
    let mut out = String::from("iteration,median,q25,q75\n");
    for t in 0..series.median.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t + 1,
            series.median[t],
            series.q25[t],
            series.q75[t]
        ));
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn write_timing_csv(path: &Path, series: &PolicySeries) -> Result<()> {
    let mut out = String::from("run_id,total_ms,mean_step_ms\n");
    for (r, (total, mean)) in series.total_ms.iter().zip(&series.mean_step_ms).enumerate() {
        out.push_str(&format!("{r},{total:.6},{mean:.6}\n"));
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn write_arms_csv(path: &Path, traces: &[&RunTrace]) -> Result<()> {
    let mut out = String::from("run_id,arm,alpha,beta,fraction\n");
    for (r, trace) in traces.iter().enumerate() {
        if let Some(arms) = trace.arms() {
            for arm in arms {
                out.push_str(&format!(
                    "{r},{},{},{},{}\n",
                    arm.name, arm.alpha, arm.beta, arm.fraction
                ));
            }
        }
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Plain-text timing comparison across the table's series.
pub fn timing_report(table: &ConvergenceTable) -> String {
    let mut out = String::new();
    out.push_str(&format!("timing for {}\n", table.title));
    out.push_str("policy            mean step (ms)   mean total (ms)\n");
    let baseline = table
        .series
        .iter()
        .find(|s| s.policy == PolicyKind::Fixed)
        .map(|s| mean(&s.mean_step_ms));
    for s in &table.series {
        let step = mean(&s.mean_step_ms);
        let total = mean(&s.total_ms);
        let rel = baseline
            .filter(|b| *b > 0.0)
            .map(|b| format!("   ({:+.1}% vs fixed)", (step / b - 1.0) * 100.0))
            .unwrap_or_default();
        out.push_str(&format!("{:<16} {:>14.3} {:>17.3}{rel}\n", s.label, step, total));
    }
    out
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
