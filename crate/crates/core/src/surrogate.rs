//! Gaussian-process surrogate: Matérn kernel, exact fit by Cholesky
//! factorization, posterior mean/variance prediction.
//!
//! Inputs are min-max normalized to the unit cube using the archive
//! bounds, and targets are centered by their mean and scaled by their
//! standard deviation before fitting; one lengthscale range is therefore
//! meaningful across problems, and the kernel amplitude can stay fixed at
//! 1 on the normalized target scale. The lengthscale is supplied by the
//! caller on every fit — there is no marginal-likelihood optimization
//! here, because choosing the lengthscale is exactly the job of the
//! configuration policies.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::archive::Archive;
use crate::error::{Error, Result};
use crate::linalg;
use crate::space::Bounds;

/// Smoothness of the Matérn kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaternNu {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl MaternNu {
    /// Correlation at scaled distance `s = r / lengthscale`.
    fn correlation(self, s: f64) -> f64 {
        match self {
            MaternNu::Half => libm::exp(-s),
            MaternNu::ThreeHalves => {
                let t = libm::sqrt(3.0) * s;
                (1.0 + t) * libm::exp(-t)
            }
            MaternNu::FiveHalves => {
                let t = libm::sqrt(5.0) * s;
                (1.0 + t + t * t / 3.0) * libm::exp(-t)
            }
        }
    }
}

/// Kernel hyperparameters. `lengthscale` is isotropic and lives on the
/// normalized input scale; `amplitude` is the prior variance.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    lengthscale: f64,
    amplitude: f64,
    nu: MaternNu,
    jitter: f64,
}

pub const MIN_JITTER: f64 = 1e-12;

/// Normalized duplicate threshold: training points closer than this are
/// merged, keeping the better objective value.
const DUPLICATE_DISTANCE: f64 = 1e-10;

/// Number of tenfold jitter escalations tried before giving up.
const JITTER_ESCALATIONS: usize = 3;

impl KernelConfig {
    pub fn new(lengthscale: f64, amplitude: f64, nu: MaternNu, jitter: f64) -> Result<Self> {
        if !(lengthscale.is_finite() && lengthscale > 0.0) {
            return Err(Error::InvalidConfig("kernel lengthscale must be positive".to_string()));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidConfig("kernel amplitude must be positive".to_string()));
        }
        if !(jitter.is_finite() && jitter >= MIN_JITTER) {
            return Err(Error::InvalidConfig(alloc::format!(
                "kernel jitter must be at least {MIN_JITTER}"
            )));
        }
        Ok(KernelConfig {
            lengthscale,
            amplitude,
            nu,
            jitter,
        })
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn nu(&self) -> MaternNu {
        self.nu
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn with_lengthscale(&self, lengthscale: f64) -> Result<Self> {
        KernelConfig::new(lengthscale, self.amplitude, self.nu, self.jitter)
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            lengthscale: 0.5,
            amplitude: 1.0,
            nu: MaternNu::FiveHalves,
            jitter: 1e-8,
        }
    }
}

/// Kernel value between two points. Symmetric, positive, equals the
/// amplitude at zero distance.
pub fn kernel_value(x: &[f64], x2: &[f64], config: &KernelConfig) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x2.len(),
        });
    }
    let d_sq: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    let s = libm::sqrt(d_sq) / config.lengthscale;
    Ok(config.amplitude * config.nu.correlation(s))
}

/// A fitted surrogate. Immutable once built; predictions on a shared
/// model are read-only.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    chol: Vec<f64>,
    weights: Vec<f64>,
    bounds: Bounds,
    target_mean: f64,
    target_scale: f64,
    kernel: KernelConfig,
}

impl GpModel {
    /// Fit from scratch on the archived evaluations.
    ///
    /// Near-duplicate points (normalized distance below 1e-10) are merged
    /// keeping the lower objective value. The diagonal jitter starts at
    /// the configured value and escalates tenfold up to three times if
    /// factorization fails.
    pub fn fit(archive: &Archive, config: &KernelConfig) -> Result<Self> {
        if archive.len() < 2 {
            return Err(Error::DegenerateDesign);
        }
        let bounds = archive.bounds().clone();

        let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(archive.len());
        let mut targets: Vec<f64> = Vec::with_capacity(archive.len());
        'next_point: for (p, v) in archive.points().iter().zip(archive.values()) {
            let xn = bounds.normalize(p);
            for (kept, value) in inputs.iter().zip(targets.iter_mut()) {
                let d_sq: f64 = kept.iter().zip(&xn).map(|(a, b)| (a - b) * (a - b)).sum();
                if libm::sqrt(d_sq) < DUPLICATE_DISTANCE {
                    if *v < *value {
                        *value = *v;
                    }
                    continue 'next_point;
                }
            }
            inputs.push(xn);
            targets.push(*v);
        }
        let n = inputs.len();
        if n < 2 {
            return Err(Error::DegenerateDesign);
        }

        let target_mean = targets.iter().sum::<f64>() / n as f64;
        let variance = targets
            .iter()
            .map(|v| (v - target_mean) * (v - target_mean))
            .sum::<f64>()
            / n as f64;
        let mut target_scale = libm::sqrt(variance);
        if target_scale < 1e-12 {
            target_scale = 1.0;
        }
        for v in &mut targets {
            *v = (*v - target_mean) / target_scale;
        }

        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = kernel_value(&inputs[i], &inputs[j], config)?;
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }

        let mut jitter = config.jitter;
        let mut chol = None;
        for escalation in 0..=JITTER_ESCALATIONS {
            if escalation > 0 {
                jitter *= 10.0;
            }
            let mut regularized = gram.clone();
            for i in 0..n {
                regularized[i * n + i] += jitter;
            }
            if let Some(l) = linalg::cholesky(&regularized, n) {
                chol = Some(l);
                break;
            }
        }
        let chol = chol.ok_or(Error::IllConditionedKernel)?;
        let weights = linalg::cholesky_solve(&chol, n, &targets);
        let kernel = KernelConfig {
            jitter,
            ..config.clone()
        };

        Ok(GpModel {
            inputs,
            targets,
            chol,
            weights,
            bounds,
            target_mean,
            target_scale,
            kernel,
        })
    }

    /// Posterior mean (original target units) and standard deviation at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.bounds.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.dim(),
                got: x.len(),
            });
        }
        let xn = self.bounds.normalize(x);
        let n = self.inputs.len();
        let mut k_vec = Vec::with_capacity(n);
        for xi in &self.inputs {
            k_vec.push(kernel_value(xi, &xn, &self.kernel)?);
        }
        let mu_norm: f64 = k_vec.iter().zip(&self.weights).map(|(a, b)| a * b).sum();
        linalg::solve_lower(&self.chol, n, &mut k_vec);
        let reduction: f64 = k_vec.iter().map(|v| v * v).sum();
        let var_norm = self.kernel.amplitude - reduction;
        if var_norm < -1e-8 {
            return Err(Error::NegativeVariance { value: var_norm });
        }
        let sigma_norm = libm::sqrt(var_norm.max(0.0));
        Ok((
            self.target_mean + self.target_scale * mu_norm,
            self.target_scale * sigma_norm,
        ))
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Kernel configuration in effect, including any escalated jitter.
    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    /// Solution of `(K + jitter I) w = f_normalized`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized training inputs after deduplication.
    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    /// Centered and scaled training targets after deduplication.
    pub fn normalized_targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_scale(&self) -> f64 {
        self.target_scale
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }
}
