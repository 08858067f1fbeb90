//! Global-optimization test problems with known minima.
//!
//! Formula conventions, since the benchmark literature has variants:
//!
//! * Ackley: `-a*exp(-b*sqrt(mean(x_i^2))) - exp(mean(cos(c*x_i))) + a + e`
//!   with `a = 20`, `b = 0.2`, `c = 2π` on `[-32.768, 32.768]^d`; minimum 0
//!   at the origin.
//! * Rosenbrock: `Σ_{i<d} [100(x_{i+1} - x_i^2)^2 + (x_i - 1)^2]` on
//!   `[-5, 10]^d`; minimum 0 at `(1, …, 1)`.
//! * Rastrigin: `10d + Σ [x_i^2 - 10cos(2π x_i)]` on `[-5.12, 5.12]^d`;
//!   minimum 0 at the origin.
//! * Perm: `Σ_i (Σ_j (j + β)(x_j^i - 1/j^i))^2` on `[-d, d]^d`; minimum 0
//!   at `x_j = 1/j`. β defaults to 0.5 and is configurable; the zero
//!   minimum holds for any β.
//! * Shubert (2-d only): `Π_{i=1,2} Σ_{k=1..5} k cos((k+1)x_i + k)` on
//!   `[-10, 10]^2`; global minimum ≈ -186.7309.
//!
//! The domains for Rosenbrock, Rastrigin, and Perm are the standard
//! benchmark boxes; they are conventions, not derived quantities, and can
//! be overridden by constructing a [`Problem`] with custom bounds.

use alloc::string::ToString;
use alloc::vec::Vec;

use core::f64::consts::{E, PI};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::space::Bounds;

pub const DEFAULT_PERM_BETA: f64 = 0.5;

/// Frozen value of the Shubert 2-d global minimum, reproduced by the
/// grid-plus-refinement oracle in the acceptance suite.
pub const SHUBERT_2D_MINIMUM: f64 = -186.7309088310239;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemId {
    Ackley,
    Rosenbrock,
    Rastrigin,
    Perm,
    Shubert,
}

impl ProblemId {
    pub const ALL: [ProblemId; 5] = [
        ProblemId::Ackley,
        ProblemId::Rosenbrock,
        ProblemId::Rastrigin,
        ProblemId::Perm,
        ProblemId::Shubert,
    ];

    /// The lowercase string accepted by the CLI `--problem` flag.
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Ackley => "ackley",
            ProblemId::Rosenbrock => "rosenbrock",
            ProblemId::Rastrigin => "rastrigin",
            ProblemId::Perm => "perm",
            ProblemId::Shubert => "shubert",
        }
    }

    /// Standard benchmark box for this problem at dimension `d`.
    pub fn default_bounds(self, dim: usize) -> Result<Bounds> {
        match self {
            ProblemId::Ackley => Bounds::cube(dim, -32.768, 32.768),
            ProblemId::Rosenbrock => Bounds::cube(dim, -5.0, 10.0),
            ProblemId::Rastrigin => Bounds::cube(dim, -5.12, 5.12),
            ProblemId::Perm => Bounds::cube(dim, -(dim as f64), dim as f64),
            ProblemId::Shubert => Bounds::cube(dim, -10.0, 10.0),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ackley" => Ok(ProblemId::Ackley),
            "rosenbrock" => Ok(ProblemId::Rosenbrock),
            "rastrigin" => Ok(ProblemId::Rastrigin),
            "perm" => Ok(ProblemId::Perm),
            "shubert" => Ok(ProblemId::Shubert),
            _ => Err(Error::UnknownName {
                kind: "problem",
                name: s.to_string(),
            }),
        }
    }
}

/// A concrete instance: a test function at a fixed dimension and domain.
#[derive(Debug, Clone)]
pub struct Problem {
    id: ProblemId,
    dim: usize,
    bounds: Bounds,
    perm_beta: f64,
    known_optimum_value: Option<f64>,
}

impl Problem {
    /// Instance with the standard domain and, where applicable, default β.
    pub fn new(id: ProblemId, dim: usize) -> Result<Self> {
        Problem::with_perm_beta(id, dim, DEFAULT_PERM_BETA)
    }

    pub fn with_perm_beta(id: ProblemId, dim: usize, perm_beta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("problem dimension must be >= 1".to_string()));
        }
        if id == ProblemId::Shubert && dim != 2 {
            return Err(Error::UnsupportedDimension {
                problem: id.as_str(),
                dim,
            });
        }
        if perm_beta <= 0.0 {
            return Err(Error::InvalidConfig("perm beta must be positive".to_string()));
        }
        let bounds = id.default_bounds(dim)?;
        let known = match id {
            ProblemId::Ackley | ProblemId::Rosenbrock | ProblemId::Rastrigin | ProblemId::Perm => {
                Some(0.0)
            }
            ProblemId::Shubert => Some(SHUBERT_2D_MINIMUM),
        };
        Ok(Problem {
            id,
            dim,
            bounds,
            perm_beta,
            known_optimum_value: known,
        })
    }

    pub fn id(&self) -> ProblemId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn perm_beta(&self) -> f64 {
        self.perm_beta
    }

    pub fn known_optimum_value(&self) -> Option<f64> {
        self.known_optimum_value
    }

    /// A point attaining the known optimum, where one is documented.
    pub fn known_minimizer(&self) -> Option<Vec<f64>> {
        match self.id {
            ProblemId::Ackley | ProblemId::Rastrigin => Some(alloc::vec![0.0; self.dim]),
            ProblemId::Rosenbrock => Some(alloc::vec![1.0; self.dim]),
            ProblemId::Perm => Some((1..=self.dim).map(|j| 1.0 / j as f64).collect()),
            ProblemId::Shubert => None,
        }
    }

    /// Evaluate the objective. Pure and deterministic.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(match self.id {
            ProblemId::Ackley => ackley(x),
            ProblemId::Rosenbrock => rosenbrock(x),
            ProblemId::Rastrigin => rastrigin(x),
            ProblemId::Perm => perm(x, self.perm_beta),
            ProblemId::Shubert => shubert2(x),
        })
    }
}

fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let mean_sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let mean_cos = x.iter().map(|v| libm::cos(2.0 * PI * v)).sum::<f64>() / d;
    -20.0 * libm::exp(-0.2 * libm::sqrt(mean_sq)) - libm::exp(mean_cos) + 20.0 + E
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            100.0 * (b - a * a) * (b - a * a) + (a - 1.0) * (a - 1.0)
        })
        .sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * libm::cos(2.0 * PI * v))
            .sum::<f64>()
}

fn perm(x: &[f64], beta: f64) -> f64 {
    let d = x.len();
    let mut total = 0.0;
    for i in 1..=d {
        let mut inner = 0.0;
        for (idx, xj) in x.iter().enumerate() {
            let j = (idx + 1) as f64;
            inner += (j + beta) * (libm::pow(*xj, i as f64) - libm::pow(1.0 / j, i as f64));
        }
        total += inner * inner;
    }
    total
}

fn shubert2(x: &[f64]) -> f64 {
    let factor = |t: f64| {
        (1..=5)
            .map(|k| k as f64 * libm::cos((k as f64 + 1.0) * t + k as f64))
            .sum::<f64>()
    };
    factor(x[0]) * factor(x[1])
}

/// One row of [`problem_catalog`].
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: ProblemId,
    /// `Some(d)` when the problem only exists at a single dimension.
    pub fixed_dimension: Option<usize>,
    /// Per-dimension `[lo, hi]` of the standard domain (the same interval
    /// repeats across dimensions for every problem here).
    pub default_interval: (f64, f64),
    pub known_optimum_value: f64,
}

/// Stable listing of every problem id, its supported dimensions, default
/// domain and known optimum.
pub fn problem_catalog() -> Vec<CatalogEntry> {
    ProblemId::ALL
        .iter()
        .map(|&id| {
            let probe = Problem::new(id, 2).unwrap();
            CatalogEntry {
                id,
                fixed_dimension: (id == ProblemId::Shubert).then_some(2),
                default_interval: (probe.bounds().lower()[0], probe.bounds().upper()[0]),
                known_optimum_value: probe.known_optimum_value().unwrap(),
            }
        })
        .collect()
}
