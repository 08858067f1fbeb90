//! Reference computations used by the test suites (feature `oracle`).
//!
//! Everything here is deliberately written from scratch — its own kernel
//! formulas, its own Gaussian elimination, its own normalization — so a
//! bug in the main code paths cannot hide by also living in the check.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng::SeededRandom;
use crate::surrogate::MaternNu;

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if m[row * n + col].abs() > m[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        let p = m[col * n + col];
        assert!(p != 0.0, "singular system");
        for row in (col + 1)..n {
            let factor = m[row * n + col] / p;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..n {
            s -= m[row * n + k] * x[k];
        }
        x[row] = s / m[row * n + row];
    }
    x
}

fn matern(nu: MaternNu, r: f64, lengthscale: f64, amplitude: f64) -> f64 {
    let s = r / lengthscale;
    amplitude
        * match nu {
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

fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// A GP prediction computed the slow, direct way: normalize, build the
/// full covariance, solve the dense system, and read off mean and
/// standard deviation in original target units.
pub struct DenseGpOracle {
    inputs: Vec<Vec<f64>>,
    weights: Vec<f64>,
    gram: Vec<f64>,
    mean: f64,
    scale: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nu: MaternNu,
    lengthscale: f64,
    amplitude: f64,
}

impl DenseGpOracle {
    #[allow(clippy::too_many_arguments)]
    pub fn fit(
        points: &[Vec<f64>],
        values: &[f64],
        lower: &[f64],
        upper: &[f64],
        nu: MaternNu,
        lengthscale: f64,
        amplitude: f64,
        jitter: f64,
    ) -> Self {
        assert_eq!(points.len(), values.len());
        let n = points.len();
        let inputs: Vec<Vec<f64>> = points
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(i, v)| (v - lower[i]) / (upper[i] - lower[i]))
                    .collect()
            })
            .collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut scale =
            libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64);
        if scale < 1e-12 {
            scale = 1.0;
        }
        let targets: Vec<f64> = values.iter().map(|v| (v - mean) / scale).collect();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut k = matern(nu, distance(&inputs[i], &inputs[j]), lengthscale, amplitude);
                if i == j {
                    k += jitter;
                }
                gram[i * n + j] = k;
            }
        }
        let weights = solve_dense(&gram, n, &targets);
        DenseGpOracle {
            inputs,
            weights,
            gram,
            mean,
            scale,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            nu,
            lengthscale,
            amplitude,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(mu, sigma)` in original target units.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let n = self.inputs.len();
        let xn: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| (v - self.lower[i]) / (self.upper[i] - self.lower[i]))
            .collect();
        let k_vec: Vec<f64> = self
            .inputs
            .iter()
            .map(|xi| matern(self.nu, distance(xi, &xn), self.lengthscale, self.amplitude))
            .collect();
        let mu_norm: f64 = k_vec.iter().zip(&self.weights).map(|(a, b)| a * b).sum();
        // sigma^2 = k(x,x) - k^T (K + jI)^{-1} k via a dense solve.
        let sol = solve_dense(&self.gram, n, &k_vec);
        let reduction: f64 = k_vec.iter().zip(&sol).map(|(a, b)| a * b).sum();
        let var = (self.amplitude - reduction).max(0.0);
        (
            self.mean + self.scale * mu_norm,
            self.scale * libm::sqrt(var),
        )
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..k {
        num *= (n - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// CDF of Beta(a, b) with integer shape parameters, via the binomial sum
/// `P(X <= x) = Σ_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^{a+b-1-j}`.
fn beta_cdf_int(x: f64, a: u64, b: u64) -> f64 {
    let n = a + b - 1;
    (a..=n)
        .map(|j| binomial(n, j) * libm::pow(x, j as f64) * libm::pow(1.0 - x, (n - j) as f64))
        .sum()
}

/// pdf of Beta(a, b) with integer shape parameters.
fn beta_pdf_int(x: f64, a: u64, b: u64) -> f64 {
    // 1/B(a,b) = (a+b-1)! / ((a-1)!(b-1)!) = (a+b-1) * C(a+b-2, a-1)
    let norm = (a + b - 1) as f64 * binomial(a + b - 2, a - 1);
    norm * libm::pow(x, (a - 1) as f64) * libm::pow(1.0 - x, (b - 1) as f64)
}

/// Exact `P(X1 > X2)` for independent `X1 ~ Beta(a1, b1)` and
/// `X2 ~ Beta(a2, b2)` with integer shapes, by Simpson integration of
/// `pdf_1(x) * cdf_2(x)` (a polynomial, so the rule converges fast).
pub fn beta_win_probability(a1: u64, b1: u64, a2: u64, b2: u64) -> f64 {
    let intervals = 20_000usize; // even
    let h = 1.0 / intervals as f64;
    let f = |x: f64| beta_pdf_int(x, a1, b1) * beta_cdf_int(x, a2, b2);
    let mut acc = f(0.0) + f(1.0);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// Monte-Carlo estimate of `E[max(0, f_best - N(mu, sigma^2))]`.
pub fn ei_monte_carlo(mu: f64, sigma: f64, f_best: f64, samples: usize, rng: &mut SeededRandom) -> f64 {
    let mut acc = 0.0;
    for _ in 0..samples {
        let draw = mu + sigma * rng.standard_normal();
        acc += (f_best - draw).max(0.0);
    }
    acc / samples as f64
}

/// Global minimum of the 2-d Shubert product form by a 2001 x 2001 grid
/// over `[-10, 10]^2` followed by coordinate descent with a shrinking
/// step. The grid is evaluated through per-axis factor tables, which is
/// the same set of grid values the naive double loop would produce.
pub fn shubert_grid_minimum() -> f64 {
    let factor = |t: f64| -> f64 {
        (1..=5)
            .map(|k| k as f64 * libm::cos((k as f64 + 1.0) * t + k as f64))
            .sum()
    };
    let n = 2001usize;
    let grid: Vec<f64> = (0..n).map(|i| -10.0 + 20.0 * i as f64 / (n - 1) as f64).collect();
    let s: Vec<f64> = grid.iter().map(|t| factor(*t)).collect();
    let mut best = f64::INFINITY;
    let mut arg = (0.0, 0.0);
    for (i, si) in s.iter().enumerate() {
        for (j, sj) in s.iter().enumerate() {
            let v = si * sj;
            if v < best {
                best = v;
                arg = (grid[i], grid[j]);
            }
        }
    }
    let f = |x: f64, y: f64| factor(x) * factor(y);
    let (mut x, mut y) = arg;
    let mut step = 20.0 / (n - 1) as f64;
    while step > 1e-13 {
        let mut moved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = f(x + dx, y + dy);
            if v < best {
                best = v;
                x += dx;
                y += dy;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best
}
