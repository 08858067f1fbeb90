//! Discretization of the solution space: uniform random candidates and
//! dynamic-coordinate perturbation around the best known solution, plus
//! the streak-based radius rule used by the r-rule baseline.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::SeededRandom;
use crate::space::Bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateMode {
    Uniform,
    Dynamic,
}

impl core::str::FromStr for CandidateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CandidateMode::Uniform),
            "dynamic" => Ok(CandidateMode::Dynamic),
            _ => Err(Error::UnknownName {
                kind: "discretization",
                name: s.to_string(),
            }),
        }
    }
}

/// How the candidate set is generated each iteration.
///
/// `radius` is a fraction of each dimension's range and sets the standard
/// deviation of dynamic perturbations; `perturb_prob` is the probability
/// that a coordinate is perturbed at all.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateConfig {
    pub count: usize,
    pub radius: f64,
    pub perturb_prob: f64,
    pub mode: CandidateMode,
}

impl CandidateConfig {
    pub fn new(count: usize, radius: f64, perturb_prob: f64, mode: CandidateMode) -> Result<Self> {
        if count < 1 {
            return Err(Error::InvalidConfig("candidate count must be >= 1".to_string()));
        }
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidConfig("radius must be non-negative".to_string()));
        }
        if !(perturb_prob > 0.0 && perturb_prob <= 1.0) {
            return Err(Error::InvalidConfig("perturb_prob must lie in (0, 1]".to_string()));
        }
        Ok(CandidateConfig {
            count,
            radius,
            perturb_prob,
            mode,
        })
    }

    /// The conventional coordinate-perturbation probability, min(20/d, 1).
    pub fn default_perturb_prob(dim: usize) -> f64 {
        (20.0 / dim as f64).min(1.0)
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        CandidateConfig {
            radius,
            ..self.clone()
        }
    }
}

/// `count` points drawn i.i.d. uniformly in the box.
pub fn generate_uniform(
    config: &CandidateConfig,
    bounds: &Bounds,
    rng: &mut SeededRandom,
) -> Vec<Vec<f64>> {
    let d = bounds.dim();
    (0..config.count)
        .map(|_| {
            (0..d)
                .map(|i| rng.uniform(bounds.lower()[i], bounds.upper()[i]))
                .collect()
        })
        .collect()
}

/// `count` points built from `center` by perturbing a random subset of
/// coordinates with Gaussian noise of standard deviation
/// `radius * range_i`, clipped to the bounds. At least one coordinate is
/// always perturbed.
pub fn generate_dynamic(
    center: &[f64],
    config: &CandidateConfig,
    bounds: &Bounds,
    rng: &mut SeededRandom,
) -> Vec<Vec<f64>> {
    debug_assert!(bounds.contains(center));
    let d = bounds.dim();
    let mut out = Vec::with_capacity(config.count);
    let mut mask = vec![false; d];
    for _ in 0..config.count {
        let mut any = false;
        for m in mask.iter_mut() {
            *m = rng.next_f64() < config.perturb_prob;
            any |= *m;
        }
        if !any {
            mask[rng.index(d)] = true;
        }
        let mut x = center.to_vec();
        for i in 0..d {
            if mask[i] {
                x[i] += rng.standard_normal() * config.radius * bounds.range(i);
            }
        }
        bounds.clip(&mut x);
        out.push(x);
    }
    out
}

/// Streak-based halving/doubling of the radius: enough consecutive
/// failures halve it, enough consecutive successes double it, both
/// clamped to `[r_min, r_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusRuleState {
    radius: f64,
    consecutive_failures: usize,
    consecutive_successes: usize,
    fail_threshold: usize,
    success_threshold: usize,
    r_min: f64,
    r_max: f64,
}

impl RadiusRuleState {
    pub fn new(
        radius: f64,
        fail_threshold: usize,
        success_threshold: usize,
        r_min: f64,
        r_max: f64,
    ) -> Result<Self> {
        if !(r_min <= radius && radius <= r_max) {
            return Err(Error::InvalidConfig(
                "radius rule needs r_min <= radius <= r_max".to_string(),
            ));
        }
        if fail_threshold == 0 || success_threshold == 0 {
            return Err(Error::InvalidConfig(
                "radius rule thresholds must be >= 1".to_string(),
            ));
        }
        Ok(RadiusRuleState {
            radius,
            consecutive_failures: 0,
            consecutive_successes: 0,
            fail_threshold,
            success_threshold,
            r_min,
            r_max,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Record one success/failure outcome and apply the factor-2 update
    /// when a streak reaches its threshold.
    pub fn update(&mut self, success: bool) {
        if success {
            self.consecutive_successes += 1;
            self.consecutive_failures = 0;
            if self.consecutive_successes >= self.success_threshold {
                self.radius = (self.radius * 2.0).min(self.r_max);
                self.consecutive_successes = 0;
            }
        } else {
            self.consecutive_failures += 1;
            self.consecutive_successes = 0;
            if self.consecutive_failures >= self.fail_threshold {
                self.radius = (self.radius / 2.0).max(self.r_min);
                self.consecutive_failures = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_candidates_cover_the_box() {
        let bounds = Bounds::cube(3, 0.0, 1.0).unwrap();
        let config = CandidateConfig::new(1000, 0.2, 1.0, CandidateMode::Uniform).unwrap();
        let mut rng = SeededRandom::new(41);
        let pts = generate_uniform(&config, &bounds, &mut rng);
        assert_eq!(pts.len(), 1000);
        for i in 0..3 {
            let mean: f64 = pts.iter().map(|p| p[i]).sum::<f64>() / pts.len() as f64;
            assert!((mean - 0.5).abs() < 0.05, "dimension {i} mean {mean}");
        }
        assert!(pts.iter().all(|p| bounds.contains(p)));
    }

    #[test]
    fn uniform_is_deterministic_per_seed() {
        let bounds = Bounds::cube(2, -3.0, 4.0).unwrap();
        let config = CandidateConfig::new(50, 0.2, 1.0, CandidateMode::Uniform).unwrap();
        let a = generate_uniform(&config, &bounds, &mut SeededRandom::new(5));
        let b = generate_uniform(&config, &bounds, &mut SeededRandom::new(5));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_radius_collapses_to_center() {
        let bounds = Bounds::cube(4, 0.0, 1.0).unwrap();
        let config = CandidateConfig::new(20, 0.0, 0.5, CandidateMode::Dynamic).unwrap();
        let center = [0.3, 0.7, 0.1, 0.9];
        let mut rng = SeededRandom::new(6);
        for p in generate_dynamic(&center, &config, &bounds, &mut rng) {
            assert_eq!(p, center.to_vec());
        }
    }

    #[test]
    fn candidates_respect_bounds_over_100k_trials() {
        let bounds = Bounds::cube(2, -1.0, 1.0).unwrap();
        let mut rng = SeededRandom::new(7);
        let dynamic = CandidateConfig::new(90_000, 0.5, 1.0, CandidateMode::Dynamic).unwrap();
        let pts = generate_dynamic(&[0.9, -0.9], &dynamic, &bounds, &mut rng);
        assert!(pts.iter().all(|p| bounds.contains(p)));
        let uniform = CandidateConfig::new(10_000, 0.5, 1.0, CandidateMode::Uniform).unwrap();
        let pts = generate_uniform(&uniform, &bounds, &mut rng);
        assert!(pts.iter().all(|p| bounds.contains(p)));
    }

    #[test]
    fn at_least_one_coordinate_is_perturbed() {
        let bounds = Bounds::cube(10, 0.0, 1.0).unwrap();
        let config = CandidateConfig::new(2000, 0.1, 0.01, CandidateMode::Dynamic).unwrap();
        let center = [0.5; 10];
        let mut rng = SeededRandom::new(8);
        for p in generate_dynamic(&center, &config, &bounds, &mut rng) {
            assert!(
                p.iter().zip(&center).any(|(a, b)| a != b),
                "candidate equals center"
            );
        }
    }

    #[test]
    fn perturb_prob_one_perturbs_every_coordinate() {
        let bounds = Bounds::cube(5, 0.0, 1.0).unwrap();
        let config = CandidateConfig::new(500, 0.1, 1.0, CandidateMode::Dynamic).unwrap();
        let center = [0.5; 5];
        let mut rng = SeededRandom::new(9);
        for p in generate_dynamic(&center, &config, &bounds, &mut rng) {
            assert!(p.iter().zip(&center).all(|(a, b)| a != b));
        }
    }

    #[test]
    fn perturbation_magnitude_matches_the_half_normal_mean() {
        // Small radius at the center of the box, so clipping never bites
        // and |x_i - c_i| is exactly |N(0, (radius * range)^2)|, whose
        // mean is radius * range * sqrt(2/pi).
        let bounds = Bounds::cube(2, 0.0, 1.0).unwrap();
        let radius = 0.01;
        let config = CandidateConfig::new(100_000, radius, 1.0, CandidateMode::Dynamic).unwrap();
        let center = [0.5, 0.5];
        let mut rng = SeededRandom::new(10);
        let pts = generate_dynamic(&center, &config, &bounds, &mut rng);
        let mut sum = 0.0;
        let mut count = 0usize;
        for p in &pts {
            for (a, c) in p.iter().zip(&center) {
                sum += (a - c).abs();
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let expected = radius * libm::sqrt(2.0 / core::f64::consts::PI);
        assert!(
            (mean / expected - 1.0).abs() < 0.05,
            "mean {mean} vs expected {expected}"
        );
    }

    #[test]
    fn three_failures_halve_the_radius() {
        let mut state = RadiusRuleState::new(1.0, 3, 3, 0.01, 1.0).unwrap();
        for _ in 0..3 {
            state.update(false);
        }
        assert_eq!(state.radius(), 0.5);
    }

    #[test]
    fn doubling_clamps_at_r_max() {
        let mut state = RadiusRuleState::new(1.0, 3, 2, 0.01, 1.0).unwrap();
        for _ in 0..10 {
            state.update(true);
        }
        assert_eq!(state.radius(), 1.0);
    }

    #[test]
    fn alternating_outcomes_never_move_the_radius() {
        let mut state = RadiusRuleState::new(0.5, 3, 2, 0.01, 1.0).unwrap();
        for i in 0..1000 {
            state.update(i % 2 == 0);
        }
        assert_eq!(state.radius(), 0.5);
    }

    proptest! {
        #[test]
        fn radius_stays_clamped_under_any_sequence(outcomes in proptest::collection::vec(any::<bool>(), 1000)) {
            let mut state = RadiusRuleState::new(0.2, 5, 3, 0.2 / 64.0, 0.2).unwrap();
            for s in outcomes {
                state.update(s);
                prop_assert!(state.radius() >= 0.2 / 64.0 - 1e-15);
                prop_assert!(state.radius() <= 0.2 + 1e-15);
            }
        }
    }
}
