//! Self-adjusting surrogate optimization.
//!
//! This crate implements a sequential surrogate-optimization loop for
//! expensive black-box minimization over a box domain, together with a
//! family of policies that reconfigure the optimizer's own algorithmic
//! hyperparameters (GP lengthscale, candidate-generation radius) while
//! the run is in progress. The centerpiece is a Thompson-sampling bandit
//! that treats each hyperparameter as an arm with a Beta(α, β) success
//! model: arms are selected by sampling, the selected hyperparameter is
//! perturbed for one trial iteration, and the trial value is kept only
//! if the best observed objective value improved.
//!
//! The crate is `no_std`-compatible (it requires `alloc`); everything
//! that needs an operating system — clocks, files, threads — is injected
//! by the caller or lives in the companion CLI crate.
//!
//! Module map:
//!
//! * [`space`] / [`archive`] / [`rng`] / [`hyper`] — shared domain types.
//! * [`testbed`] — benchmark objectives with known minima.
//! * [`doe`] — Latin hypercube initial designs with a maximin criterion.
//! * [`surrogate`] — exact GP regression with a Matérn kernel.
//! * [`candidates`] — uniform and dynamic-coordinate candidate generation.
//! * [`acquisition`] — EI, confidence-bound, and weighted-score criteria.
//! * [`tuner`] — the six hyperparameter configuration policies.
//! * [`engine`] — the full optimization loop tying the above together.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod acquisition;
pub mod archive;
pub mod candidates;
pub mod doe;
pub mod engine;
pub mod error;
pub mod hyper;
mod linalg;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod rng;
pub mod space;
pub mod surrogate;
pub mod testbed;
pub mod tuner;

pub use archive::{improvement, Archive};
pub use error::Error;
pub use rng::SeededRandom;
pub use space::Bounds;
