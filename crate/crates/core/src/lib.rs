//! Row-sampling coresets for multiple-response `ℓp` regression.
//!
//! The library builds *strong* coresets (preserve `‖AX−B‖_{p,p}` at every `X`)
//! and *weak* coresets (preserve the minimizer) by Bernoulli row sampling with
//! probabilities driven by one-sided `ℓp` Lewis weights plus residual row
//! fractions, and applies the same machinery to two downstream problems:
//! sublinear Euclidean power means and spanning coresets for `ℓp` subspace
//! approximation.
//!
//! Layout:
//! - [`tensor`]: dense row-major matrices, weight vectors, `ℓp` / `(p,2)` /
//!   weighted norms with compensated summation.
//! - [`lewis`]: leverage scores and one-sided `ℓp` Lewis weights.
//! - [`sampler`]: the diagonal `ℓp` sampling matrix (keep row `i` w.p. `q_i`,
//!   rescale by `q_i^{-1/p}`).
//! - [`solver`]: weighted multiple-response `ℓp` regression (`‖AXG−B‖_{p,p}`),
//!   gradients, smoothed IRLS.
//! - [`coresets`]: the strong/weak sampling-probability recipes and builders.
//! - [`embedding`]: Gaussian `ℓ2 → ℓp` embedding of Euclidean norms.
//! - [`power_means`]: uniform-sampling power-means solver with
//!   median-of-instances selection.
//! - [`subspace`]: spanning coresets for rank-`k` `ℓp` subspace approximation.
//! - [`adversarial`]: hard-instance generators used as stress fixtures.
//! - [`verify`]: probe-based coreset verification and statistical checks.
//! - [`io`], [`synth`], [`experiment`]: matrix file formats, synthetic data,
//!   and the sample-size sweep experiment.
//!
//! With the default `parallel` feature the embarrassingly parallel loops
//! (probe evaluation, row sampling, independent solver instances) run on
//! rayon; summation orders are fixed so results are identical with the
//! feature disabled.

pub mod adversarial;
pub mod coresets;
pub mod embedding;
mod error;
pub mod experiment;
pub mod io;
pub mod lewis;
pub(crate) mod par;
pub mod power_means;
pub(crate) mod rng;
pub mod sampler;
pub mod solver;
pub mod subspace;
pub mod synth;
pub mod tensor;
#[doc(hidden)]
pub mod testkit;
pub mod verify;

pub use error::{Error, Result};
pub use tensor::{DenseMatrix, WeightVector};
