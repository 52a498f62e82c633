//! Risk analysis for weighted majority votes over self-complemented voter
//! sets: margin statistics and the C-bound, PAC-Bayesian risk bounds driven
//! by KL level sets, and the MinCq learner that minimizes the empirical
//! C-bound under a fixed margin constraint.
//!
//! The crate is organized bottom-up:
//!
//! - [`types`]: datasets, vote matrices, posteriors and their invariants;
//! - [`numerics`]: the xi normalizer, KL divergences and inversions, the
//!   concave-surface maximizer and the box/equality QP solver;
//! - [`voters`]: stump and kernel voter families, normalization, vote
//!   matrices;
//! - [`margins`]: margin moments, the C-bound and its optimality conditions;
//! - [`bounds`]: the PAC-Bayesian bound family built on the above;
//! - [`learners`]: MinCq, posterior transformations, and boosting;
//! - [`evaluation`]: cross-validation, stopping criteria, sign tests and
//!   bound curves;
//! - [`io`]: dataset and report serialization.
//!
//! With the default `parallel` feature, vote matrices, posterior sweeps and
//! cross-validation run data-parallel via rayon; sequential equivalents are
//! always compiled and exposed for comparison.

pub mod bounds;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod learners;
pub mod margins;
pub mod numerics;
pub mod types;
pub mod voters;

pub use bounds::{BoundId, BoundInputs, BoundReport};
pub use error::{Error, ErrorCategory, Result};
pub use types::{complement_index, Dataset, Example, MarginSummary, Posterior, VoteMatrix};
