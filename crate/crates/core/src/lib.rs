//! Identification of k-point mixture distributions on [0,1] from the
//! histogram of 2k-snapshot samples.
//!
//! A k-coin model is a mixture of k Bernoulli variables with biases
//! `alpha` in [0,1] and simplex weights `w`. An m-snapshot counts the
//! heads in m tosses of a single coin drawn from the mixture, so the
//! observable is a histogram over {0, ..., m}. With m = 2k the model is
//! identifiable, and this crate recovers it in three steps:
//!
//! 1. convert the histogram to standard moments with the Pascal
//!    transform and assemble the (k+1) x (k+1) Hankel matrix,
//! 2. extract an approximate kernel vector of the Hankel matrix (the
//!    coefficients of the polynomial whose roots are the biases) and
//!    find its roots,
//! 3. project the roots to [0,1], solve the square Vandermonde system
//!    for the weights, and rectify them onto the simplex.
//!
//! The crate also ships the exact-moment oracle, a seeded snapshot
//! sampler, evaluation metrics (optimal matching distance and exact
//! 1-Wasserstein distance), and sample-size planning.

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod moments;
pub mod prony;
pub mod rng;
pub mod roots;

mod binom;

pub use error::{Error, Result};
pub use linalg::{
    min_eigenpair, smallest_eigenvalues, solve_vandermonde, solve_vandermonde_with_gap,
    vandermonde_inverse_inf_norm, EigenPair, SquareMatrix, VandermondeSolution,
};
pub use metrics::{
    matching_distance, matching_distance_real, matching_permutation, wasserstein,
};
pub use model::{
    random_canonical_model, ExpectedHistogram, Histogram, MixtureModel, MomentVector,
};
pub use moments::{
    build_hankel, histogram_to_moments, pascal_matrix, plan_sample_size, HankelMatrix,
    PascalMatrix, MAX_PLANNED_SAMPLES,
};
pub use prony::{
    learn_coin_mixture, learn_from_exact_moments, learn_from_frequencies, rectify_weights,
    Diagnostics, LearnConfig, LearnReport, DEFAULT_FP_FLOOR,
};
pub use roots::{find_roots, project_roots, Polynomial, RootSet};
