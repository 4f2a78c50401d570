//! Spectral estimation of a unit-norm parameter `β*` from one-bit
//! observations `y ∈ {−1, +1}` whose law depends on covariates `x ~ N(0, I_p)`
//! only through an unknown link of `⟨x, β*⟩`.
//!
//! The estimators are built from the pairwise-difference second moment
//!
//! ```text
//! M = (2/n) Σᵢ (y₂ᵢ − y₂ᵢ₋₁)² (x₂ᵢ − x₂ᵢ₋₁)(x₂ᵢ − x₂ᵢ₋₁)ᵀ
//! ```
//!
//! whose expectation is `4φ β*β*ᵀ + 4(1 − μ₀²) I`. The dense regime uses the
//! power method on `M`; the sparse regime initializes from a Fantope
//! relaxation solved by ADMM and refines with a truncated power method.

pub mod error;
pub mod fmt;
pub mod harness;
pub mod linalg;
pub mod link;
pub mod moment;
pub mod normal;
pub mod quadrature;
pub mod rng;
pub mod sparse;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use harness::{
    abscissa, estimation_error, median, run_diag, run_eigenstructure, run_experiment, run_lowdim,
    run_sparse, summarize, write_csv, DiagReport, Estimator, Experiment, ExperimentOutput,
    ExperimentRow, GridPoint, GroupSummary, ModelKind, RunConfig, CSV_HEADER,
};
pub use link::{
    moments, theory_diagnostics, theta_median, DiagnosticConstants, LinkModel, MomentMethod,
    MomentSummary, TheoryDiagnostics,
};
pub use moment::{expected_moment, second_moment, second_moment_sum, MomentKind, MomentMatrix};
pub use sparse::{
    fantope_admm, fantope_project, soft_threshold, sparse_recover, sparse_recover_moment, truncate,
    truncated_power_method, FantopeSolution, SparseConfig, SparseReport,
};
pub use spectral::{power_method, top_two_eigs, PowerOptions, RecoveryReport, TopEigs};
pub use synth::{generate_dataset, sample_beta_dense, sample_beta_sparse, Dataset, GroundTruth};
