//! Exact discrete Malliavin-Stein calculus on finite Bernoulli spaces, and
//! Kolmogorov-distance bounds for subgraph counts in Erdős-Rényi graphs.
//!
//! * [`bernoulli`]: functionals on `{-1, +1}^m` and the gradient, divergence,
//!   Ornstein-Uhlenbeck operator and semigroup, evaluated by enumeration.
//! * [`kernel`]: sparse symmetric kernels, contractions, the product formula
//!   for multiple integrals and the contraction functional `R_F`.
//! * [`graph`]: subgraph profiles, chaos kernels of subgraph counts, exact and
//!   asymptotic variances and the Kolmogorov rate bounds.
//! * [`montecarlo`]: `G(n, p)` sampling, subgraph counting and empirical
//!   Kolmogorov distances for scaling studies.

pub mod bernoulli;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod montecarlo;
pub mod normal;
pub mod par;
pub mod sampling;
pub mod verify;

pub use bernoulli::{
    eval_multiple_integral, ChaosCoefficients, DiscreteGradient, Functional, OutcomeSpace,
    SimpleProcess, TermReport,
};
pub use error::{Error, Result};
pub use kernel::{
    contract, contract_unrestricted, contraction_norm_sq, multiply_chaos, r_quantity,
    chaos_bound_parts, BoundParts, ChaosSum, ContractionResult, SymmetricKernel,
};
pub use graph::{
    asymptotic_normality_check, closed_form_bound, copies_in_kn, kolmogorov_bound_graph,
    predicted_slope, subgraph_count_kernels, variance_asymptotic, variance_exact, EdgeIndexing,
    Family, GraphBoundReport, GraphSpec, NormalityVerdict, PRule, Regime, SubgraphProfile,
};
pub use montecarlo::{
    count_copies, empirical_dk, sample_gnp, scaling_study, simulate_counts, standardize_counts,
    BitGraph, Counter, EmpiricalDistance, MomentMode, SampleConfig, ScalingConfig, ScalingStudy,
};
pub use par::Execution;
