//! Random polytopes and their order-statistic bodies `K_{N,ℓ,q}`.
//!
//! Given i.i.d. points `X_1, …, X_N` in `R^n`, the body `K_{N,ℓ,q}` has support
//! function `h(θ) = ((1/ℓ) Σ_{k≤ℓ} kmax_i |⟨X_i, θ⟩|^q)^{1/q}`. This crate
//! samples the point models, estimates support values and mean widths by
//! reproducible Monte Carlo, evaluates closed-form predictors and works with
//! the Orlicz functions that govern the asymptotics.

// `!(x >= a)` is used throughout to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod order;
pub mod orlicz;
pub mod predictors;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod types;

pub use error::{Error, Result};
pub use geometry::{
    centroid_support_estimate, comparison_ratio, floating_quantile, floating_support_estimate, mean_width_batch,
    mean_width_estimate, support_expectation_batch, support_expectation_estimate, support_function, support_value,
    MeanWidthConfig, Reduction,
};
pub use order::{kth_max, orderstat_power_mean};
pub use orlicz::{EmpiricalDistribution, OrliczFunction};
pub use predictors::{PredictorValue, Regime, Strength};
pub use rng::{RngStream, Role, StreamId};
pub use types::{validate_params, Direction, EstimateReport, ModelSpec, Params, SampleSet, SeedLineage};
