//! Support-function, mean-width, centroid-body and floating-body estimators.
//!
//! The body `K_{N,ℓ,q}` is only ever touched through its support function
//! `h(θ) = ((1/ℓ) Σ_{k≤ℓ} kmax_i |⟨X_i, θ⟩|^q)^{1/q}`.
//!
//! Every Monte Carlo task owns its own [`RngStream`], keyed by
//! `(cell, replicate, role)`. Replicate values are produced independently of
//! scheduling, so the only thread-dependent step is the final reduction,
//! which is made order-independent by [`Reduction::FixedOrder`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{power_mean_of_abs, power_means_of_abs};
use crate::rng::{RngStream, Role, StreamId};
use crate::samplers::{fill_unit_direction, ModelSampler};
use crate::stats::{quantile_type7, MeanSummary, Moments};
use crate::types::{check_q, dot, Direction, EstimateReport, ModelSpec, Params, SampleSet};

/// Monte Carlo budget for mean-width estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanWidthConfig {
    pub n_directions: usize,
    pub n_replicates: usize,
    /// Pair each direction with its reflection through the second half of the coordinates.
    #[serde(default)]
    pub antithetic: bool,
}

impl Default for MeanWidthConfig {
    fn default() -> Self {
        MeanWidthConfig { n_directions: 64, n_replicates: 200, antithetic: false }
    }
}

impl MeanWidthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_directions == 0 || self.n_replicates == 0 {
            return Err(Error::ConfigInvalid("direction and replicate counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// How replicate values are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Collect in replicate order, then pairwise-sum: bit-identical for any thread count.
    FixedOrder,
    /// Merge partial moments as workers finish.
    #[default]
    Unordered,
}

/// Samples per stream in the single-marginal estimators.
const MARGINAL_BLOCK: usize = 4096;

/// `h(y)` for an arbitrary, not necessarily unit, vector `y`.
pub fn support_function(samples: &SampleSet, y: &[f64], ell: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    if ell == 0 || ell > samples.num_points() {
        return Err(Error::EllOutOfRange { ell: ell as f64, num_points: samples.num_points() });
    }
    let mut buf = Vec::with_capacity(samples.num_points());
    samples.abs_marginals_into(y, &mut buf)?;
    Ok(power_mean_of_abs(&mut buf, ell, q))
}

/// `h_{K_{N,ℓ,q}}(θ)` for one realization.
pub fn support_value(samples: &SampleSet, theta: &Direction, ell: usize, q: f64) -> Result<f64> {
    support_function(samples, theta.coords(), ell, q)
}

/// Ratio `h_A(θ) / h_B(θ)` of two realizations.
pub fn comparison_ratio(
    samples_a: &SampleSet,
    samples_b: &SampleSet,
    theta: &Direction,
    params_a: &Params,
    params_b: &Params,
) -> Result<f64> {
    for (s, p) in [(samples_a, params_a), (samples_b, params_b)] {
        if s.num_points() != p.num_points {
            return Err(Error::DimensionMismatch { expected: p.num_points, got: s.num_points() });
        }
    }
    if samples_a.dim() != samples_b.dim() {
        return Err(Error::DimensionMismatch { expected: samples_a.dim(), got: samples_b.dim() });
    }
    let num = support_value(samples_a, theta, params_a.ell, params_a.q)?;
    let den = support_value(samples_b, theta, params_b.ell, params_b.q)?;
    if den == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(num / den)
}

/// Unbiased estimate of `E w(K_{N,ℓ,q})`.
pub fn mean_width_estimate(
    model: ModelSpec,
    params: &Params,
    cfg: &MeanWidthConfig,
    seed: u64,
) -> Result<EstimateReport> {
    let pairs = [(params.ell, params.q)];
    let mut reports =
        mean_width_batch(model, params.dim, params.num_points, &pairs, cfg, seed, 0, Reduction::FixedOrder)?;
    Ok(reports.remove(0))
}

fn validate_pairs(num_points: usize, pairs: &[(usize, f64)]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    for &(ell, q) in pairs {
        if ell == 0 || ell > num_points {
            return Err(Error::EllOutOfRange { ell: ell as f64, num_points });
        }
        check_q(q)?;
    }
    Ok(())
}

/// Mean-width estimates for several `(ℓ, q)` on shared realizations.
///
/// Replicate `r` draws its points from stream `(cell, r, Samples)` and its
/// directions from `(cell, r, Directions)`. Estimates for different pairs are
/// therefore coupled, which keeps them pathwise ordered in `ℓ` and `q`.
#[allow(clippy::too_many_arguments)]
pub fn mean_width_batch(
    model: ModelSpec,
    dim: usize,
    num_points: usize,
    pairs: &[(usize, f64)],
    cfg: &MeanWidthConfig,
    seed: u64,
    cell: u32,
    reduction: Reduction,
) -> Result<Vec<EstimateReport>> {
    cfg.validate()?;
    validate_pairs(num_points, pairs)?;
    let sampler = ModelSampler::new(model, dim)?;
    let replicate = |r: usize| -> Result<Vec<f64>> {
        let mut kernel = Kernel::new(&sampler, num_points, pairs.len());
        let mut points = RngStream::new(seed, StreamId::new(cell, r as u64, Role::Samples))?;
        let mut dirs = RngStream::new(seed, StreamId::new(cell, r as u64, Role::Directions))?;
        sampler.fill_points(&mut kernel.data, &mut points);
        let mut acc = vec![0.0; pairs.len()];
        let mut theta = vec![0.0; dim];
        for d in 0..cfg.n_directions {
            if cfg.antithetic && d % 2 == 1 {
                let half = dim / 2;
                theta[half..].iter_mut().for_each(|x| *x = -*x);
            } else {
                fill_unit_direction(&mut theta, &mut dirs);
            }
            kernel.evaluate(&theta, pairs);
            acc.iter_mut().zip(&kernel.out).for_each(|(a, v)| *a += v);
        }
        let scale = (cfg.n_directions as f64).recip();
        acc.iter_mut().for_each(|a| *a *= scale);
        Ok(acc)
    };
    let summaries = reduce(cfg.n_replicates, pairs.len(), reduction, replicate)?;
    Ok(pairs
        .iter()
        .zip(summaries)
        .map(|(&(ell, q), s)| EstimateReport {
            value: s.mean,
            std_error: s.std_error,
            n_replicates: cfg.n_replicates,
            n_directions: cfg.n_directions,
            params: Some(Params { dim, num_points, ell, q }),
            model,
            seed,
        })
        .collect())
}

/// Estimate of `E h_{K_{N,ℓ,q}}(θ)` at a fixed direction.
pub fn support_expectation_estimate(
    model: ModelSpec,
    params: &Params,
    theta: &Direction,
    n_replicates: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let pairs = [(params.ell, params.q)];
    let mut reports = support_expectation_batch(
        model,
        params.num_points,
        &pairs,
        theta,
        n_replicates,
        seed,
        0,
        Reduction::FixedOrder,
    )?;
    Ok(reports.remove(0))
}

/// Fixed-direction estimates for several `(ℓ, q)` on shared realizations.
#[allow(clippy::too_many_arguments)]
pub fn support_expectation_batch(
    model: ModelSpec,
    num_points: usize,
    pairs: &[(usize, f64)],
    theta: &Direction,
    n_replicates: usize,
    seed: u64,
    cell: u32,
    reduction: Reduction,
) -> Result<Vec<EstimateReport>> {
    if n_replicates == 0 {
        return Err(Error::ConfigInvalid("n_replicates must be >= 1".into()));
    }
    validate_pairs(num_points, pairs)?;
    let dim = theta.dim();
    let sampler = ModelSampler::new(model, dim)?;
    let replicate = |r: usize| -> Result<Vec<f64>> {
        let mut kernel = Kernel::new(&sampler, num_points, pairs.len());
        let mut points = RngStream::new(seed, StreamId::new(cell, r as u64, Role::Samples))?;
        sampler.fill_points(&mut kernel.data, &mut points);
        kernel.evaluate(theta.coords(), pairs);
        Ok(kernel.out.clone())
    };
    let summaries = reduce(n_replicates, pairs.len(), reduction, replicate)?;
    Ok(pairs
        .iter()
        .zip(summaries)
        .map(|(&(ell, q), s)| EstimateReport {
            value: s.mean,
            std_error: s.std_error,
            n_replicates,
            n_directions: 0,
            params: Some(Params { dim, num_points, ell, q }),
            model,
            seed,
        })
        .collect())
}

/// Per-replicate scratch: the point cloud, its marginals and the outputs.
struct Kernel<'a> {
    sampler: &'a ModelSampler,
    data: Vec<f64>,
    marginals: Vec<f64>,
    sums: Vec<f64>,
    out: Vec<f64>,
}

impl<'a> Kernel<'a> {
    fn new(sampler: &'a ModelSampler, num_points: usize, n_pairs: usize) -> Self {
        Kernel {
            sampler,
            data: vec![0.0; num_points * sampler.dim()],
            marginals: Vec::with_capacity(num_points),
            sums: Vec::with_capacity(num_points),
            out: vec![0.0; n_pairs],
        }
    }

    fn evaluate(&mut self, theta: &[f64], pairs: &[(usize, f64)]) {
        self.marginals.clear();
        self.marginals.extend(self.data.chunks_exact(self.sampler.dim()).map(|row| fast_dot(row, theta).abs()));
        power_means_of_abs(&mut self.marginals, pairs, &mut self.sums, &mut self.out);
    }
}

/// Four-lane dot product; the fixed lane structure keeps results reproducible.
#[inline]
fn fast_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            lanes[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let tail = dot(&a[4 * chunks..], &b[4 * chunks..]);
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}

/// Runs `n_replicates` independent tasks and summarizes each output slot.
fn reduce<F>(n_replicates: usize, width: usize, reduction: Reduction, task: F) -> Result<Vec<MeanSummary>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync + Send,
{
    match reduction {
        Reduction::FixedOrder => {
            let rows: Vec<Vec<f64>> = (0..n_replicates).into_par_iter().map(&task).collect::<Result<_>>()?;
            Ok((0..width)
                .map(|j| {
                    let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                    MeanSummary::from_slice(&column)
                })
                .collect())
        }
        Reduction::Unordered => {
            let moments = (0..n_replicates)
                .into_par_iter()
                .map(&task)
                .try_fold(
                    || vec![Moments::default(); width],
                    |mut acc, row| {
                        row.map(|row| {
                            acc.iter_mut().zip(row).for_each(|(m, v)| m.push(v));
                            acc
                        })
                    },
                )
                .try_reduce(
                    || vec![Moments::default(); width],
                    |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
                )?;
            Ok(moments.iter().map(Moments::summary).collect())
        }
    }
}

/// `n_samples` absolute marginals `|⟨X, θ⟩|` in a deterministic order.
fn draw_abs_marginals(model: ModelSpec, theta: &Direction, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = ModelSampler::new(model, theta.dim())?;
    let blocks = n_samples.div_ceil(MARGINAL_BLOCK);
    let parts: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Vec<f64>> {
            let len = MARGINAL_BLOCK.min(n_samples - b * MARGINAL_BLOCK);
            let mut rng = RngStream::new(seed, StreamId::new(0, b as u64, Role::Marginals))?;
            let mut x = vec![0.0; theta.dim()];
            Ok((0..len)
                .map(|_| {
                    sampler.fill_point(&mut x, &mut rng);
                    dot(&x, theta.coords()).abs()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Estimate of the centroid-body support function `(E|⟨X, θ⟩|^q)^{1/q}`.
///
/// The standard error is propagated from the moment by the delta method.
pub fn centroid_support_estimate(
    model: ModelSpec,
    n: usize,
    q: f64,
    theta: &Direction,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    check_q(q)?;
    if theta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: theta.dim() });
    }
    if n_samples == 0 {
        return Err(Error::ConfigInvalid("n_samples must be >= 1".into()));
    }
    let powers: Vec<f64> = draw_abs_marginals(model, theta, n_samples, seed)?.into_iter().map(|m| m.powf(q)).collect();
    let moment = MeanSummary::from_slice(&powers);
    let value = moment.mean.powf(q.recip());
    let std_error = if moment.mean > 0.0 { value / (q * moment.mean) * moment.std_error } else { 0.0 };
    Ok(EstimateReport { value, std_error, n_replicates: n_samples, n_directions: 0, params: None, model, seed })
}

/// Empirical `(1 − δ)`-quantile of absolute marginals (type 7). Sorts `values`.
///
/// Also returns a distribution-free standard error from the spread of the
/// order statistics `±sqrt(δ(1−δ)/m)` around the target level.
pub fn floating_quantile(values: &mut [f64], delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < (-1.0f64).exp()) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    values.sort_unstable_by(f64::total_cmp);
    let level = 1.0 - delta;
    let value = quantile_type7(values, level);
    let spread = (delta * (1.0 - delta) / values.len() as f64).sqrt();
    let std_error = 0.5 * (quantile_type7(values, level + spread) - quantile_type7(values, level - spread));
    Ok((value, std_error))
}

/// Estimate of the floating-body support `t_θ`, the `(1 − δ)`-quantile of `|⟨X, θ⟩|`.
pub fn floating_support_estimate(
    model: ModelSpec,
    n: usize,
    delta: f64,
    theta: &Direction,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if !(delta > 0.0 && delta < (-1.0f64).exp()) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    if (n_samples as f64) * delta < 50.0 {
        return Err(Error::InsufficientSamples(n_samples as f64 * delta));
    }
    if theta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: theta.dim() });
    }
    let mut marginals = draw_abs_marginals(model, theta, n_samples, seed)?;
    let (value, std_error) = floating_quantile(&mut marginals, delta)?;
    Ok(EstimateReport { value, std_error, n_replicates: n_samples, n_directions: 0, params: None, model, seed })
}
