//! Domain types shared by every estimator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The quadruple `(n, N, ℓ, q)` that fixes one random body `K_{N,ℓ,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Ambient dimension `n`.
    #[serde(rename = "n")]
    pub dim: usize,
    /// Number of random points `N`.
    #[serde(rename = "N")]
    pub num_points: usize,
    /// Number of order statistics averaged.
    pub ell: usize,
    /// Moment exponent.
    pub q: f64,
}

impl Params {
    pub fn new(dim: usize, num_points: usize, ell: usize, q: f64) -> Result<Self> {
        validate_params(dim as f64, num_points as f64, ell as f64, q)
    }

    /// `N < n`: the body lives in a proper subspace. Still accepted; widths
    /// are averaged over the full sphere.
    pub fn is_degenerate(&self) -> bool {
        self.num_points < self.dim
    }
}

/// Checks raw, possibly non-integral, parameters and builds [`Params`].
pub fn validate_params(n: f64, num_points: f64, ell: f64, q: f64) -> Result<Params> {
    let positive_int = |v: f64| v.is_finite() && v >= 1.0 && v.fract() == 0.0;
    if !positive_int(n) || !positive_int(num_points) {
        return Err(Error::NonPositiveDimension(format!("n = {n}, N = {num_points}")));
    }
    if !ell.is_finite() || ell.fract() != 0.0 {
        return Err(Error::NonIntegerEll(ell));
    }
    let num_points = num_points as usize;
    if ell < 1.0 || ell > num_points as f64 {
        return Err(Error::EllOutOfRange { ell, num_points });
    }
    check_q(q)?;
    let params = Params { dim: n as usize, num_points, ell: ell as usize, q };
    if params.is_degenerate() {
        log::debug!("degenerate parameters: N = {} < n = {}", params.num_points, params.dim);
    }
    Ok(params)
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        Err(Error::QBelowOne(q))
    }
}

/// A unit vector `θ ∈ S^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    pub const UNIT_TOLERANCE: f64 = 1e-12;

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        let norm = euclidean_norm(&coords);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotUnit(norm));
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Direction(coords))
    }

    /// Wraps coordinates that are already of unit length.
    pub fn from_unit(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        let norm = euclidean_norm(&coords);
        if (norm - 1.0).abs() > Self::UNIT_TOLERANCE {
            return Err(Error::NotUnit(norm));
        }
        Ok(Direction(coords))
    }

    /// The standard basis vector `e_{axis}` (zero based).
    pub fn axis(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: axis + 1 });
        }
        let mut coords = vec![0.0; dim];
        coords[axis] = 1.0;
        Ok(Direction(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Direction::from_unit(coords)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

pub(crate) fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The law generating `X_1, …, X_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Standard Gaussian vectors.
    Gaussian,
    /// Cone probability measure on the ℓ_p^n sphere.
    ConeLp { p: f64 },
    /// Uniform distribution on the ℓ_p^n unit ball.
    UniformBallLp { p: f64 },
    /// Uniform distribution on `B_p^n / |B_p^n|^{1/n}` (volume one).
    IsotropicBallLp { p: f64 },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self.p() {
            Some(p) if !(p.is_finite() && p >= 1.0) => {
                Err(Error::InvalidModel(format!("p must satisfy 1 <= p < inf, got {p}")))
            }
            _ => Ok(()),
        }
    }

    pub fn p(&self) -> Option<f64> {
        match *self {
            ModelSpec::Gaussian => None,
            ModelSpec::ConeLp { p } | ModelSpec::UniformBallLp { p } | ModelSpec::IsotropicBallLp { p } => Some(p),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Gaussian => "gaussian",
            ModelSpec::ConeLp { .. } => "cone_lp",
            ModelSpec::UniformBallLp { .. } => "uniform_ball_lp",
            ModelSpec::IsotropicBallLp { .. } => "isotropic_ball_lp",
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.p() {
            Some(p) => write!(f, "{}(p={p})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Master seed plus the stream coordinates that produced a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master_seed: u64,
    pub cell: u32,
    pub replicate: u64,
}

/// One realization of `N` points in `R^n`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    dim: usize,
    vectors: Vec<f64>,
    pub model: ModelSpec,
    pub lineage: SeedLineage,
}

impl SampleSet {
    /// Builds a sample set from row-major data; rejects ragged or non-finite input.
    pub fn from_rows(dim: usize, vectors: Vec<f64>, model: ModelSpec, lineage: SeedLineage) -> Result<Self> {
        if dim == 0 || vectors.is_empty() {
            return Err(Error::EmptyInput);
        }
        if vectors.len() % dim != 0 {
            return Err(Error::DimensionMismatch { expected: dim, got: vectors.len() % dim });
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("non-finite sample coordinate".into()));
        }
        Ok(SampleSet { dim, vectors, model, lineage })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.vectors.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.vectors
    }

    /// Every point multiplied by `c`.
    pub fn scaled(&self, c: f64) -> SampleSet {
        let mut out = self.clone();
        out.vectors.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Writes `|⟨X_i, y⟩|` for every row into `out`.
    pub fn abs_marginals_into(&self, y: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        out.clear();
        out.extend(self.rows().map(|row| dot(row, y).abs()));
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A Monte Carlo estimate and its audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    /// Standard error from the replicate-level sample variance (0 with one replicate).
    pub std_error: f64,
    pub n_replicates: usize,
    /// Directions per replicate; 0 for fixed-direction estimates.
    pub n_directions: usize,
    pub params: Option<Params>,
    pub model: ModelSpec,
    pub seed: u64,
}
