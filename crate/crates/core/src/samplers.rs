//! Exact samplers for the random models.
//!
//! The ℓ_p constructions all start from the p-generalized Gaussian with
//! density `e^{-|t|^p} / (2Γ(1+1/p))`: normalizing a vector of such draws by
//! its ℓ_p norm gives the cone measure on the ℓ_p sphere, independently of
//! the norm, and a further radial factor `U^{1/n}` gives the uniform measure
//! on the ball.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::predictors::log_volume_bpn;
use crate::rng::RngStream;
use crate::types::{Direction, ModelSpec, Params, SampleSet, SeedLineage};

/// The p-generalized Gaussian, sampled as `±W^{1/p}` with `W ~ Gamma(1/p, 1)`.
///
/// For `p > 1` the shape is below one, so `W` is drawn as
/// `Gamma(1 + 1/p) · U^p`; the power is folded in, giving `±Gamma(1+1/p)^{1/p} · U`.
#[derive(Debug, Clone, Copy)]
pub struct PGeneralized {
    p: f64,
    boosted: Option<Gamma<f64>>,
}

impl PGeneralized {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidModel(format!("p must satisfy 1 <= p < inf, got {p}")));
        }
        let boosted = if p == 1.0 { None } else { Some(Gamma::new(1.0 + p.recip(), 1.0).expect("shape > 1")) };
        Ok(PGeneralized { p, boosted })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Distribution<f64> for PGeneralized {
    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let magnitude = match &self.boosted {
            None => Exp1.sample(rng),
            Some(gamma) => {
                let u: f64 = Open01.sample(rng);
                gamma.sample(rng).powf(self.p.recip()) * u
            }
        };
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }
}

#[inline]
pub(crate) fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p == 1.0 || v.len() == 1 {
        v.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(p.recip())
    }
}

/// Draws points of one model into caller-provided rows.
#[derive(Debug, Clone)]
pub struct ModelSampler {
    model: ModelSpec,
    dim: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Gaussian,
    Cone { gen: PGeneralized },
    Ball { gen: PGeneralized, scale: f64 },
}

impl ModelSampler {
    pub fn new(model: ModelSpec, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::NonPositiveDimension("n = 0".into()));
        }
        model.validate()?;
        let kind = match model {
            ModelSpec::Gaussian => Kind::Gaussian,
            ModelSpec::ConeLp { p } => Kind::Cone { gen: PGeneralized::new(p)? },
            ModelSpec::UniformBallLp { p } => Kind::Ball { gen: PGeneralized::new(p)?, scale: 1.0 },
            ModelSpec::IsotropicBallLp { p } => {
                Kind::Ball { gen: PGeneralized::new(p)?, scale: (-log_volume_bpn(dim, p)? / dim as f64).exp() }
            }
        };
        Ok(ModelSampler { model, dim, kind })
    }

    pub fn model(&self) -> ModelSpec {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fills `out` (length `n`) with one point.
    pub fn fill_point<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) {
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            Kind::Gaussian => fill_gaussian(out, rng),
            Kind::Cone { gen } => {
                fill_cone(out, gen, rng);
            }
            Kind::Ball { gen, scale } => {
                fill_cone(out, gen, rng);
                let u: f64 = rng.random();
                let radius = scale * u.powf((self.dim as f64).recip());
                out.iter_mut().for_each(|x| *x *= radius);
            }
        }
    }

    /// Fills a row-major `N × n` buffer.
    pub fn fill_points<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) {
        for row in out.chunks_exact_mut(self.dim) {
            self.fill_point(row, rng);
        }
    }
}

#[inline]
fn fill_gaussian<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    out.iter_mut().for_each(|x| *x = StandardNormal.sample(rng));
}

/// Normalized p-generalized draw; returns the pre-normalization norm.
fn fill_cone<R: Rng + ?Sized>(out: &mut [f64], gen: &PGeneralized, rng: &mut R) -> f64 {
    loop {
        out.iter_mut().for_each(|x| *x = gen.sample(rng));
        let norm = lp_norm(out, gen.p);
        if norm > 0.0 && norm.is_finite() {
            out.iter_mut().for_each(|x| *x /= norm);
            return norm;
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::NonPositiveDimension("n = 0".into()))
    } else {
        Ok(())
    }
}

/// `n` i.i.d. standard normal coordinates.
pub fn sample_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_dim(n)?;
    let mut v = vec![0.0; n];
    fill_gaussian(&mut v, rng);
    Ok(v)
}

/// One draw of the p-generalized Gaussian.
pub fn sample_p_generalized_scalar<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<f64> {
    Ok(PGeneralized::new(p)?.sample(rng))
}

/// A cone-measure point together with the norm it was normalized by.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDraw {
    /// `Y = G / ‖G‖_p`, on the ℓ_p sphere.
    pub point: Vec<f64>,
    /// `‖G‖_p`, independent of `point`.
    pub radius: f64,
}

pub fn sample_cone_lp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<ConeDraw> {
    check_dim(n)?;
    let gen = PGeneralized::new(p)?;
    let mut point = vec![0.0; n];
    let radius = fill_cone(&mut point, &gen, rng);
    Ok(ConeDraw { point, radius })
}

/// Uniform on `B_p^n`.
pub fn sample_uniform_ball_lp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Vec<f64>> {
    let sampler = ModelSampler::new(ModelSpec::UniformBallLp { p }, n)?;
    let mut v = vec![0.0; n];
    sampler.fill_point(&mut v, rng);
    Ok(v)
}

/// Uniform on the volume-one dilate `B_p^n / |B_p^n|^{1/n}`.
pub fn sample_isotropic_ball_lp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Vec<f64>> {
    let sampler = ModelSampler::new(ModelSpec::IsotropicBallLp { p }, n)?;
    let mut v = vec![0.0; n];
    sampler.fill_point(&mut v, rng);
    Ok(v)
}

/// Uniform on `S^{n-1}` by normalizing a Gaussian vector.
pub fn sample_unit_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Direction> {
    check_dim(n)?;
    let mut v = vec![0.0; n];
    fill_unit_direction(&mut v, rng);
    Ok(Direction::from_unit(v).expect("normalized"))
}

pub(crate) fn fill_unit_direction<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    loop {
        fill_gaussian(out, rng);
        let norm = lp_norm(out, 2.0);
        if norm > 0.0 {
            out.iter_mut().for_each(|x| *x /= norm);
            return;
        }
    }
}

/// `N` independent points of `model` in `R^n` from one stream.
pub fn sample_set(model: ModelSpec, params: &Params, rng: &mut RngStream) -> Result<SampleSet> {
    let sampler = ModelSampler::new(model, params.dim)?;
    let mut data = vec![0.0; params.dim * params.num_points];
    sampler.fill_points(&mut data, rng);
    let id = rng.id();
    let lineage = SeedLineage { master_seed: rng.master_seed(), cell: id.cell, replicate: id.replicate };
    SampleSet::from_rows(params.dim, data, model, lineage)
}
