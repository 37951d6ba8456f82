//! Laws of `|X|` that feed `M_ℓ`: sorted samples, the Gaussian family
//! `|g|^q`, and point masses.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use super::quad::adaptive_simpson;
use crate::error::{Error, Result};

/// Upper-tail mass discarded when integrating analytic densities.
const TAIL_MASS: f64 = 1e-9;
const QUAD_TOL: f64 = 1e-11;

/// The law of a nonnegative random variable `|X|`.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    /// Ascending samples; `suffix[k]` is the sum of `asc[k..]`.
    Sorted {
        asc: Vec<f64>,
        suffix: Vec<f64>,
    },
    /// `|g|^q`; `upper` is the `1 − TAIL_MASS` quantile of `|g|`.
    GaussianAbsPower {
        q: f64,
        upper: f64,
    },
    Constant {
        value: f64,
    },
}

fn std_normal() -> Normal {
    Normal::standard()
}

#[inline]
fn std_normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

impl EmpiricalDistribution {
    /// Empirical law of the given draws of `|X|`.
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = samples.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::OutOfRange(format!("sample {bad} is not a finite nonnegative value")));
        }
        samples.sort_unstable_by(f64::total_cmp);
        let mut suffix = vec![0.0; samples.len() + 1];
        for k in (0..samples.len()).rev() {
            suffix[k] = suffix[k + 1] + samples[k];
        }
        Ok(EmpiricalDistribution { repr: Repr::Sorted { asc: samples, suffix } })
    }

    /// `|g|` for a standard Gaussian `g`.
    pub fn gaussian_abs() -> Self {
        Self::gaussian_abs_power(1.0).expect("q = 1 is valid")
    }

    /// `|g|^q`.
    pub fn gaussian_abs_power(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::OutOfRange(format!("power {q} must be positive")));
        }
        let upper = -std_normal().inverse_cdf(0.5 * TAIL_MASS);
        Ok(EmpiricalDistribution { repr: Repr::GaussianAbsPower { q, upper } })
    }

    /// Point mass at `value ≥ 0`.
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::OutOfRange(format!("constant {value} must be finite and >= 0")));
        }
        Ok(EmpiricalDistribution { repr: Repr::Constant { value } })
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.repr, Repr::Sorted { .. })
    }

    /// Decreasing rearrangement `X*(z)`, the `(1 − z)`-quantile of `|X|`.
    pub fn quantile(&self, z: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::OutOfRange(format!("z = {z} outside [0, 1]")));
        }
        Ok(match &self.repr {
            Repr::Sorted { asc, .. } => {
                let m = asc.len();
                let from_top = ((z * m as f64).floor() as usize).min(m - 1);
                asc[m - 1 - from_top]
            }
            Repr::GaussianAbsPower { q, .. } => {
                if z == 0.0 {
                    f64::INFINITY
                } else {
                    (-std_normal().inverse_cdf(0.5 * z)).max(0.0).powf(*q)
                }
            }
            Repr::Constant { value } => *value,
        })
    }

    /// `E|X|`.
    pub fn mean(&self) -> f64 {
        match &self.repr {
            Repr::Sorted { asc, suffix } => suffix[0] / asc.len() as f64,
            Repr::GaussianAbsPower { q, .. } => {
                (0.5 * q * std::f64::consts::LN_2 + ln_gamma(0.5 * (q + 1.0))).exp() / std::f64::consts::PI.sqrt()
            }
            Repr::Constant { value } => *value,
        }
    }

    /// `∫_0^β X*(z) dz`, computed from the quantile side only.
    pub fn upper_tail_integral(&self, beta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::OutOfRange(format!("beta = {beta} outside [0, 1]")));
        }
        match &self.repr {
            Repr::Sorted { asc, suffix } => {
                let m = asc.len();
                let whole = ((beta * m as f64).floor() as usize).min(m);
                let mut total = suffix[m - whole];
                if whole < m {
                    total += (beta * m as f64 - whole as f64) * asc[m - 1 - whole];
                }
                Ok(total / m as f64)
            }
            Repr::GaussianAbsPower { .. } => {
                // z = β w² removes the endpoint singularity of X* at 0.
                let integrand = |w: f64| {
                    if w == 0.0 {
                        0.0
                    } else {
                        2.0 * beta * w * self.quantile(beta * w * w).unwrap_or(0.0)
                    }
                };
                adaptive_simpson(integrand, 0.0, 1.0, 1e-12)
            }
            Repr::Constant { value } => Ok(beta * value),
        }
    }

    /// `M_ℓ(s) = ∫_0^s E[|X| 1{|X| ≥ 1/(tℓ)}] dt = E[(s|X| − 1/ℓ)_+]`.
    pub fn m_ell(&self, ell: f64, s: f64) -> Result<f64> {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::OutOfRange(format!("ell = {ell} must be positive")));
        }
        if !(s >= 0.0) {
            return Err(Error::OutOfRange(format!("s = {s} must be >= 0")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        if s.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let level = (s * ell).recip();
        match &self.repr {
            Repr::Sorted { asc, suffix } => {
                let first = asc.partition_point(|&y| y <= level);
                let count = (asc.len() - first) as f64;
                let value = (s * suffix[first] - count / ell) / asc.len() as f64;
                Ok(value.max(0.0))
            }
            Repr::GaussianAbsPower { q, upper } => {
                let lower = level.powf(q.recip());
                if lower >= *upper {
                    return Ok(0.0);
                }
                let inv_ell = ell.recip();
                let integrand = |x: f64| (s * x.powf(*q) - inv_ell).max(0.0) * std_normal_pdf(x);
                // Large s magnifies the discarded tail; push the cutoff out until it is negligible.
                // Absolute tolerance scaled to the size of M, which grows like s·E X.
                let tol = QUAD_TOL * (s * self.mean()).max(1.0);
                let mut cutoff = *upper;
                while integrand(cutoff) * cutoff > 1e-3 * tol {
                    cutoff += 0.25;
                }
                Ok(2.0 * adaptive_simpson(integrand, lower, cutoff, tol)?)
            }
            Repr::Constant { value } => Ok((s * value - ell.recip()).max(0.0)),
        }
    }

    /// Largest argument at which `M_ℓ` needs to be resolved.
    pub(crate) fn domain_hint(&self, ell: f64) -> f64 {
        let tail = self.quantile(0.99).unwrap_or(0.0);
        let scale = if tail > 0.0 { tail } else { self.mean() };
        4.0 / (ell * scale)
    }
}

/// `X*(z)` for `dist`.
pub fn quantile_function(dist: &EmpiricalDistribution, z: f64) -> Result<f64> {
    dist.quantile(z)
}

/// `M_ℓ(s)` for the law `dist`.
pub fn m_ell_from_distribution(dist: &EmpiricalDistribution, ell: f64, s: f64) -> Result<f64> {
    dist.m_ell(ell, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_normal_quantiles() {
        let g = EmpiricalDistribution::gaussian_abs();
        assert!((g.quantile(0.5).unwrap() - 0.674_489_750_196_081_7).abs() < 1e-9);
        assert_eq!(g.quantile(1.0).unwrap(), 0.0);
        assert_eq!(g.quantile(0.0).unwrap(), f64::INFINITY);
        assert!(matches!(g.quantile(1.5), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn constant_law() {
        let c = EmpiricalDistribution::constant(2.5).unwrap();
        for z in [0.0, 0.3, 1.0] {
            assert_eq!(c.quantile(z).unwrap(), 2.5);
        }
        assert_eq!(c.m_ell(1.0, 1.0).unwrap(), 1.5);
        assert_eq!(c.m_ell(4.0, 0.1).unwrap(), 0.0);
        assert_eq!(c.upper_tail_integral(0.4).unwrap(), 1.0);
    }

    #[test]
    fn empirical_quantile_and_tail_integral() {
        let d = EmpiricalDistribution::from_samples(vec![3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(d.quantile(0.0).unwrap(), 4.0);
        assert_eq!(d.quantile(0.3).unwrap(), 3.0);
        assert_eq!(d.quantile(1.0).unwrap(), 1.0);
        // Top quarter is 4, then 0.125 of mass at 3.
        assert!((d.upper_tail_integral(0.375).unwrap() - (4.0 + 0.5 * 3.0) / 4.0).abs() < 1e-15);
        assert!((d.upper_tail_integral(1.0).unwrap() - 2.5).abs() < 1e-15);
        assert!(EmpiricalDistribution::from_samples(vec![-1.0]).is_err());
        assert!(EmpiricalDistribution::from_samples(vec![]).is_err());
    }

    #[test]
    fn gaussian_power_m_is_linear_at_large_scale() {
        // For s → ∞, M_ℓ(s) = s·E X − 1/ℓ + o(1).
        let d = EmpiricalDistribution::gaussian_abs_power(3.0).unwrap();
        let s = 1e6;
        let m = d.m_ell(1.0, s).unwrap();
        assert!((m - (s * d.mean() - 1.0)).abs() <= 1e-6 * m);
    }

    #[test]
    fn empirical_m_matches_definition() {
        let xs = vec![0.2, 0.9, 1.7, 3.1, 0.05];
        let d = EmpiricalDistribution::from_samples(xs.clone()).unwrap();
        for (ell, s) in [(1.0, 0.4), (2.0, 1.3), (3.0, 7.0), (1.0, 100.0)] {
            let direct: f64 = xs.iter().map(|x| (s * x - 1.0 / ell).max(0.0)).sum::<f64>() / xs.len() as f64;
            assert!((d.m_ell(ell, s).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn half_normal_m_matches_closed_form() {
        // E[(s|g| − a)_+] = 2 s φ(a/s) − 2 a (1 − Φ(a/s)).
        let g = EmpiricalDistribution::gaussian_abs();
        let n = std_normal();
        for (ell, s) in [(1.0, 0.5), (1.0, 3.0), (4.0, 2.0), (16.0, 40.0)] {
            let a = 1.0 / ell;
            let x = a / s;
            let exact = 2.0 * s * std_normal_pdf(x) - 2.0 * a * n.sf(x);
            assert!((g.m_ell(ell, s).unwrap() - exact).abs() < 1e-8, "{ell} {s}");
        }
        assert_eq!(g.m_ell(1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_normal_slope_tends_to_mean() {
        let g = EmpiricalDistribution::gaussian_abs();
        let slope = g.m_ell(1.0, 2001.0).unwrap() - g.m_ell(1.0, 2000.0).unwrap();
        assert!((slope - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-6);
        assert!((g.mean() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn half_normal_tail_integral_matches_density() {
        // ∫_0^β X* = E[|g| 1{|g| ≥ X*(β)}] = 2 φ(X*(β)).
        let g = EmpiricalDistribution::gaussian_abs();
        for beta in [0.05, 0.3, 0.9] {
            let x = g.quantile(beta).unwrap();
            let v = g.upper_tail_integral(beta).unwrap();
            assert!((v - 2.0 * std_normal_pdf(x)).abs() < 1e-9);
        }
    }
}
