//! Certified Orlicz functions and the finite-dimensional operations on them.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::distribution::EmpiricalDistribution;
use super::quad::golden_max;
use crate::error::{Error, Result};

const CERT_POINTS: usize = 257;
const CERT_SPAN: f64 = 1e-3;
const CERT_TOL: f64 = 1e-9;
const MAX_ITER: usize = 200;
const REL_TOL: f64 = 1e-12;

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Log-spaced grid on which monotonicity and convexity were checked.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `M > 0` at every grid point. Point masses give `M_ℓ = 0` near the origin.
    pub strictly_positive: bool,
}

/// A convex, nondecreasing `M: [0, ∞) → [0, ∞)` with `M(0) = 0`.
#[derive(Clone)]
pub struct OrliczFunction {
    label: String,
    eval: Eval,
    domain_hint: f64,
    certificate: Certificate,
}

impl fmt::Debug for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrliczFunction")
            .field("label", &self.label)
            .field("domain_hint", &self.domain_hint)
            .finish_non_exhaustive()
    }
}

impl OrliczFunction {
    /// Wraps `eval` and certifies it on `[domain_hint·1e-3, domain_hint]`.
    pub fn new<F>(label: impl Into<String>, eval: F, domain_hint: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        if !(domain_hint.is_finite() && domain_hint > 0.0) {
            return Err(Error::NotOrlicz(format!("{label}: domain hint {domain_hint} invalid")));
        }
        let at_zero = eval(0.0);
        if at_zero != 0.0 {
            return Err(Error::NotOrlicz(format!("{label}: M(0) = {at_zero}")));
        }
        let certificate = certify(&label, &eval, domain_hint)?;
        Ok(OrliczFunction { label, eval: Arc::new(eval), domain_hint, certificate })
    }

    /// `t^p`.
    pub fn power(p: f64) -> Result<Self> {
        check_power(p)?;
        Self::new(format!("t^{p}"), move |t: f64| t.powf(p), 1e3)
    }

    /// `t^p / p`.
    pub fn scaled_power(p: f64) -> Result<Self> {
        check_power(p)?;
        Self::new(format!("t^{p}/{p}"), move |t: f64| t.powf(p) / p, 1e3)
    }

    /// `M_ℓ` of the law `dist`.
    pub fn from_distribution(dist: &EmpiricalDistribution, ell: f64) -> Result<Self> {
        dist.m_ell(ell, 1.0)?;
        let hint = dist.domain_hint(ell);
        let owned = dist.clone();
        Self::new(format!("M_{ell}"), move |s: f64| owned.m_ell(ell, s).unwrap_or(f64::NAN), hint)
    }

    /// The closed-form Gaussian `M_ℓ` of [`gaussian_q_orlicz`].
    pub fn gaussian_q(ell: f64, q: f64) -> Result<Self> {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::OutOfRange(format!("ell = {ell} must be positive")));
        }
        crate::types::check_q(q)?;
        let hint = 16.0 * gaussian_breakpoint(ell, q);
        Self::new(format!("gaussian(ell={ell}, q={q})"), move |t| gaussian_q_orlicz(ell, q, t), hint)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain_hint(&self) -> f64 {
        self.domain_hint
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    /// `M(s)`; NaN if an underlying quadrature failed.
    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    fn try_eval(&self, s: f64) -> Result<f64> {
        let v = (self.eval)(s);
        if v.is_nan() {
            Err(Error::IntegrationFailure(format!("{} at {s}", self.label)))
        } else {
            Ok(v)
        }
    }
}

fn check_power(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::NotOrlicz(format!("t^{p} is not convex")));
    }
    Ok(())
}

fn certify(label: &str, eval: &dyn Fn(f64) -> f64, hint: f64) -> Result<Certificate> {
    let lo = hint * CERT_SPAN;
    let ratio = (hint / lo).powf(((CERT_POINTS - 1) as f64).recip());
    let grid: Vec<f64> = (0..CERT_POINTS).map(|i| lo * ratio.powi(i as i32)).collect();
    let values: Vec<f64> = grid.iter().map(|&s| eval(s)).collect();
    if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::NotOrlicz(format!("{label}: M({}) = {}", grid[i], values[i])));
    }
    for i in 1..CERT_POINTS {
        if values[i] < values[i - 1] - CERT_TOL * (1.0 + values[i].abs()) {
            return Err(Error::NotOrlicz(format!("{label}: decreasing near {}", grid[i])));
        }
    }
    for i in 1..CERT_POINTS - 1 {
        let lambda = (grid[i + 1] - grid[i]) / (grid[i + 1] - grid[i - 1]);
        let chord = lambda * values[i - 1] + (1.0 - lambda) * values[i + 1];
        if values[i] > chord + CERT_TOL * (1.0 + values[i].abs()) {
            return Err(Error::NotOrlicz(format!("{label}: not convex near {}", grid[i])));
        }
    }
    let strictly_positive = values.iter().all(|&v| v > 0.0);
    Ok(Certificate { grid, values, strictly_positive })
}

/// `t* = (1/ℓ)(2q/(q+2))^{q/2}`, the inflection point of the Gaussian exponential piece.
pub fn gaussian_breakpoint(ell: f64, q: f64) -> f64 {
    (2.0 * q / (q + 2.0)).powf(0.5 * q) / ell
}

/// Explicit Orlicz function for `|g|^q` order statistics.
///
/// `(1/ℓ) exp(−q / (ℓt)^{2/q})` on `(0, t*)`, continued for `t ≥ t*` by its
/// tangent line at `t*`, which keeps `M` convex and continuous.
pub fn gaussian_q_orlicz(ell: f64, q: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let t_star = gaussian_breakpoint(ell, q);
    if t < t_star {
        return (-q / (ell * t).powf(2.0 / q)).exp() / ell;
    }
    let at_star = (-0.5 * (q + 2.0)).exp() / ell;
    let slope = (-0.5 * (q + 2.0)).exp() * ((q + 2.0) / q) * ((q + 2.0) / (2.0 * q)).powf(0.5 * q);
    at_star + slope * (t - t_star)
}

/// Luxemburg norm `inf{ρ > 0 : Σ M(|x_i|/ρ) ≤ 1}`.
pub fn luxemburg_norm(m: &OrliczFunction, x: &[f64]) -> Result<f64> {
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::OutOfRange(format!("non-finite coordinate {bad}")));
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    // Bisect on x / max|x_i| so the result is exactly homogeneous under power-of-two scaling.
    let abs: Vec<f64> = x.iter().map(|v| v.abs() / scale).filter(|v| *v > 0.0).collect();
    let modular = |rho: f64| -> Result<f64> { abs.iter().try_fold(0.0, |acc, &v| Ok(acc + m.try_eval(v / rho)?)) };
    let fits = |rho: f64| -> Result<bool> { Ok(modular(rho)? <= 1.0) };
    let (lo, hi) = bracket(1.0, &fits)?;
    Ok(scale * bisect(lo, hi, &fits)?)
}

/// Smallest `s ≥ 0` with `M(s) ≥ y`.
pub fn orlicz_inverse(m: &OrliczFunction, y: f64) -> Result<f64> {
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::OutOfRange(format!("y = {y} must be finite and >= 0")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let reaches = |s: f64| -> Result<bool> { Ok(m.try_eval(s)? >= y) };
    let cert = m.certificate();
    let start = match cert.values.iter().position(|&v| v >= y) {
        Some(i) => cert.grid[i],
        None => 1.0,
    };
    let (lo, hi) = bracket(start, &reaches).map_err(|e| match e {
        Error::NoFiniteBracket => Error::OutOfRange(format!("{y} is outside the range of M")),
        other => other,
    })?;
    bisect(lo, hi, &reaches)
}

/// Legendre transform `M*(x) = sup_{t ≥ 0} (xt − M(t))`.
pub fn legendre_conjugate(m: &OrliczFunction, x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::OutOfRange(format!("x = {x} must be finite and >= 0")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let objective = |t: f64| x * t - m.eval(t);
    let limit = m.domain_hint();
    let mut t = limit * 2f64.powi(-30);
    let mut current = objective(t);
    loop {
        let next = objective(2.0 * t);
        if next.is_nan() || current.is_nan() {
            return Err(Error::IntegrationFailure(format!("{} near {t}", m.label())));
        }
        if next <= current {
            break;
        }
        t *= 2.0;
        current = next;
        if 2.0 * t > limit {
            return Err(Error::UnboundedConjugate(x));
        }
    }
    let value = golden_max(objective, 0.0, 2.0 * t);
    if value.is_nan() {
        return Err(Error::IntegrationFailure(m.label().to_string()));
    }
    Ok(value.max(0.0))
}

/// Finds `lo < hi` with `pred(hi)` true and `pred(lo)` false, where `pred` is monotone in its
/// argument. `lo = 0` is returned when the predicate holds arbitrarily close to zero.
fn bracket(start: f64, pred: &dyn Fn(f64) -> Result<bool>) -> Result<(f64, f64)> {
    let mut hi = start;
    let mut steps = 0;
    while !pred(hi)? {
        hi *= 2.0;
        steps += 1;
        if steps > 2 * MAX_ITER || !hi.is_finite() {
            return Err(Error::NoFiniteBracket);
        }
    }
    let mut lo = 0.5 * hi;
    steps = 0;
    while pred(lo)? {
        hi = lo;
        lo *= 0.5;
        steps += 1;
        if steps > 2 * MAX_ITER || lo < f64::MIN_POSITIVE {
            return Ok((0.0, hi));
        }
    }
    Ok((lo, hi))
}

fn bisect(mut lo: f64, mut hi: f64, pred: &dyn Fn(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..MAX_ITER {
        if hi - lo <= REL_TOL * hi {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::IntegrationFailure(format!("bisection did not converge in {MAX_ITER} steps")))
}

/// One row of [`verify_mstar_identity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MstarResidual {
    pub beta: f64,
    /// `∫_0^β X*(z) dz`.
    pub tail_integral: f64,
    /// `M_ℓ*` at the tail integral.
    pub conjugate: f64,
    /// `β / ℓ`.
    pub target: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MstarReport {
    pub ell: f64,
    pub rows: Vec<MstarResidual>,
}

impl MstarReport {
    pub fn max_relative_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_residual).fold(0.0, f64::max)
    }
}

/// Largest β accepted by [`verify_mstar_identity`].
pub const MAX_BETA: f64 = 0.9;

/// Checks `M_ℓ*(∫_0^β X*) = β/ℓ`, with `M_ℓ` built from the law and the left
/// integral from the quantile function.
pub fn verify_mstar_identity(dist: &EmpiricalDistribution, ell: f64, betas: &[f64]) -> Result<MstarReport> {
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b <= MAX_BETA)) {
        return Err(Error::OutOfRange(format!("beta = {b} outside (0, {MAX_BETA}]")));
    }
    let m = OrliczFunction::from_distribution(dist, ell)?;
    let rows = betas
        .iter()
        .map(|&beta| {
            let tail_integral = dist.upper_tail_integral(beta)?;
            let conjugate = legendre_conjugate(&m, tail_integral)?;
            let target = beta / ell;
            let abs_residual = (conjugate - target).abs();
            Ok(MstarResidual {
                beta,
                tail_integral,
                conjugate,
                target,
                abs_residual,
                rel_residual: abs_residual / target,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MstarReport { ell, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_norms() {
        let m = OrliczFunction::power(2.0).unwrap();
        assert!((luxemburg_norm(&m, &[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-10);
        assert_eq!(luxemburg_norm(&m, &[0.0, 0.0]).unwrap(), 0.0);
        let m3 = OrliczFunction::power(3.0).unwrap();
        let x = [1.0, -2.0, 0.5];
        let lp = x.iter().map(|v: &f64| v.abs().powi(3)).sum::<f64>().cbrt();
        assert!((luxemburg_norm(&m3, &x).unwrap() - lp).abs() < 1e-10 * lp);
    }

    #[test]
    fn inverse_examples() {
        let m = OrliczFunction::power(2.0).unwrap();
        assert!((orlicz_inverse(&m, 4.0).unwrap() - 2.0).abs() < 1e-10);
        assert_eq!(orlicz_inverse(&m, 0.0).unwrap(), 0.0);
        assert!(orlicz_inverse(&m, -1.0).is_err());
        let g = OrliczFunction::gaussian_q(1.0, 1.0).unwrap();
        let t = orlicz_inverse(&g, (-1.5f64).exp()).unwrap();
        assert!((t - (2.0f64 / 3.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn conjugate_examples() {
        let quad = OrliczFunction::scaled_power(2.0).unwrap();
        assert!((legendre_conjugate(&quad, 3.0).unwrap() - 4.5).abs() < 1e-10);
        assert_eq!(legendre_conjugate(&quad, 0.0).unwrap(), 0.0);
        let cubic = OrliczFunction::scaled_power(3.0).unwrap();
        assert!((legendre_conjugate(&cubic, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn linear_growth_has_unbounded_conjugate() {
        let m = OrliczFunction::power(1.0).unwrap();
        assert!(matches!(legendre_conjugate(&m, 2.0), Err(Error::UnboundedConjugate(_))));
    }

    #[test]
    fn gaussian_breakpoint_values() {
        let v = gaussian_q_orlicz(1.0, 2.0, 1.0);
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        assert!((gaussian_breakpoint(1.0, 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(gaussian_q_orlicz(3.0, 2.0, 0.0), 0.0);
    }

    #[test]
    fn gaussian_inverse_in_small_regime() {
        let g = OrliczFunction::gaussian_q(1.0, 1.0).unwrap();
        let n = 10f64.exp();
        let s = orlicz_inverse(&g, 1.0 / n).unwrap();
        assert!((s - 10f64.powf(-0.5)).abs() < 1e-10);
    }

    #[test]
    fn non_convex_functions_are_rejected() {
        assert!(matches!(OrliczFunction::new("sqrt", f64::sqrt, 10.0), Err(Error::NotOrlicz(_))));
        assert!(matches!(OrliczFunction::new("shifted", |t| t + 1.0, 10.0), Err(Error::NotOrlicz(_))));
    }

    #[test]
    fn constant_law_certificate_is_not_strict() {
        let d = EmpiricalDistribution::constant(1.0).unwrap();
        let m = OrliczFunction::from_distribution(&d, 4.0).unwrap();
        assert!(!m.certificate().strictly_positive);
        let g = OrliczFunction::from_distribution(&EmpiricalDistribution::gaussian_abs(), 1.0).unwrap();
        assert!(g.certificate().strictly_positive);
    }

    #[test]
    fn mstar_identity_for_constant_law() {
        let d = EmpiricalDistribution::constant(1.0).unwrap();
        let report = verify_mstar_identity(&d, 4.0, &[0.05, 0.5, 0.9]).unwrap();
        assert!(report.max_relative_residual() < 1e-9);
        assert!(verify_mstar_identity(&d, 1.0, &[0.95]).is_err());
        assert!(verify_mstar_identity(&d, 1.0, &[0.0]).is_err());
    }
}
