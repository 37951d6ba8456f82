//! Closed-form asymptotic predictors and exact constants.
//!
//! Logarithms are natural throughout. Predictors carry an implied constant of
//! one; they are meant as the denominator of two-sided ratio tests.
//! Arguments `N` and `ℓ` are real so that boundary cases such as `N = e^9`
//! can be evaluated directly.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Which branch of a `min{max{…}}` case split produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `q ≤ log(N/ℓ)`: value `√log(N/ℓ)`.
    SmallQ,
    /// `log(N/ℓ) < q < log N`: value `√q`.
    MidQ,
    /// `q ≥ log N`: value `√log N`.
    LargeQ,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::SmallQ => "small-q",
            Regime::MidQ => "mid-q",
            Regime::LargeQ => "large-q",
        }
    }
}

/// Whether a predictor is a two-sided equivalence or only an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    Equivalence,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorValue {
    pub value: f64,
    pub regime: Regime,
    pub strength: Strength,
}

impl PredictorValue {
    /// Regime label for tables, e.g. `mid-q` or `large-q (bound)`.
    pub fn label(&self) -> String {
        match self.strength {
            Strength::Equivalence => self.regime.label().to_string(),
            Strength::UpperBound => format!("{} (bound, not equivalence)", self.regime.label()),
        }
    }
}

fn check_counts(num_points: f64, ell: f64, q: f64) -> Result<()> {
    if !(num_points.is_finite() && num_points >= 1.0) {
        return Err(Error::NonPositiveDimension(format!("N = {num_points}")));
    }
    if !(ell >= 1.0 && ell <= num_points) {
        return Err(Error::EllOutOfRange { ell, num_points: num_points as usize });
    }
    crate::types::check_q(q)
}

fn regime_of(log_ratio: f64, log_n: f64, q: f64) -> Regime {
    if q >= log_n {
        Regime::LargeQ
    } else if q <= log_ratio {
        Regime::SmallQ
    } else {
        Regime::MidQ
    }
}

/// `min{max{√q, √log(N/ℓ)}, √log N}` for isotropic log-concave points.
pub fn predictor_logconcave(n: f64, num_points: f64, ell: f64, q: f64) -> Result<PredictorValue> {
    if !(n >= 1.0) {
        return Err(Error::NonPositiveDimension(format!("n = {n}")));
    }
    check_counts(num_points, ell, q)?;
    let log_n = num_points.ln();
    let log_ratio = (num_points / ell).ln().max(0.0);
    let value = q.sqrt().max(log_ratio.sqrt()).min(log_n.sqrt());
    Ok(PredictorValue { value, regime: regime_of(log_ratio, log_n, q), strength: Strength::Equivalence })
}

/// `n^{-1/p}` times [`predictor_logconcave`], for cone-measure points on the ℓ_p sphere.
pub fn predictor_lp(n: f64, num_points: f64, ell: f64, q: f64, p: f64) -> Result<PredictorValue> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidModel(format!("p = {p}")));
    }
    let base = predictor_logconcave(n, num_points, ell, q)?;
    Ok(PredictorValue { value: n.powf(-p.recip()) * base.value, ..base })
}

/// Order-statistic growth for Gaussian marginals, valid for `1 ≤ q ≤ log N`:
/// `√log(N/ℓ)` if `q ≤ log(N/ℓ)`, else `√q`.
pub fn predictor_gaussian_orderstats(num_points: f64, ell: f64, q: f64) -> Result<f64> {
    check_counts(num_points, ell, q)?;
    let log_n = num_points.ln();
    if q > log_n {
        return Err(Error::QOutOfRegime { q, log_n });
    }
    let log_ratio = (num_points / ell).ln().max(0.0);
    Ok(if q <= log_ratio { log_ratio.sqrt() } else { q.sqrt() })
}

/// `c_n = n Γ(1 + (n-1)/2) / (√2 Γ(1 + n/2))`, the ratio between the
/// expected support function of Gaussian points and a mean width.
pub fn c_n_constant(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::NonPositiveDimension("n = 0".into()));
    }
    let n = n as f64;
    Ok((n.ln() + ln_gamma(1.0 + (n - 1.0) / 2.0) - ln_gamma(1.0 + n / 2.0) - 0.5 * std::f64::consts::LN_2).exp())
}

/// `log |B_p^n| = n log(2Γ(1+1/p)) − log Γ(1+n/p)`.
pub fn log_volume_bpn(n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::NonPositiveDimension("n = 0".into()));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidModel(format!("p = {p}")));
    }
    let n_f = n as f64;
    Ok(n_f * (std::f64::consts::LN_2 + ln_gamma(1.0 + p.recip())) - ln_gamma(1.0 + n_f / p))
}

/// Volume of the unit ℓ_p^n ball.
pub fn volume_bpn(n: usize, p: f64) -> Result<f64> {
    log_volume_bpn(n, p).map(f64::exp)
}

/// Asymptotic size of `E‖G‖_p` for a standard Gaussian `G ∈ R^n`:
/// `n^{1/p} √p` if `p ≤ log n`, `√log n` otherwise. `p = ∞` is allowed.
pub fn gaussian_pnorm_expectation(n: usize, p: f64) -> Result<PredictorValue> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("n = {n} < 2")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidModel(format!("p = {p}")));
    }
    let log_n = (n as f64).ln();
    let (value, regime) = if p <= log_n {
        ((n as f64).powf(p.recip()) * p.sqrt(), Regime::SmallQ)
    } else {
        (log_n.sqrt(), Regime::LargeQ)
    };
    Ok(PredictorValue { value, regime, strength: Strength::Equivalence })
}

/// Hölder conjugate `p* = p/(p-1)`; `∞` for `p = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Asymptotic mean width of `B_p^n`, split on the conjugate exponent:
/// `n^{1/p* − 1/2} √p*` if `p* ≤ log n`, `n^{-1/2} √log n` otherwise.
///
/// Written in `p*` so that `√n · w(B_p^n)` reproduces
/// [`gaussian_pnorm_expectation`]`(n, p*)` term for term.
pub fn mean_width_bpn(n: usize, p: f64) -> Result<PredictorValue> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("n = {n} < 2")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidModel(format!("p = {p}")));
    }
    let p_star = conjugate_exponent(p);
    let n_f = n as f64;
    let log_n = n_f.ln();
    let (value, regime) = if p_star <= log_n {
        (n_f.powf(p_star.recip() - 0.5) * p_star.sqrt(), Regime::SmallQ)
    } else {
        (log_n.sqrt() / n_f.sqrt(), Regime::LargeQ)
    };
    Ok(PredictorValue { value, regime, strength: Strength::Equivalence })
}

/// Upper bound for many points, `e^{√n} ≤ N ≤ e^n`. Outside that range the
/// value is still returned and a warning is logged.
pub fn many_points_upper(n: f64, num_points: f64, ell: f64, q: f64) -> Result<PredictorValue> {
    if !(n >= 1.0) {
        return Err(Error::NonPositiveDimension(format!("n = {n}")));
    }
    check_counts(num_points, ell, q)?;
    let log_n = num_points.ln();
    if log_n < n.sqrt() || log_n > n {
        log::warn!("many-points bound used outside e^sqrt(n) <= N <= e^n (n = {n}, N = {num_points})");
    }
    let log_ratio = (num_points / ell).ln().max(0.0);
    let regime = regime_of(log_ratio, log_n, q);
    let value = match regime {
        Regime::SmallQ => log_n / n.sqrt() * log_ratio.sqrt(),
        Regime::MidQ => log_n / n.sqrt() * q.sqrt(),
        Regime::LargeQ => log_n.sqrt() * log_n.ln().powi(2),
    };
    Ok(PredictorValue { value, regime, strength: Strength::UpperBound })
}

/// Euclidean-norm deviation bound for isotropic log-concave vectors:
/// `μ(‖x‖₂ ≥ c t √n) ≤ e^{−t√n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    /// The radius `c t √n` the bound refers to.
    pub threshold: f64,
    /// The probability bound `e^{−t√n}`.
    pub probability: f64,
    /// The unknown absolute constant used for `threshold`.
    pub constant: f64,
}

pub fn paouris_tail(t: f64, n: usize) -> Result<TailBound> {
    paouris_tail_with_constant(t, n, 1.0)
}

pub fn paouris_tail_with_constant(t: f64, n: usize, constant: f64) -> Result<TailBound> {
    if !(t >= 1.0) {
        return Err(Error::TBelowOne(t));
    }
    if n == 0 {
        return Err(Error::NonPositiveDimension("n = 0".into()));
    }
    let root_n = (n as f64).sqrt();
    Ok(TailBound { threshold: constant * t * root_n, probability: (-t * root_n).exp(), constant })
}
