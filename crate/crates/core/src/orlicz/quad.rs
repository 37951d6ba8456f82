//! Adaptive Simpson quadrature and one-dimensional root/extremum search.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 50;
/// Integrand evaluations allowed before giving up.
const MAX_EVALS: usize = 2_000_000;

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut failed = false;
    let mut budget = MAX_EVALS;
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut budget, &mut failed);
    if failed || !value.is_finite() {
        return Err(Error::IntegrationFailure(format!("tolerance {tol:e} not met on [{a}, {b}]")));
    }
    Ok(value)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut usize,
    failed: &mut bool,
) -> f64 {
    if *failed {
        return whole;
    }
    *budget = budget.saturating_sub(2);
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 || *budget == 0 {
        *failed = true;
        return left + right;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget, failed)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget, failed)
}

/// Maximum of a concave `f` on `[a, b]` by golden-section search.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-14 * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(a)).max(f(b))
}
