//! Order statistics of absolute values and their `ℓ`-deep power means.
//!
//! Everything here sums the top order statistics in descending order after
//! dividing by the maximum. Both the single-shot and the batched entry points
//! go through the same term and finishing functions, so they agree bit for bit.

use crate::error::{Error, Result};
use crate::types::check_q;

/// Beyond this fraction of `N`, a full sort beats selection followed by a prefix sort.
const FULL_SORT_FRACTION: usize = 4;

/// The `k`-th largest element (1-based), ties counted with multiplicity.
pub fn kth_max(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > values.len() {
        return Err(Error::KOutOfRange { k, len: values.len() });
    }
    ensure_finite(values)?;
    let mut buf = values.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    Ok(*kth)
}

/// `((1/ℓ) Σ_{k≤ℓ} kmax |v_i|^q)^{1/q}`.
///
/// Equals `max |v_i|` for `ℓ = 1` and `N^{-1/q} ‖v‖_q` for `ℓ = N`.
pub fn orderstat_power_mean(values: &[f64], ell: usize, q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if ell == 0 || ell > values.len() {
        return Err(Error::EllOutOfRange { ell: ell as f64, num_points: values.len() });
    }
    check_q(q)?;
    ensure_finite(values)?;
    let mut buf: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    Ok(power_mean_of_abs(&mut buf, ell, q))
}

/// Same as [`orderstat_power_mean`] on a scratch buffer of absolute values.
/// The buffer is reordered. Callers guarantee `1 ≤ ℓ ≤ len`, finite entries and valid `q`.
pub(crate) fn power_mean_of_abs(buf: &mut [f64], ell: usize, q: f64) -> f64 {
    let top = top_descending(buf, ell);
    let max = top[0];
    if max == 0.0 {
        return 0.0;
    }
    let sum: f64 = top.iter().map(|&x| term(x / max, q)).sum();
    finish(max, sum, ell, q)
}

/// Evaluates many `(ℓ, q)` pairs on one buffer of absolute values.
///
/// `out[j]` receives the power mean for `pairs[j]`. Scratch space in `sums` is reused.
pub(crate) fn power_means_of_abs(buf: &mut [f64], pairs: &[(usize, f64)], sums: &mut Vec<f64>, out: &mut [f64]) {
    debug_assert_eq!(pairs.len(), out.len());
    let ell_max = pairs.iter().map(|&(ell, _)| ell).max().unwrap_or(1);
    let top = top_descending(buf, ell_max);
    let max = top[0];
    if max == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    // One running sum per distinct q, recorded at every requested depth.
    let mut done = vec![false; pairs.len()];
    for j in 0..pairs.len() {
        if done[j] {
            continue;
        }
        let q = pairs[j].1;
        let same_q: Vec<usize> = (j..pairs.len()).filter(|&i| pairs[i].1.to_bits() == q.to_bits()).collect();
        let depth = same_q.iter().map(|&i| pairs[i].0).max().unwrap_or(1);
        sums.clear();
        let mut acc = 0.0;
        for &x in &top[..depth] {
            acc += term(x / max, q);
            sums.push(acc);
        }
        for i in same_q {
            let ell = pairs[i].0;
            out[i] = finish(max, sums[ell - 1], ell, q);
            done[i] = true;
        }
    }
}

/// Moves the `ell` largest entries to the front, sorted descending.
pub(crate) fn top_descending(buf: &mut [f64], ell: usize) -> &mut [f64] {
    let desc = |a: &f64, b: &f64| b.total_cmp(a);
    if ell.saturating_mul(FULL_SORT_FRACTION) > buf.len() {
        buf.sort_unstable_by(desc);
    } else {
        buf.select_nth_unstable_by(ell - 1, desc);
        buf[..ell].sort_unstable_by(desc);
    }
    &mut buf[..ell]
}

#[inline]
fn term(ratio: f64, q: f64) -> f64 {
    if q == 1.0 {
        ratio
    } else if q == 2.0 {
        ratio * ratio
    } else {
        ratio.powf(q)
    }
}

#[inline]
fn finish(max: f64, sum: f64, ell: usize, q: f64) -> f64 {
    let mean = sum / ell as f64;
    if q == 1.0 {
        max * mean
    } else if q == 2.0 {
        max * mean.sqrt()
    } else {
        max * mean.powf(q.recip())
    }
}

fn ensure_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::OutOfRange("non-finite value".into()))
    }
}
