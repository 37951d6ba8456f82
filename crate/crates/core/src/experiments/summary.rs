//! Ratio statistics over a sweep table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sweep::RatioRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRange {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / min_ratio`.
    pub spread: f64,
    pub count: usize,
}

impl RatioRange {
    fn of(ratios: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0);
        for r in ratios {
            lo = lo.min(r);
            hi = hi.max(r);
            count += 1;
        }
        RatioRange { min_ratio: lo, max_ratio: hi, spread: hi / lo, count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    #[serde(flatten)]
    pub overall: RatioRange,
    pub per_regime: BTreeMap<String, RatioRange>,
}

/// Extremes and spread of `estimate / predictor`, overall and per regime.
pub fn summarize_ratios(rows: &[RatioRow]) -> Result<RatioSummary> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(row) = rows.iter().find(|r| !(r.predictor > 0.0)) {
        return Err(Error::OutOfRange(format!("predictor {} is not positive", row.predictor)));
    }
    let ratio = |r: &RatioRow| r.estimate / r.predictor;
    let overall = RatioRange::of(rows.iter().map(ratio));
    let mut labels: Vec<&str> = rows.iter().map(|r| r.regime.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    let per_regime = labels
        .into_iter()
        .map(|label| {
            let range = RatioRange::of(rows.iter().filter(|r| r.regime == label).map(ratio));
            (label.to_string(), range)
        })
        .collect();
    Ok(RatioSummary { overall, per_regime })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(estimate: f64, predictor: f64, regime: &str) -> RatioRow {
        RatioRow {
            model: "gaussian".into(),
            p: None,
            n: 4,
            num_points: 8,
            ell: 1,
            q: 1.0,
            replicates: 1,
            directions: 1,
            estimate,
            std_error: 0.0,
            predictor,
            ratio: estimate / predictor,
            regime: regime.into(),
            seed: 0,
        }
    }

    #[test]
    fn spread_examples() {
        let equal = summarize_ratios(&[row(2.0, 1.0, "a"), row(4.0, 2.0, "b")]).unwrap();
        assert_eq!(equal.overall.spread, 1.0);
        let s = summarize_ratios(&[row(0.5, 1.0, "a"), row(1.5, 1.0, "b"), row(1.0, 1.0, "a")]).unwrap();
        assert_eq!(s.overall.spread, 3.0);
        assert_eq!(s.per_regime["a"].spread, 2.0);
        assert_eq!(s.per_regime["b"].count, 1);
        assert!(matches!(summarize_ratios(&[]), Err(Error::EmptyInput)));
        assert!(summarize_ratios(&[row(1.0, 0.0, "a")]).is_err());
    }

    #[test]
    fn spread_is_scale_free() {
        let rows = [row(0.7, 1.0, "a"), row(2.2, 1.3, "b"), row(0.9, 0.4, "a")];
        let scaled: Vec<RatioRow> = rows.iter().map(|r| row(r.estimate * 8.0, r.predictor, &r.regime)).collect();
        let a = summarize_ratios(&rows).unwrap().overall.spread;
        let b = summarize_ratios(&scaled).unwrap().overall.spread;
        assert!((a - b).abs() < 1e-14 * a);
    }
}
