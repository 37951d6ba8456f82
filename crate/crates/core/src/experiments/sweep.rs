//! Parameter sweeps of mean-width estimates against their predictors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::grid::{Bindings, Grid};
use crate::error::{Error, Result};
use crate::geometry::{mean_width_batch, MeanWidthConfig, Reduction};
use crate::predictors::{log_volume_bpn, predictor_logconcave, predictor_lp, PredictorValue};
use crate::types::ModelSpec;

/// Version string written into JSON headers.
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A sweep over `n × N × ℓ × q`, with inner axes allowed to depend on outer ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelSpec,
    pub n: Grid,
    #[serde(rename = "N")]
    pub num_points: Grid,
    pub ell: Grid,
    pub q: Grid,
    #[serde(default)]
    pub mc: MeanWidthConfig,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Cells sharing `(n, N)`; all their `(ℓ, q)` pairs are estimated on common realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGroup {
    pub dim: usize,
    pub num_points: usize,
    pub pairs: Vec<(usize, f64)>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(format!("sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        self.mc.validate()?;
        for (name, grid) in [("n", &self.n), ("N", &self.num_points), ("ell", &self.ell), ("q", &self.q)] {
            if grid.is_empty() {
                return Err(Error::ConfigInvalid(format!("grid `{name}` is empty")));
            }
        }
        self.expand().map(|_| ())
    }

    /// Resolves the grids into groups in row order.
    ///
    /// `n`, `N` and `ℓ` are rounded to integers, `q` is raised to at least 1,
    /// and values that coincide after this are kept once.
    pub fn expand(&self) -> Result<Vec<SweepGroup>> {
        let mut groups = Vec::new();
        for n in dedup(self.n.resolve(&Bindings::default())?.into_iter().map(to_count).collect::<Result<_>>()?) {
            let env = Bindings { n: Some(n as f64), ..Default::default() };
            let sizes: Vec<usize> = self.num_points.resolve(&env)?.into_iter().map(to_count).collect::<Result<_>>()?;
            for num_points in dedup(sizes) {
                let env = Bindings { big_n: Some(num_points as f64), ..env };
                let ells: Vec<usize> = self.ell.resolve(&env)?.into_iter().map(to_count).collect::<Result<_>>()?;
                let mut pairs = Vec::new();
                for ell in dedup(ells) {
                    if ell > num_points {
                        return Err(Error::ConfigInvalid(format!("ell = {ell} exceeds N = {num_points}")));
                    }
                    let env = Bindings { ell: Some(ell as f64), ..env };
                    let mut qs: Vec<f64> = Vec::new();
                    for q in self.q.resolve(&env)? {
                        if !q.is_finite() {
                            return Err(Error::ConfigInvalid(format!("q = {q}")));
                        }
                        let q = q.max(1.0);
                        if !qs.contains(&q) {
                            qs.push(q);
                        }
                    }
                    pairs.extend(qs.into_iter().map(|q| (ell, q)));
                }
                groups.push(SweepGroup { dim: n, num_points, pairs });
            }
        }
        if groups.len() >= 1 << 24 {
            return Err(Error::ConfigInvalid("too many (n, N) groups".into()));
        }
        Ok(groups)
    }
}

fn to_count(x: f64) -> Result<usize> {
    let r = x.round();
    if !(1.0..1e12).contains(&r) {
        return Err(Error::ConfigInvalid(format!("{x} is not a positive count")));
    }
    Ok(r as usize)
}

fn dedup(values: Vec<usize>) -> Vec<usize> {
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// One grid cell: estimate, predictor and their ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub model: String,
    pub p: Option<f64>,
    pub n: usize,
    #[serde(rename = "N")]
    pub num_points: usize,
    pub ell: usize,
    pub q: f64,
    pub replicates: usize,
    pub directions: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub predictor: f64,
    pub ratio: f64,
    pub regime: String,
    pub seed: u64,
}

/// Predicted order of `E w(K_{N,ℓ,q})` for `model`.
///
/// Uniform points on `B_p^n` are the isotropic model rescaled by `|B_p^n|^{1/n}`.
pub fn predictor_for(model: ModelSpec, n: usize, num_points: usize, ell: usize, q: f64) -> Result<PredictorValue> {
    let (nf, nn, l) = (n as f64, num_points as f64, ell as f64);
    match model {
        ModelSpec::Gaussian | ModelSpec::IsotropicBallLp { .. } => predictor_logconcave(nf, nn, l, q),
        ModelSpec::ConeLp { p } => predictor_lp(nf, nn, l, q, p),
        ModelSpec::UniformBallLp { p } => {
            let base = predictor_logconcave(nf, nn, l, q)?;
            let shrink = (log_volume_bpn(n, p)? / nf).exp();
            Ok(PredictorValue { value: base.value * shrink, ..base })
        }
    }
}

/// Runs every cell of `cfg`; writes the table to `cfg.output_path` when set.
pub fn run_sweep(cfg: &SweepConfig, reduction: Reduction) -> Result<Vec<RatioRow>> {
    let groups = cfg.expand()?;
    let mut rows = Vec::new();
    for (index, group) in groups.iter().enumerate() {
        let (n, num_points) = (group.dim, group.num_points);
        if (num_points as f64).ln() > (n as f64).sqrt() {
            warn!("N = {num_points} exceeds e^sqrt(n) for n = {n}; outside the range of the log-concave predictor");
        }
        info!("sweep group {index}: n = {n}, N = {num_points}, {} cells", group.pairs.len());
        let reports = mean_width_batch(
            cfg.model,
            n,
            num_points,
            &group.pairs,
            &cfg.mc,
            cfg.master_seed,
            index as u32,
            reduction,
        )?;
        for report in reports {
            let params = report.params.expect("batch reports carry params");
            let predictor = predictor_for(cfg.model, n, num_points, params.ell, params.q)?;
            rows.push(RatioRow {
                model: cfg.model.name().to_string(),
                p: cfg.model.p(),
                n,
                num_points,
                ell: params.ell,
                q: params.q,
                replicates: report.n_replicates,
                directions: report.n_directions,
                estimate: report.value,
                std_error: report.std_error,
                predictor: predictor.value,
                ratio: report.value / predictor.value,
                regime: predictor.label(),
                seed: cfg.master_seed,
            });
        }
    }
    if let Some(path) = &cfg.output_path {
        let mut out = BufWriter::new(File::create(path)?);
        match cfg.format {
            OutputFormat::Csv => write_csv(&rows, &mut out)?,
            OutputFormat::Json => write_json(&rows, cfg, &mut out)?,
        }
        out.flush()?;
    }
    Ok(rows)
}

/// CSV with a fixed header row.
pub fn write_csv<W: Write>(rows: &[RatioRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record([
            "model",
            "p",
            "n",
            "N",
            "ell",
            "q",
            "replicates",
            "directions",
            "estimate",
            "std_error",
            "predictor",
            "ratio",
            "regime",
            "seed",
        ])?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonHeader<'a> {
    version: &'static str,
    config: &'a SweepConfig,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    header: JsonHeader<'a>,
    rows: &'a [RatioRow],
}

/// JSON: a header echoing the config, then the rows.
pub fn write_json<W: Write>(rows: &[RatioRow], cfg: &SweepConfig, mut out: W) -> Result<()> {
    let table = JsonTable { header: JsonHeader { version: VERSION, config: cfg }, rows };
    serde_json::to_writer_pretty(&mut out, &table)?;
    writeln!(out)?;
    Ok(())
}

/// Reads rows back from CSV.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<RatioRow>> {
    let mut reader = csv::Reader::from_reader(input);
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::grid::GridValue;

    fn list(values: &[&str]) -> Grid {
        Grid::List(
            values
                .iter()
                .map(|v| match v.parse::<f64>() {
                    Ok(x) => GridValue::Number(x),
                    Err(_) => GridValue::Expr(v.to_string()),
                })
                .collect(),
        )
    }

    fn small_config() -> SweepConfig {
        SweepConfig {
            model: ModelSpec::Gaussian,
            n: list(&["4"]),
            num_points: list(&["n", "4*n"]),
            ell: list(&["1", "sqrt(N)", "N/4", "N"]),
            q: list(&["1", "2", "log(N/ell)", "log(N)"]),
            mc: MeanWidthConfig { n_directions: 4, n_replicates: 8, antithetic: false },
            master_seed: 9,
            output_path: None,
            format: OutputFormat::Csv,
        }
    }

    #[test]
    fn expansion_rounds_clamps_and_dedups() {
        let groups = small_config().expand().unwrap();
        assert_eq!(groups.len(), 2);
        // N = 4: ell ∈ {1, 2, 1, 4} → {1, 2, 4}.
        let ells: Vec<usize> = groups[0].pairs.iter().map(|p| p.0).collect();
        assert_eq!(ells.iter().filter(|&&l| l == 1).count(), 3);
        // ell = N makes log(N/ell) = 0, clamped to 1 and merged with q = 1.
        let at_n: Vec<f64> = groups[0].pairs.iter().filter(|p| p.0 == 4).map(|p| p.1).collect();
        assert_eq!(at_n, vec![1.0, 2.0, 4f64.ln().max(1.0)]);
        assert!(groups.iter().all(|g| g.pairs.iter().all(|&(_, q)| q >= 1.0)));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let mut cfg = small_config();
        cfg.q = Grid::List(vec![]);
        assert!(matches!(cfg.validate(), Err(Error::ConfigInvalid(_))));
        let mut cfg = small_config();
        cfg.ell = list(&["2*N"]);
        assert!(matches!(cfg.validate(), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn rows_follow_grid_order_and_ratios_are_positive() {
        let cfg = small_config();
        let rows = run_sweep(&cfg, Reduction::FixedOrder).unwrap();
        let expected: usize = cfg.expand().unwrap().iter().map(|g| g.pairs.len()).sum();
        assert_eq!(rows.len(), expected);
        assert!(rows.windows(2).all(|w| w[0].num_points <= w[1].num_points));
        assert!(rows.iter().all(|r| r.ratio > 0.0 && r.predictor > 0.0));
    }

    #[test]
    fn csv_round_trip_and_determinism() {
        let cfg = small_config();
        let rows = run_sweep(&cfg, Reduction::FixedOrder).unwrap();
        let mut a = Vec::new();
        write_csv(&rows, &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&run_sweep(&cfg, Reduction::FixedOrder).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let header = String::from_utf8(a.clone()).unwrap();
        assert!(header
            .starts_with("model,p,n,N,ell,q,replicates,directions,estimate,std_error,predictor,ratio,regime,seed\n"));
        assert_eq!(read_csv(a.as_slice()).unwrap(), rows);
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{
            "model": {"kind": "cone_lp", "p": 1.5},
            "n": [16], "N": {"start": 16, "stop": 1024, "num": 3},
            "ell": [1, "N"], "q": [1, "log(N)"],
            "mc": {"n_directions": 8, "n_replicates": 10},
            "master_seed": 3, "format": "json"
        }"#;
        let cfg = SweepConfig::from_json(text).unwrap();
        assert_eq!(cfg.format, OutputFormat::Json);
        let again = SweepConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert!(matches!(SweepConfig::from_json("{}"), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn uniform_ball_predictor_rescales_isotropic_one() {
        let iso = predictor_for(ModelSpec::IsotropicBallLp { p: 2.0 }, 8, 64, 1, 1.0).unwrap();
        let uni = predictor_for(ModelSpec::UniformBallLp { p: 2.0 }, 8, 64, 1, 1.0).unwrap();
        // |B_2^8| = π^4 / 24.
        let factor = (std::f64::consts::PI.powi(4) / 24.0).powf(0.125);
        assert!((uni.value / iso.value - factor).abs() < 1e-12);
        assert_eq!(uni.regime, iso.regime);
    }
}
