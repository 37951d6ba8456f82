//! Built-in verification suites with per-check diagnostics.

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::grid::{Grid, GridValue};
use super::sweep::{run_sweep, OutputFormat, SweepConfig};
use crate::error::{Error, Result};
use crate::geometry::{support_value, MeanWidthConfig, Reduction};
use crate::orlicz::{gaussian_breakpoint, gaussian_q_orlicz, verify_mstar_identity, EmpiricalDistribution};
use crate::predictors::{c_n_constant, gaussian_pnorm_expectation, volume_bpn};
use crate::rng::{RngStream, Role, StreamId};
use crate::samplers::{lp_norm, sample_cone_lp, sample_set, PGeneralized};
use crate::stats::{correlation, ks_two_sample, MeanSummary};
use crate::types::{ModelSpec, Params};

/// Names accepted by [`run_verification`].
pub const SUITES: [&str; 5] = ["pathwise", "samplers", "orlicz", "ratios", "formulas"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs one named suite.
pub fn run_verification(suite: &str, seed: u64) -> Result<VerificationReport> {
    let checks = match suite {
        "pathwise" => pathwise(seed, 1000)?,
        "samplers" => samplers(seed)?,
        "orlicz" => orlicz()?,
        "ratios" => ratios(seed)?,
        "formulas" => formulas(seed)?,
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    Ok(VerificationReport { suite: suite.to_string(), seed, checks })
}

fn stream(seed: u64, cell: u32, replicate: u64, role: Role) -> Result<RngStream> {
    RngStream::new(seed, StreamId::new(cell, replicate, role))
}

/// Counts of exact-inequality violations over random instances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathwiseTally {
    pub instances: usize,
    pub q_monotone: usize,
    pub ell_monotone: usize,
    pub sandwich: usize,
    pub full_ell_identity: usize,
}

/// A random model with `1 ≤ p ≤ 4` where applicable.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R) -> ModelSpec {
    let p = 1.0 + 3.0 * rng.random::<f64>();
    match rng.random_range(0..4) {
        0 => ModelSpec::Gaussian,
        1 => ModelSpec::ConeLp { p },
        2 => ModelSpec::UniformBallLp { p },
        _ => ModelSpec::IsotropicBallLp { p },
    }
}

/// Monotonicity in `q` and `ℓ`, the `e^{-1}` sandwich and the `ℓ = N` power-mean identity.
pub fn pathwise_tally(seed: u64, instances: usize) -> Result<PathwiseTally> {
    const QS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
    let mut tally = PathwiseTally { instances, ..Default::default() };
    for i in 0..instances as u64 {
        let mut pick = stream(seed, 0, i, Role::Auxiliary)?;
        let model = random_model(&mut pick);
        let n = pick.random_range(1..=32);
        let num_points = pick.random_range(1..=512);
        let params = Params::new(n, num_points, 1, 1.0)?;
        let set = sample_set(model, &params, &mut stream(seed, 1, i, Role::Samples)?)?;
        let theta = crate::samplers::sample_unit_direction(n, &mut stream(seed, 1, i, Role::Directions)?)?;
        let mut ells: Vec<usize> =
            std::iter::successors(Some(1usize), |l| Some(l * 2)).take_while(|&l| l <= num_points).collect();
        if *ells.last().expect("ell = 1") != num_points {
            ells.push(num_points);
        }
        let table: Vec<Vec<f64>> = ells
            .iter()
            .map(|&l| QS.iter().map(|&q| support_value(&set, &theta, l, q)).collect())
            .collect::<Result<_>>()?;
        let top = table[0][0];
        for (li, row) in table.iter().enumerate() {
            tally.q_monotone += row.windows(2).filter(|w| w[1] < w[0]).count();
            if li > 0 {
                tally.ell_monotone += row.iter().zip(&table[li - 1]).filter(|(now, before)| now > before).count();
            }
            for (qi, &h) in row.iter().enumerate() {
                if QS[qi] >= (ells[li] as f64).ln() && !(h <= top && (-1.0f64).exp() * top <= h) {
                    tally.sandwich += 1;
                }
            }
        }
        let marginals: Vec<f64> = set.rows().map(|x| crate::types::dot(x, theta.coords())).collect();
        for (qi, &q) in QS.iter().enumerate() {
            let direct = (marginals.iter().map(|m| m.abs().powf(q)).sum::<f64>() / num_points as f64).powf(q.recip());
            let h = table[ells.len() - 1][qi];
            if (h - direct).abs() > 1e-12 * direct.max(f64::MIN_POSITIVE) {
                tally.full_ell_identity += 1;
            }
        }
    }
    Ok(tally)
}

fn pathwise(seed: u64, instances: usize) -> Result<Vec<Check>> {
    let t = pathwise_tally(seed, instances)?;
    let line = |v: usize| format!("{v} violations over {} instances", t.instances);
    Ok(vec![
        Check::new("monotone in q", t.q_monotone == 0, line(t.q_monotone)),
        Check::new("antitone in ell", t.ell_monotone == 0, line(t.ell_monotone)),
        Check::new("sandwich", t.sandwich == 0, line(t.sandwich)),
        Check::new("ell = N power mean", t.full_ell_identity == 0, line(t.full_ell_identity)),
    ])
}

/// `E|t|^k = Γ((k+1)/p) / Γ(1/p)` for density `∝ exp(−|t|^p)`.
pub fn p_generalized_abs_moment(p: f64, k: f64) -> f64 {
    (ln_gamma((k + 1.0) / p) - ln_gamma(p.recip())).exp()
}

fn samplers(seed: u64) -> Result<Vec<Check>> {
    use rand::distr::Distribution;
    let mut checks = Vec::new();
    let draws = 200_000;
    for (pi, p) in [1.0, 1.5, 2.0, 4.0].into_iter().enumerate() {
        let gen = PGeneralized::new(p)?;
        let mut rng = stream(seed, 2, pi as u64, Role::Samples)?;
        let xs: Vec<f64> = (0..draws).map(|_| gen.sample(&mut rng).abs()).collect();
        for k in [1.0, 2.0] {
            let pw: Vec<f64> = xs.iter().map(|x| x.powf(k)).collect();
            let s = MeanSummary::from_slice(&pw);
            let expected = p_generalized_abs_moment(p, k);
            let z = (s.mean - expected) / s.std_error;
            checks.push(Check::new(
                format!("p-generalized E|t|^{k}, p = {p}"),
                z.abs() < 4.0,
                format!("mean {:.6} expected {expected:.6} z = {z:.2}", s.mean),
            ));
        }
        let mut rng = stream(seed, 3, pi as u64, Role::Samples)?;
        let worst = (0..1000)
            .map(|_| sample_cone_lp(8, p, &mut rng).map(|d| (lp_norm(&d.point, p) - 1.0).abs()))
            .try_fold(0.0f64, |m, e| e.map(|e| m.max(e)))?;
        checks.push(Check::new(
            format!("cone points on sphere, p = {p}"),
            worst <= 1e-12,
            format!("max |‖Y‖_p − 1| = {worst:e}"),
        ));
        let mut rng = stream(seed, 4, pi as u64, Role::Samples)?;
        let (first, radius): (Vec<f64>, Vec<f64>) = (0..20_000)
            .map(|_| sample_cone_lp(4, p, &mut rng).map(|d| (d.point[0], d.radius)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        let r = correlation(&first, &radius);
        checks.push(Check::new(
            format!("direction independent of radius, p = {p}"),
            r.abs() < 0.02,
            format!("corr = {r:.4}"),
        ));
    }
    let mut a = stream(seed, 5, 0, Role::Samples)?;
    let mut b = stream(seed, 5, 1, Role::Samples)?;
    let cone: Vec<f64> =
        (0..20_000).map(|_| sample_cone_lp(5, 2.0, &mut a).map(|d| d.point[0])).collect::<Result<_>>()?;
    let sphere: Vec<f64> = (0..20_000)
        .map(|_| crate::samplers::sample_unit_direction(5, &mut b).map(|d| d.coords()[0]))
        .collect::<Result<_>>()?;
    let ks = ks_two_sample(&cone, &sphere);
    checks.push(Check::new(
        "p = 2 cone measure is uniform on the sphere",
        ks.p_value > 0.01,
        format!("KS D = {:.4}, p = {:.3}", ks.statistic, ks.p_value),
    ));
    Ok(checks)
}

fn orlicz() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let betas: Vec<f64> = (1..=18).map(|i| 0.05 * i as f64).collect();
    for (name, dist) in
        [("gaussian |g|", EmpiricalDistribution::gaussian_abs()), ("constant", EmpiricalDistribution::constant(1.0)?)]
    {
        for ell in [1.0, 4.0, 16.0] {
            let worst = verify_mstar_identity(&dist, ell, &betas)?.max_relative_residual();
            checks.push(Check::new(
                format!("conjugate identity, {name}, ell = {ell}"),
                worst <= 0.02,
                format!("max relative residual {worst:.2e}"),
            ));
        }
    }
    let g = EmpiricalDistribution::gaussian_abs();
    let mut worst: f64 = 0.0;
    for ell in [2.0, 4.0, 16.0, 64.0] {
        for s in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 50.0] {
            worst = worst.max((ell * g.m_ell(ell, s)? - g.m_ell(1.0, ell * s)?).abs());
        }
    }
    checks.push(Check::new("scaling in ell", worst <= 1e-6, format!("max abs deviation {worst:.2e}")));
    let (mut at, mut jump): (f64, f64) = (0.0, 0.0);
    for q in [1.0, 2.0, 4.0, 8.0] {
        for ell in [1.0, 4.0, 64.0] {
            let t = gaussian_breakpoint(ell, q);
            let target = (-(q + 2.0) / 2.0).exp() / ell;
            at = at.max((gaussian_q_orlicz(ell, q, t) - target).abs());
            let left = (-q / (ell * t * (1.0 - 1e-12)).powf(2.0 / q)).exp() / ell;
            jump = jump.max((gaussian_q_orlicz(ell, q, t * (1.0 + 1e-12)) - left).abs());
        }
    }
    checks.push(Check::new("gaussian breakpoint value", at <= 1e-12, format!("max deviation {at:.2e}")));
    checks.push(Check::new("gaussian continuity", jump <= 1e-10, format!("max jump {jump:.2e}")));
    Ok(checks)
}

fn ratios(seed: u64) -> Result<Vec<Check>> {
    let expr = |v: &[&str]| Grid::List(v.iter().map(|s| GridValue::Expr(s.to_string())).collect());
    let cfg = SweepConfig {
        model: ModelSpec::Gaussian,
        n: Grid::List(vec![GridValue::Number(8.0)]),
        num_points: expr(&["n", "n^2", "2^9"]),
        ell: expr(&["1", "sqrt(N)", "N"]),
        q: expr(&["1", "2", "log(N)"]),
        mc: MeanWidthConfig { n_directions: 16, n_replicates: 50, antithetic: false },
        master_seed: seed,
        output_path: None,
        format: OutputFormat::Csv,
    };
    let rows = run_sweep(&cfg, Reduction::FixedOrder)?;
    Ok(rows
        .iter()
        .map(|r| {
            Check::new(
                format!("ratio n={} N={} ell={} q={:.3}", r.n, r.num_points, r.ell, r.q),
                (0.125..=8.0).contains(&r.ratio),
                format!(
                    "estimate {:.4} ± {:.4}, predictor {:.4}, ratio {:.3} [{}]",
                    r.estimate, r.std_error, r.predictor, r.ratio, r.regime
                ),
            )
        })
        .collect())
}

/// Hit-rate estimate of `|B_p^n|` from `draws` uniform points in `[−1, 1]^n`.
pub fn volume_hit_rate(n: usize, p: f64, draws: usize, seed: u64) -> Result<MeanSummary> {
    let mut rng = stream(seed, 6, n as u64, Role::Auxiliary)?;
    let cube = 2f64.powi(n as i32);
    let mut point = vec![0.0; n];
    let hits: Vec<f64> = (0..draws)
        .map(|_| {
            point.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
            if lp_norm(&point, p) <= 1.0 {
                cube
            } else {
                0.0
            }
        })
        .collect();
    Ok(MeanSummary::from_slice(&hits))
}

fn formulas(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (n, p) in [(2, 1.0), (3, 2.0), (4, 1.5), (6, 4.0)] {
        let mc = volume_hit_rate(n, p, 200_000, seed)?;
        let exact = volume_bpn(n, p)?;
        checks.push(Check::new(
            format!("volume of B_{p}^{n}"),
            (mc.mean - exact).abs() <= 3.0 * mc.std_error,
            format!("formula {exact:.5}, hit rate {:.5} ± {:.5}", mc.mean, mc.std_error),
        ));
    }
    let c = c_n_constant(10_000)? / 100.0;
    checks.push(Check::new("c_n / sqrt(n) at n = 1e4", (c - 1.0).abs() <= 0.01, format!("{c:.6}")));
    let n = 1000;
    let mut rng = stream(seed, 7, 0, Role::Samples)?;
    let gaussians: Vec<Vec<f64>> =
        (0..400).map(|_| crate::samplers::sample_gaussian_vector(n, &mut rng)).collect::<Result<_>>()?;
    for p in [1.0, 2.0, 10.0, (n as f64).ln()] {
        let norms: Vec<f64> = gaussians.iter().map(|g| lp_norm(g, p)).collect();
        let mc = MeanSummary::from_slice(&norms).mean;
        let formula = gaussian_pnorm_expectation(n, p)?.value;
        let ratio = mc / formula;
        checks.push(Check::new(
            format!("E‖G‖_p, n = {n}, p = {p:.3}"),
            (1.0 / 3.0..=3.0).contains(&ratio),
            format!("MC {mc:.4}, formula {formula:.4}, ratio {ratio:.3}"),
        ));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_verification("nope", 0), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn pathwise_small_run_is_clean() {
        let t = pathwise_tally(17, 40).unwrap();
        assert_eq!(t, PathwiseTally { instances: 40, ..Default::default() });
    }

    #[test]
    fn moment_formula() {
        // p = 2: density ∝ e^{−t²} is N(0, 1/2), so E t² = 1/2 and E|t| = 1/√π.
        assert!((p_generalized_abs_moment(2.0, 2.0) - 0.5).abs() < 1e-14);
        assert!((p_generalized_abs_moment(2.0, 1.0) - std::f64::consts::PI.sqrt().recip()).abs() < 1e-14);
        // p = 1: Laplace, E|t| = 1.
        assert!((p_generalized_abs_moment(1.0, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orlicz_suite_passes() {
        let report = run_verification("orlicz", 0).unwrap();
        assert!(report.passed(), "{report:#?}");
    }
}
