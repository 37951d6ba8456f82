//! `orderhull`: sample point models, estimate support functions and mean
//! widths, evaluate Orlicz functions, run sweeps and verification suites.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use orderhull_core::experiments::{run_verification, summarize_ratios, OutputFormat, SweepConfig, SUITES};
use orderhull_core::orlicz::{
    gaussian_q_orlicz, luxemburg_norm, orlicz_inverse, verify_mstar_identity, EmpiricalDistribution, OrliczFunction,
    MAX_BETA,
};
use orderhull_core::samplers::{sample_set, sample_unit_direction};
use orderhull_core::{
    mean_width_batch, support_value, Direction, Error, MeanWidthConfig, ModelSpec, Params, Reduction, RngStream, Role,
    StreamId,
};

mod exit {
    pub const VERIFICATION_FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const IO: u8 = 3;
}

#[derive(Parser, Debug)]
#[command(name = "orderhull", version, about)]
struct Cli {
    /// Master seed for all random streams (default 1; for sweeps, overrides `master_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "ORDERHULL_THREADS")]
    threads: Option<usize>,
    /// Reduce replicates in a fixed order so output is identical for any thread count.
    #[arg(long, global = true)]
    bit_exact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw one point set and print it.
    Sample {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One support value of a freshly drawn body.
    Support {
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        body: Body,
        /// Comma-separated direction, normalized before use; random if omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
    },
    /// Monte Carlo estimate of the expected mean width.
    Meanwidth {
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        body: Body,
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        #[arg(long)]
        antithetic: bool,
    },
    /// Orlicz functions of a law of |X|.
    Orlicz {
        #[command(subcommand)]
        action: OrliczAction,
    },
    /// Run a parameter sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's output format.
        #[arg(long, value_enum)]
        format: Option<TableFormat>,
        /// Print a ratio summary to stderr.
        #[arg(long)]
        summary: bool,
    },
    /// Run a verification suite (or `all`).
    Verify { suite: String },
}

#[derive(Subcommand, Debug)]
enum OrliczAction {
    /// M_ℓ(s) at each s.
    Eval {
        #[arg(long)]
        law: String,
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
    },
    /// The closed-form Gaussian M_ℓ at each t.
    Gaussian {
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Luxemburg norm of the all-ones vector of length N and 1 / M^{-1}(1/N).
    Ones {
        #[arg(long)]
        law: String,
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
        #[arg(long = "N")]
        num_points: usize,
    },
    /// Residuals of the conjugate identity on a grid of β.
    Verify {
        #[arg(long)]
        law: String,
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// Largest acceptable relative residual.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
}

#[derive(Args, Debug)]
struct Shape {
    /// gaussian, cone:P, ball:P or isotropic-ball:P.
    #[arg(long, value_parser = parse_model)]
    model: ModelSpec,
    #[arg(short = 'n', long = "dim")]
    n: usize,
    #[arg(short = 'N', long = "points")]
    num_points: usize,
}

#[derive(Args, Debug)]
struct Body {
    #[arg(long, default_value_t = 1)]
    ell: usize,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

fn parse_model(text: &str) -> Result<ModelSpec, String> {
    let (kind, p) = match text.split_once(':') {
        Some((kind, p)) => (kind, Some(p.parse::<f64>().map_err(|e| format!("bad p `{p}`: {e}"))?)),
        None => (text, None),
    };
    let model = match (kind, p) {
        ("gaussian", None) => ModelSpec::Gaussian,
        ("cone", Some(p)) => ModelSpec::ConeLp { p },
        ("ball", Some(p)) => ModelSpec::UniformBallLp { p },
        ("isotropic-ball", Some(p)) => ModelSpec::IsotropicBallLp { p },
        _ => return Err(format!("unknown model `{text}`; use gaussian, cone:P, ball:P or isotropic-ball:P")),
    };
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}

fn parse_law(text: &str) -> anyhow::Result<EmpiricalDistribution> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    Ok(match kind {
        "gaussian" => EmpiricalDistribution::gaussian_abs(),
        "gaussian-power" => EmpiricalDistribution::gaussian_abs_power(
            arg.parse().map_err(|_| Error::ConfigInvalid(format!("bad power `{arg}`")))?,
        )?,
        "constant" => EmpiricalDistribution::constant(
            arg.parse().map_err(|_| Error::ConfigInvalid(format!("bad constant `{arg}`")))?,
        )?,
        "samples" => {
            let text = std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
            let values = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map(f64::abs).map_err(|_| Error::ConfigInvalid(format!("bad sample `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            EmpiricalDistribution::from_samples(values)?
        }
        _ => {
            return Err(Error::ConfigInvalid(format!(
                "unknown law `{text}`; use gaussian, gaussian-power:Q, constant:C or samples:PATH"
            ))
            .into())
        }
    })
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn reduction(cli: &Cli) -> Reduction {
    if cli.bit_exact {
        Reduction::FixedOrder
    } else {
        Reduction::Unordered
    }
}

/// Returns whether all checks passed.
fn run(cli: &Cli) -> anyhow::Result<bool> {
    let seed = cli.seed.unwrap_or(1);
    match &cli.command {
        Command::Sample { shape, format, out } => {
            let params = Params::new(shape.n, shape.num_points, 1, 1.0)?;
            let mut rng = RngStream::new(seed, StreamId::new(0, 0, Role::Samples))?;
            let set = sample_set(shape.model, &params, &mut rng)?;
            let mut sink: Box<dyn Write> = match out {
                Some(path) => Box::new(BufWriter::new(
                    File::create(path).with_context(|| format!("creating {}", path.display()))?,
                )),
                None => Box::new(io::stdout().lock()),
            };
            match format {
                TableFormat::Json => {
                    serde_json::to_writer_pretty(&mut sink, &set)?;
                    writeln!(sink)?;
                }
                TableFormat::Csv => {
                    let header: Vec<String> = (1..=shape.n).map(|i| format!("x{i}")).collect();
                    writeln!(sink, "{}", header.join(","))?;
                    for row in set.rows() {
                        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                        writeln!(sink, "{}", cells.join(","))?;
                    }
                }
            }
            sink.flush()?;
        }
        Command::Support { shape, body, direction } => {
            let params = Params::new(shape.n, shape.num_points, body.ell, body.q)?;
            let mut rng = RngStream::new(seed, StreamId::new(0, 0, Role::Samples))?;
            let set = sample_set(shape.model, &params, &mut rng)?;
            let theta = match direction {
                Some(coords) => Direction::normalize(coords.clone())?,
                None => {
                    let mut rng = RngStream::new(seed, StreamId::new(0, 0, Role::Directions))?;
                    sample_unit_direction(shape.n, &mut rng)?
                }
            };
            let value = support_value(&set, &theta, body.ell, body.q)?;
            print_json(&serde_json::json!({
                "model": shape.model,
                "params": params,
                "direction": theta,
                "support": value,
                "seed": seed,
            }))?;
        }
        Command::Meanwidth { shape, body, directions, replicates, antithetic } => {
            let cfg = MeanWidthConfig { n_directions: *directions, n_replicates: *replicates, antithetic: *antithetic };
            let pairs = [(body.ell, body.q)];
            let report =
                mean_width_batch(shape.model, shape.n, shape.num_points, &pairs, &cfg, seed, 0, reduction(cli))?;
            print_json(&report[0])?;
        }
        Command::Orlicz { action } => return orlicz(action),
        Command::Sweep { config, out, format, summary } => {
            let mut cfg = SweepConfig::load(config)?;
            if let Some(seed) = cli.seed {
                cfg.master_seed = seed;
            }
            if let Some(path) = out {
                cfg.output_path = Some(path.clone());
            }
            if let Some(format) = format {
                cfg.format = match format {
                    TableFormat::Csv => OutputFormat::Csv,
                    TableFormat::Json => OutputFormat::Json,
                };
            }
            let to_stdout = cfg.output_path.is_none();
            let rows = orderhull_core::experiments::run_sweep(&cfg, reduction(cli))?;
            if to_stdout {
                let stdout = io::stdout();
                match cfg.format {
                    OutputFormat::Csv => orderhull_core::experiments::write_csv(&rows, stdout.lock())?,
                    OutputFormat::Json => orderhull_core::experiments::write_json(&rows, &cfg, stdout.lock())?,
                }
            } else {
                info!("wrote {} rows", rows.len());
            }
            if *summary {
                let s = summarize_ratios(&rows)?;
                eprintln!("{}", serde_json::to_string_pretty(&s)?);
            }
        }
        Command::Verify { suite } => {
            let suites: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut all_passed = true;
            let mut reports = Vec::new();
            for name in suites {
                let report = run_verification(name, seed)?;
                for check in &report.checks {
                    let tag = if check.passed { "PASS" } else { "FAIL" };
                    eprintln!("[{tag}] {}/{}: {}", report.suite, check.name, check.detail);
                }
                all_passed &= report.passed();
                reports.push(report);
            }
            print_json(&reports)?;
            return Ok(all_passed);
        }
    }
    Ok(true)
}

fn orlicz(action: &OrliczAction) -> anyhow::Result<bool> {
    match action {
        OrliczAction::Eval { law, ell, s } => {
            let dist = parse_law(law)?;
            let values = s.iter().map(|&s| dist.m_ell(*ell, s)).collect::<Result<Vec<_>, _>>()?;
            print_json(&serde_json::json!({ "law": law, "ell": ell, "s": s, "M": values }))?;
        }
        OrliczAction::Gaussian { ell, q, t } => {
            if *q < 1.0 || *ell <= 0.0 {
                bail!(Error::ConfigInvalid(format!("need q >= 1 and ell > 0, got q = {q}, ell = {ell}")));
            }
            let values: Vec<f64> = t.iter().map(|&t| gaussian_q_orlicz(*ell, *q, t)).collect();
            print_json(&serde_json::json!({ "ell": ell, "q": q, "t": t, "M": values }))?;
        }
        OrliczAction::Ones { law, ell, num_points } => {
            let m = OrliczFunction::from_distribution(&parse_law(law)?, *ell)?;
            let norm = luxemburg_norm(&m, &vec![1.0; *num_points])?;
            let inverse = orlicz_inverse(&m, 1.0 / *num_points as f64)?;
            print_json(&serde_json::json!({
                "law": law, "ell": ell, "N": num_points,
                "norm_of_ones": norm, "reciprocal_inverse": 1.0 / inverse,
            }))?;
        }
        OrliczAction::Verify { law, ell, betas, tolerance } => {
            let betas = betas.clone().unwrap_or_else(|| {
                let steps = (MAX_BETA / 0.05).round() as usize;
                (1..=steps).map(|i| 0.05 * i as f64).collect()
            });
            let report = verify_mstar_identity(&parse_law(law)?, *ell, &betas)?;
            print_json(&report)?;
            return Ok(report.max_relative_residual() <= *tolerance);
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Io(_) => exit::IO,
                Error::Csv(inner) if inner.is_io_error() => exit::IO,
                _ => exit::CONFIG,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return exit::IO;
        }
    }
    exit::CONFIG
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(exit::CONFIG);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(exit::VERIFICATION_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
