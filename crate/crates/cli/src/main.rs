use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ipmala_core::harness::{self, load_toml, ExperimentConfig, SweepConfig};
use ipmala_core::skew::{estimate_c_constants, expected_tilde_norm_sq, SkewParams, SkewRegistry};
use ipmala_core::theory::theory_table;
use ipmala_core::verify::{write_report, LimitCheckConfig};
use ipmala_core::{Error, Result, Spectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const THREADS_ENV: &str = "IPMALA_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "ipmala",
    version,
    about = "Irreversible-proposal MALA experiments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed; overrides the config file's master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (IPMALA_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output CSV path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal ell and acceptance probability for the weighted Jordan family.
    TheoryTable {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10,15,30")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 1.0 / 6.0)]
        gamma: f64,
    },
    /// Run one experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every [[experiment]] of a TOML config into one CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monte Carlo estimates of the normalized drift moments.
    ProbeConstants {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
    },
    /// Diffusive or fluid scaling-limit check from a TOML config.
    LimitCheck {
        #[arg(long)]
        config: PathBuf,
    },
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Error::Validation(format!(
                "{THREADS_ENV} must be a nonnegative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(flag),
    }
}

fn open_sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    let threads = resolve_threads(cli.global.threads)?;
    let registry = SkewRegistry::with_builtin();
    let pool = harness::thread_pool(threads)?;
    let seed = cli.global.seed;

    match cli.command {
        Command::TheoryTable { alphas, gamma } => {
            let rows = theory_table(&alphas, gamma)?;
            let mut w = csv::Writer::from_writer(open_sink(cli.global.out.as_deref())?);
            w.write_record(["alpha", "ell_star", "h_star"])?;
            for r in rows {
                w.serialize((r.alpha, r.ell_star, r.h_star))?;
            }
            w.flush()?;
        }
        Command::Run { config } => {
            let mut cfg: ExperimentConfig = load_toml(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let rows = harness::run_experiment_in(&cfg, &registry, &pool)?;
            let out = cli.global.out.or(cfg.output.clone());
            harness::write_rows(&rows, open_sink(out.as_deref())?)?;
        }
        Command::Sweep { config } => {
            let mut sweep: SweepConfig = load_toml(&config)?;
            let mut rows = Vec::new();
            for cfg in &mut sweep.experiment {
                if let Some(s) = seed {
                    cfg.master_seed = s;
                }
                rows.extend(harness::run_experiment_in(cfg, &registry, &pool)?);
            }
            let out = cli.global.out.or(sweep.output);
            harness::write_rows(&rows, open_sink(out.as_deref())?)?;
        }
        Command::ProbeConstants {
            matrix,
            alpha,
            gamma,
            n,
            samples,
            k,
        } => {
            let family = registry.get(&matrix)?;
            let op = family.build(&SkewParams { n, k, alpha, gamma })?;
            let spectrum = Spectrum::power_law(n, k)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            let est =
                estimate_c_constants(op.as_ref(), &spectrum, alpha, gamma, samples, &mut rng)?;
            let analytic = family.analytic_constants(alpha, gamma).ok();
            let exact_c1 = expected_tilde_norm_sq(op.as_ref(), &spectrum)
                / (n as f64).powf(2.0 * (alpha - 1.0) * gamma);

            let mut w = csv::Writer::from_writer(open_sink(cli.global.out.as_deref())?);
            w.write_record(["constant", "estimate", "se", "analytic", "exact_finite_n"])?;
            w.serialize((
                "c1",
                est.c1.mean,
                est.c1.se,
                analytic.map(|c| c.c1),
                Some(exact_c1),
            ))?;
            w.serialize((
                "c2",
                est.c2.mean,
                est.c2.se,
                analytic.map(|c| c.c2),
                None::<f64>,
            ))?;
            w.serialize((
                "c3",
                est.c3.mean,
                est.c3.se,
                analytic.map(|c| c.c3),
                None::<f64>,
            ))?;
            w.flush()?;
        }
        Command::LimitCheck { config } => {
            let mut cfg: LimitCheckConfig = load_toml(&config)?;
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            let report = pool.install(|| cfg.run(&registry))?;
            log::info!(
                "{} check: ell = {:.4}, h = {:.4}, max |deviation| = {:.4}, passed = {}",
                report.regime,
                report.ell,
                report.h,
                report.max_abs_deviation,
                report.passed
            );
            write_report(&report, open_sink(cli.global.out.as_deref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
