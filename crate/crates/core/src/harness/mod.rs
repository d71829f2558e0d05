//! Configured experiments: `ℓ` sweeps with seeded parallel replications,
//! CT-based selection, and CSV output.

mod config;
mod seed;

pub use config::{default_k, load_toml, Alpha, EllSpec, ExperimentConfig, Objective, SweepConfig};
pub use seed::{derive_replication_seed, GRID_MIX, REPLICATION_MIX};

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{ChainSummary, ReplicationReport, ReplicationStats};
use crate::kernel::{run_chain, Chain, Kernel, ProposalParams};
use crate::skew::{SkewOperator, SkewParams, SkewRegistry};
use crate::target::Spectrum;

/// One aggregated grid point; the CSV schema of `run` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub gamma: f64,
    pub alpha: String,
    pub matrix: String,
    pub ell: f64,
    pub steps: usize,
    pub reps: usize,
    pub h_hat: Option<f64>,
    pub h_sd: Option<f64>,
    pub esjd: Option<f64>,
    pub esjd_sd: Option<f64>,
    pub rho1: Option<f64>,
    pub rho1_sd: Option<f64>,
    pub ct: Option<f64>,
    pub ct_sd: Option<f64>,
    pub theta2: Option<f64>,
    pub theta2_sd: Option<f64>,
    pub theta3: Option<f64>,
    pub theta3_sd: Option<f64>,
    pub selected: bool,
}

/// A rayon pool with `threads` workers, or rayon's default when `None` or 0.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))
}

/// Runs one stationarity-started chain and returns its statistics.
pub fn run_replication(
    kernel: &Kernel<'_>,
    cfg: &ExperimentConfig,
    clock: f64,
    seed: u64,
) -> Result<ReplicationStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x0 = kernel.spectrum().sample_stationary(&mut rng);
    if cfg.burn_in > 0 {
        let mut chain = Chain::new(kernel, x0)?;
        for _ in 0..cfg.burn_in {
            chain.step(&mut rng);
        }
        x0 = chain.into_state();
    }
    let mut summary = ChainSummary::new(cfg.coordinates);
    run_chain(kernel, cfg.steps, x0, &mut rng, &mut [&mut summary])?;
    summary.stats(clock)
}

fn build_operator(
    cfg: &ExperimentConfig,
    registry: &SkewRegistry,
) -> Result<Box<dyn SkewOperator>> {
    registry.build(
        &cfg.matrix_name()?,
        &SkewParams {
            n: cfg.n,
            k: cfg.k,
            alpha: cfg.alpha.kernel_value(),
            gamma: cfg.gamma,
        },
    )
}

/// Runs every `(ℓ, replication)` task of `cfg` on `pool` and aggregates per `ℓ`.
///
/// Replication `r` at grid index `g` is seeded with
/// `derive_replication_seed(master_seed, r, g)`, so results do not depend on
/// the number of threads.
pub fn run_experiment_in(
    cfg: &ExperimentConfig,
    registry: &SkewRegistry,
    pool: &rayon::ThreadPool,
) -> Result<Vec<ResultRow>> {
    cfg.validate(registry)?;
    let spectrum = Spectrum::power_law(cfg.n, cfg.k)?;
    let op = build_operator(cfg, registry)?;
    let ells = cfg.ell.values();
    let clock = cfg.alpha.regime(cfg.gamma).clock(cfg.n);
    let kernels = ells
        .iter()
        .map(|&ell| {
            let params = ProposalParams::new(ell, cfg.gamma, cfg.alpha.kernel_value(), cfg.n)?;
            Kernel::new(params, &spectrum, op.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = cfg.replications;
    let tasks: Vec<(usize, usize)> = (0..ells.len())
        .flat_map(|g| (0..reps).map(move |r| (g, r)))
        .collect();
    log::info!(
        "running {} chains of {} steps (n = {}, matrix = {}, alpha = {})",
        tasks.len(),
        cfg.steps,
        cfg.n,
        cfg.matrix_name()?,
        cfg.alpha
    );
    let results: Vec<ReplicationStats> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(g, r)| {
                let seed = derive_replication_seed(cfg.master_seed, r as u64, g as u64);
                run_replication(&kernels[g], cfg, clock, seed)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let matrix = cfg.matrix_name()?;
    let mut rows: Vec<ResultRow> = results
        .chunks(reps)
        .zip(&ells)
        .map(|(chunk, &ell)| {
            let report = ReplicationReport::summarize(chunk);
            if report.ct_undefined > 0 {
                log::debug!(
                    "ell = {ell}: CT undefined in {} of {} replications",
                    report.ct_undefined,
                    report.replications
                );
            }
            ResultRow {
                n: cfg.n,
                gamma: cfg.gamma,
                alpha: cfg.alpha.to_string(),
                matrix: matrix.clone(),
                ell,
                steps: cfg.steps,
                reps,
                h_hat: report.h_hat.mean,
                h_sd: report.h_hat.sd,
                esjd: report.esjd.mean,
                esjd_sd: report.esjd.sd,
                rho1: report.rho1.mean,
                rho1_sd: report.rho1.sd,
                ct: report.ct.mean,
                ct_sd: report.ct.sd,
                theta2: report.theta2.mean,
                theta2_sd: report.theta2.sd,
                theta3: report.theta3.mean,
                theta3_sd: report.theta3.sd,
                selected: false,
            }
        })
        .collect();

    let partial = rows.iter().filter(|r| r.ct.is_none()).count();
    if partial > 0 {
        log::info!("{partial} of {} grid points have no defined CT", rows.len());
    }
    let chosen = match cfg.objective {
        config::Objective::FixedEll => Some(0),
        config::Objective::MinCt => rows
            .iter()
            .enumerate()
            .filter_map(|(i, row)| row.ct.map(|ct| (i, ct)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i),
    };
    match chosen {
        Some(i) => rows[i].selected = true,
        None => log::warn!("no ell has a defined CT; nothing selected"),
    }
    Ok(rows)
}

/// [`run_experiment_in`] on a fresh pool of `threads` workers.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    registry: &SkewRegistry,
    threads: Option<usize>,
) -> Result<Vec<ResultRow>> {
    run_experiment_in(cfg, registry, &thread_pool(threads)?)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(source: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(source);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
