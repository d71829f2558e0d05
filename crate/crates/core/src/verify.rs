//! Empirical checks of the scaling limits.
//!
//! In the diffusive regime the first coordinate of the rescaled chain should
//! behave like a stationary Ornstein–Uhlenbeck process with autocorrelation
//! `e^{−(ℓ²/2) h t}`. In the fluid regime with `τ = 0` the limit is the
//! constant path, so the displacement over a fixed horizon should shrink as
//! `N` grows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{default_k, derive_replication_seed, Alpha};
use crate::kernel::{Chain, Kernel, ProposalParams};
use crate::skew::{CConstants, SkewParams, SkewRegistry};
use crate::target::Spectrum;
use crate::theory::{
    ab_constants, limiting_accept, maximize_speed, tau_nu, GammaRegime, LimitRegime,
};

/// Number of replication batches used for standard errors.
pub const BATCHES: usize = 20;
/// A diffusive check passes when every lag is within this many standard errors.
pub const TOLERANCE_SE: f64 = 4.0;

/// `e^{−(ℓ²/2) h t}`.
pub fn ou_autocorr(t: f64, ell: f64, h: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::validation(format!(
            "lag must be nonnegative, got {t}"
        )));
    }
    Ok((-0.5 * ell * ell * h * t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    /// Lag time (diffusive) or dimension (fluid).
    pub t_or_n: f64,
    pub empirical: f64,
    pub theoretical: f64,
    pub se: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCheckReport {
    pub regime: &'static str,
    pub ell: f64,
    /// Limiting acceptance probability at `ell`.
    pub h: f64,
    pub tau: f64,
    pub rows: Vec<LimitRow>,
    pub max_abs_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusiveCheck {
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: f64,
    pub gamma: f64,
    pub alpha: Alpha,
    #[serde(default)]
    pub matrix: Option<String>,
    /// Defaults to the speed-maximising `ℓ*`.
    #[serde(default)]
    pub ell: Option<f64>,
    pub lags: Vec<f64>,
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidCheck {
    pub ns: Vec<usize>,
    #[serde(default = "default_k")]
    pub k: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub matrix: String,
    pub ell: f64,
    /// Time horizon `T` in units of `N^{αγ}` steps.
    pub horizon: f64,
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
}

/// Contents of a `limit-check` config file, selected by its `mode` key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LimitCheckConfig {
    Diffusive(DiffusiveCheck),
    Fluid(FluidCheck),
}

impl LimitCheckConfig {
    pub fn run(&self, registry: &SkewRegistry) -> Result<LimitCheckReport> {
        match self {
            LimitCheckConfig::Diffusive(c) => diffusive_limit_check(c, registry),
            LimitCheckConfig::Fluid(c) => fluid_limit_check(c, registry),
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            LimitCheckConfig::Diffusive(c) => c.master_seed = seed,
            LimitCheckConfig::Fluid(c) => c.master_seed = seed,
        }
    }
}

fn check_replications(r: usize) -> Result<()> {
    if r < 2 * BATCHES {
        return Err(Error::validation(format!(
            "need at least {} replications, got {r}",
            2 * BATCHES
        )));
    }
    Ok(())
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len() as f64;
    let ma = a.iter().sum::<f64>() / m;
    let mb = b.iter().sum::<f64>() / m;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Standard error of a statistic from its values on contiguous batches.
fn batch_se(batch_values: &[f64]) -> f64 {
    let b = batch_values.len() as f64;
    let mean = batch_values.iter().sum::<f64>() / b;
    let var = batch_values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (b - 1.0);
    (var / b).sqrt()
}

fn batches(len: usize) -> impl Iterator<Item = std::ops::Range<usize>> {
    (0..BATCHES).map(move |i| (i * len / BATCHES)..((i + 1) * len / BATCHES))
}

/// Lag correlations of the first coordinate on the `N^{2γ}` clock against the
/// limiting OU curve.
pub fn diffusive_limit_check(
    cfg: &DiffusiveCheck,
    registry: &SkewRegistry,
) -> Result<LimitCheckReport> {
    let gamma_regime = GammaRegime::from_gamma(cfg.gamma)?;
    let regime = cfg.alpha.regime(cfg.gamma);
    if gamma_regime != GammaRegime::EqualOneSixth || !regime.is_diffusive() {
        return Err(Error::Regime(format!(
            "diffusive check needs gamma = 1/6 and alpha >= 2, got gamma = {}, alpha = {}",
            cfg.gamma, cfg.alpha
        )));
    }
    check_replications(cfg.replications)?;
    if cfg.lags.is_empty() {
        return Err(Error::validation("at least one lag is required"));
    }
    for &t in &cfg.lags {
        ou_autocorr(t, 1.0, 1.0)?;
    }
    let alpha = cfg.alpha.kernel_value();
    let family = registry.get(&cfg.alpha.matrix_name(cfg.matrix.as_deref())?)?;
    let constants = match cfg.alpha {
        Alpha::Mala => CConstants::ZERO,
        Alpha::Value(a) => family.analytic_constants(a, gamma_regime.canonical_gamma(cfg.gamma))?,
    };
    let ell = match cfg.ell {
        Some(l) => l,
        None => maximize_speed(&constants, alpha)?.ell,
    };
    let (a, b) = ab_constants(&constants, alpha, ell)?;
    let h = limiting_accept(a, b, ell, GammaRegime::EqualOneSixth)?;
    let (_, tau) = tau_nu(a, b, ell, GammaRegime::EqualOneSixth)?;

    let spectrum = Spectrum::power_law(cfg.n, cfg.k)?;
    let op = family.build(&SkewParams {
        n: cfg.n,
        k: cfg.k,
        alpha,
        gamma: cfg.gamma,
    })?;
    let kernel = Kernel::new(
        ProposalParams::new(ell, cfg.gamma, alpha, cfg.n)?,
        &spectrum,
        op.as_ref(),
    )?;

    let clock = regime.clock(cfg.n);
    let lag_steps: Vec<usize> = cfg
        .lags
        .iter()
        .map(|t| (t * clock).floor() as usize)
        .collect();
    let horizon = lag_steps.iter().copied().max().unwrap_or(0);

    // paths[r][j] = first coordinate at step lag_steps[j] of replication r.
    let paths: Vec<(f64, Vec<f64>)> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_replication_seed(cfg.master_seed, r as u64, 0));
            let x0 = spectrum.sample_stationary(&mut rng);
            let start = x0[0];
            let mut trace = Vec::with_capacity(horizon + 1);
            trace.push(start);
            let mut chain = Chain::new(&kernel, x0)?;
            for _ in 0..horizon {
                chain.step(&mut rng);
                trace.push(chain.state()[0]);
            }
            Ok((start, lag_steps.iter().map(|&m| trace[m]).collect()))
        })
        .collect::<Result<_>>()?;

    let starts: Vec<f64> = paths.iter().map(|p| p.0).collect();
    let rows = cfg
        .lags
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let theoretical = ou_autocorr(t, ell, h)?;
            if lag_steps[j] == 0 {
                return Ok(LimitRow {
                    t_or_n: t,
                    empirical: 1.0,
                    theoretical,
                    se: 0.0,
                    deviation: 1.0 - theoretical,
                });
            }
            let ends: Vec<f64> = paths.iter().map(|p| p.1[j]).collect();
            let empirical = pearson(&starts, &ends);
            let per_batch: Vec<f64> = batches(ends.len())
                .map(|r| pearson(&starts[r.clone()], &ends[r]))
                .collect();
            Ok(LimitRow {
                t_or_n: t,
                empirical,
                theoretical,
                se: batch_se(&per_batch),
                deviation: empirical - theoretical,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let passed = rows
        .iter()
        .all(|r| r.deviation.abs() <= TOLERANCE_SE * r.se || r.deviation == 0.0);
    Ok(LimitCheckReport {
        regime: "diffusive",
        ell,
        h,
        tau,
        max_abs_deviation: rows.iter().map(|r| r.deviation.abs()).fold(0.0, f64::max),
        rows,
        passed,
    })
}

/// `sup_{t ≤ T} ‖x̄(t) − x(0)‖` for one chain, with `x̄` the linear interpolant
/// on a clock of `clock` steps per unit time.
fn sup_displacement<R: rand::Rng + ?Sized>(
    kernel: &Kernel<'_>,
    x0: Vec<f64>,
    clock: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<f64> {
    let span = horizon * clock;
    let whole = span.floor() as usize;
    let frac = span - whole as f64;
    let start = x0.clone();
    let dist = |x: &[f64]| -> f64 {
        x.iter()
            .zip(&start)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut chain = Chain::new(kernel, x0)?;
    let mut sup: f64 = 0.0;
    for _ in 0..whole {
        chain.step(rng);
        sup = sup.max(dist(chain.state()));
    }
    if frac > 0.0 {
        let before = chain.state().to_vec();
        chain.step(rng);
        let end: Vec<f64> = before
            .iter()
            .zip(chain.state())
            .map(|(a, b)| (1.0 - frac) * a + frac * b)
            .collect();
        sup = sup.max(dist(&end));
    }
    Ok(sup)
}

/// Median sup-displacement over `[0, T]` on the `N^{αγ}` clock, for each `N`.
pub fn fluid_limit_check(cfg: &FluidCheck, registry: &SkewRegistry) -> Result<LimitCheckReport> {
    let gamma_regime = GammaRegime::from_gamma(cfg.gamma)?;
    if !(cfg.alpha >= 1.0 && cfg.alpha < 2.0) {
        return Err(Error::Regime(format!(
            "fluid check needs 1 <= alpha < 2, got {}",
            cfg.alpha
        )));
    }
    check_replications(cfg.replications)?;
    if cfg.ns.is_empty() {
        return Err(Error::validation("at least one dimension is required"));
    }
    if !(cfg.horizon.is_finite() && cfg.horizon >= 0.0) {
        return Err(Error::validation(format!(
            "horizon must be nonnegative, got {}",
            cfg.horizon
        )));
    }
    let family = registry.get(&cfg.matrix)?;
    let constants =
        family.analytic_constants(cfg.alpha, gamma_regime.canonical_gamma(cfg.gamma))?;
    let (a, b) = ab_constants(&constants, cfg.alpha, cfg.ell)?;
    let h = limiting_accept(a, b, cfg.ell, gamma_regime)?;
    let (_, tau) = tau_nu(a, b, cfg.ell, gamma_regime)?;
    if tau != 0.0 {
        return Err(Error::Regime(format!(
            "fluid check needs tau = 0, got {tau} for matrix {}",
            cfg.matrix
        )));
    }
    let regime = LimitRegime::new(cfg.alpha, cfg.gamma);

    let mut rows = Vec::with_capacity(cfg.ns.len());
    for (g, &n) in cfg.ns.iter().enumerate() {
        let spectrum = Spectrum::power_law(n, cfg.k)?;
        let op = family.build(&SkewParams {
            n,
            k: cfg.k,
            alpha: cfg.alpha,
            gamma: cfg.gamma,
        })?;
        let kernel = Kernel::new(
            ProposalParams::new(cfg.ell, cfg.gamma, cfg.alpha, n)?,
            &spectrum,
            op.as_ref(),
        )?;
        let clock = regime.clock(n);
        let sups: Vec<f64> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let seed = derive_replication_seed(cfg.master_seed, r as u64, g as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x0 = spectrum.sample_stationary(&mut rng);
                sup_displacement(&kernel, x0, clock, cfg.horizon, &mut rng)
            })
            .collect::<Result<_>>()?;
        let per_batch: Vec<f64> = batches(sups.len())
            .map(|r| median(&mut sups[r].to_vec()))
            .collect();
        let d = median(&mut sups.clone());
        log::info!("fluid check: n = {n}, median displacement {d:.4}");
        rows.push(LimitRow {
            t_or_n: n as f64,
            empirical: d,
            theoretical: 0.0,
            se: batch_se(&per_batch),
            deviation: d,
        });
    }

    let pairs = rows.len().saturating_sub(1);
    let decreases = rows
        .windows(2)
        .filter(|w| w[1].empirical < w[0].empirical)
        .count();
    Ok(LimitCheckReport {
        regime: "fluid",
        ell: cfg.ell,
        h,
        tau,
        max_abs_deviation: rows.iter().map(|r| r.deviation.abs()).fold(0.0, f64::max),
        rows,
        passed: decreases >= pairs - pairs / 3,
    })
}

pub fn write_report<W: std::io::Write>(report: &LimitCheckReport, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["t_or_N", "empirical", "theoretical", "se", "deviation"])?;
    for r in &report.rows {
        w.serialize((r.t_or_n, r.empirical, r.theoretical, r.se, r.deviation))?;
    }
    w.flush()?;
    Ok(())
}
