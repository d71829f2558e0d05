//! Streaming chain statistics and their aggregation over replications.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{ChainObserver, Transition};

/// Which coordinates ESJD and `ρ₁` are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    /// The first coordinate only.
    #[default]
    First,
    /// Every coordinate; ESJD is the per-coordinate mean and `ρ₁` the mean
    /// of the per-coordinate correlations.
    All,
}

/// Lag-1 Pearson correlation of a scalar series, accumulated online.
///
/// Sums are taken about the first value so that a constant series yields
/// exact zeros.
#[derive(Debug, Clone, Default)]
pub struct Lag1 {
    shift: f64,
    last: Option<f64>,
    pairs: usize,
    sum_a: f64,
    sum_b: f64,
    sum_aa: f64,
    sum_bb: f64,
    sum_ab: f64,
}

impl Lag1 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        let Some(prev) = self.last else {
            self.shift = value;
            self.last = Some(value);
            return;
        };
        let a = prev - self.shift;
        let b = value - self.shift;
        self.pairs += 1;
        self.sum_a += a;
        self.sum_b += b;
        self.sum_aa += a * a;
        self.sum_bb += b * b;
        self.sum_ab += a * b;
        self.last = Some(value);
    }

    /// Number of `(x_k, x_{k+1})` pairs seen.
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// Sample correlation of `(x_k, x_{k+1})`.
    ///
    /// A constant series (every step rejected) gives 1. A series where only
    /// one side of the pairs varies has no defined correlation.
    pub fn correlation(&self) -> Result<f64> {
        if self.pairs < 10 {
            return Err(Error::validation(format!(
                "lag-1 correlation needs at least 10 steps, got {}",
                self.pairs
            )));
        }
        let m = self.pairs as f64;
        let saa = self.sum_aa - self.sum_a * self.sum_a / m;
        let sbb = self.sum_bb - self.sum_b * self.sum_b / m;
        let sab = self.sum_ab - self.sum_a * self.sum_b / m;
        if self.sum_aa == 0.0 && self.sum_bb == 0.0 {
            return Ok(1.0);
        }
        if saa <= 0.0 || sbb <= 0.0 {
            return Err(Error::UndefinedStatistic(
                "lag-1 correlation of a series with zero variance".into(),
            ));
        }
        Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Per-chain accumulators for acceptance, ESJD, `ρ₁`, `θ₂ = E‖X‖²` and
/// `θ₃ = E Σ X_i³`.
#[derive(Debug, Clone)]
pub struct ChainSummary {
    coordinates: Coordinates,
    steps: usize,
    accepts: usize,
    esjd_sum: f64,
    lag: Vec<Lag1>,
    theta2_sum: f64,
    theta3_sum: f64,
}

impl ChainSummary {
    pub fn new(coordinates: Coordinates) -> Self {
        Self {
            coordinates,
            steps: 0,
            accepts: 0,
            esjd_sum: 0.0,
            lag: Vec::new(),
            theta2_sum: 0.0,
            theta3_sum: 0.0,
        }
    }

    /// Folds in one transition from `prev` to `next`.
    pub fn observe_step(&mut self, accepted: bool, prev: &[f64], next: &[f64]) {
        let tracked = match self.coordinates {
            Coordinates::First => 1.min(prev.len()),
            Coordinates::All => prev.len(),
        };
        if self.lag.is_empty() {
            self.lag = vec![Lag1::new(); tracked];
            for (acc, &x) in self.lag.iter_mut().zip(prev) {
                acc.push(x);
            }
        }
        self.steps += 1;
        if accepted {
            self.accepts += 1;
            let jump: f64 = prev[..tracked]
                .iter()
                .zip(&next[..tracked])
                .map(|(p, n)| (n - p) * (n - p))
                .sum();
            self.esjd_sum += jump / tracked as f64;
        }
        for (acc, &x) in self.lag.iter_mut().zip(next) {
            acc.push(x);
        }
        let (mut sq, mut cube) = (0.0, 0.0);
        for &x in next {
            let x2 = x * x;
            sq += x2;
            cube += x2 * x;
        }
        self.theta2_sum += sq;
        self.theta3_sum += cube;
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn accepts(&self) -> usize {
        self.accepts
    }

    pub fn esjd_sum(&self) -> f64 {
        self.esjd_sum
    }

    fn per_step(&self, total: f64) -> Result<f64> {
        if self.steps == 0 {
            return Err(Error::UndefinedStatistic("no steps observed".into()));
        }
        Ok(total / self.steps as f64)
    }

    pub fn acceptance_rate(&self) -> Result<f64> {
        self.per_step(self.accepts as f64)
    }

    pub fn esjd(&self) -> Result<f64> {
        self.per_step(self.esjd_sum)
    }

    pub fn theta2(&self) -> Result<f64> {
        self.per_step(self.theta2_sum)
    }

    pub fn theta3(&self) -> Result<f64> {
        self.per_step(self.theta3_sum)
    }

    /// Lag-1 autocorrelation of the tracked coordinates; needs at least 10 steps.
    pub fn rho1(&self) -> Result<f64> {
        if self.lag.is_empty() {
            return Err(Error::validation(
                "lag-1 correlation needs at least 10 steps, got 0",
            ));
        }
        let mut total = 0.0;
        for acc in &self.lag {
            total += acc.correlation()?;
        }
        Ok(total / self.lag.len() as f64)
    }

    /// Snapshot of the per-replication statistics. Undefined `ρ₁` or CT are
    /// reported as `None`.
    pub fn stats(&self, clock: f64) -> Result<ReplicationStats> {
        let rho1 = match self.rho1() {
            Ok(r) => Some(r),
            Err(Error::UndefinedStatistic(msg)) => {
                log::debug!("rho1 undefined: {msg}");
                None
            }
            Err(e) => return Err(e),
        };
        let ct = rho1.and_then(|r| ct_from_clock(r, clock).ok());
        Ok(ReplicationStats {
            h_hat: self.acceptance_rate()?,
            esjd: self.esjd()?,
            rho1,
            ct,
            theta2: self.theta2()?,
            theta3: self.theta3()?,
        })
    }
}

impl ChainObserver for ChainSummary {
    fn observe(&mut self, t: &Transition<'_>) -> Result<()> {
        self.observe_step(t.accepted, t.prev, t.next);
        Ok(())
    }
}

fn ct_from_clock(rho1: f64, clock: f64) -> Result<f64> {
    if !(rho1 > 0.0 && rho1 < 1.0) {
        return Err(Error::UndefinedStatistic(format!(
            "computational time needs 0 < rho1 < 1, got {rho1}"
        )));
    }
    Ok(-1.0 / (clock * rho1.ln()))
}

/// `CT = −1 / (N^{ζγ} ln ρ₁)`.
pub fn ct_statistic(rho1: f64, n: usize, zeta: f64, gamma: f64) -> Result<f64> {
    ct_from_clock(rho1, (n as f64).powf(zeta * gamma))
}

/// Statistics of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationStats {
    pub h_hat: f64,
    pub esjd: f64,
    pub rho1: Option<f64>,
    pub ct: Option<f64>,
    pub theta2: f64,
    pub theta3: f64,
}

/// Sample mean and standard deviation over the replications where the
/// statistic was defined.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub count: usize,
}

impl Stat {
    /// Sums run over sorted values so the result does not depend on input order.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let count = values.len();
        if count == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = (count >= 2).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (count - 1) as f64).sqrt()
        });
        Self {
            mean: Some(mean),
            sd,
            count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationReport {
    pub replications: usize,
    pub h_hat: Stat,
    pub esjd: Stat,
    pub rho1: Stat,
    pub ct: Stat,
    pub theta2: Stat,
    pub theta3: Stat,
    /// Replications whose CT was undefined and left out of `ct`.
    pub ct_undefined: usize,
}

impl ReplicationReport {
    /// Like [`aggregate`] but accepts a single replication, leaving every `sd` empty.
    pub fn summarize(reps: &[ReplicationStats]) -> Self {
        let col = |f: &dyn Fn(&ReplicationStats) -> Option<f64>| {
            Stat::from_values(reps.iter().filter_map(f).collect())
        };
        let ct = col(&|r| r.ct);
        Self {
            replications: reps.len(),
            h_hat: col(&|r| Some(r.h_hat)),
            esjd: col(&|r| Some(r.esjd)),
            rho1: col(&|r| r.rho1),
            theta2: col(&|r| Some(r.theta2)),
            theta3: col(&|r| Some(r.theta3)),
            ct_undefined: reps.len() - ct.count,
            ct,
        }
    }
}

/// Mean and unbiased standard deviation of every statistic; needs `R ≥ 2`.
pub fn aggregate(reps: &[ReplicationStats]) -> Result<ReplicationReport> {
    if reps.len() < 2 {
        return Err(Error::validation(format!(
            "aggregation needs at least 2 replications, got {}",
            reps.len()
        )));
    }
    Ok(ReplicationReport::summarize(reps))
}
