//! The ipMALA transition kernel.
//!
//! From `x` the proposal is
//!
//! ```text
//! y = x − (σ²/2) x + σ^α C S x + σ C^{1/2} z,   z ~ N(0, I),   σ = ℓ n^{−γ}
//! ```
//!
//! and `y` is accepted with probability `1 ∧ e^Q`, where `Q` is the log
//! Metropolis–Hastings ratio. The production path evaluates `Q` directly from
//! the target and proposal densities; the expanded closed form is kept as an
//! independent cross-check.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::skew::SkewOperator;
use crate::target::Spectrum;

/// `(ℓ, γ, α, n)` and the derived step size `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalParams {
    ell: f64,
    gamma: f64,
    alpha: f64,
    n: usize,
    sigma: f64,
}

impl ProposalParams {
    pub fn new(ell: f64, gamma: f64, alpha: f64, n: usize) -> Result<Self> {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::validation(format!(
                "ell must be positive, got {ell}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::validation(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::validation(format!(
                "alpha must be >= 1, got {alpha}"
            )));
        }
        if n == 0 {
            return Err(Error::validation("dimension must be at least 1"));
        }
        Ok(Self {
            ell,
            gamma,
            alpha,
            n,
            sigma: ell * (n as f64).powf(-gamma),
        })
    }

    /// Overrides `σ`, breaking the `σ = ℓ n^{−γ}` link. Diagnostics only.
    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Outcome of one accept/reject decision.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub accepted: bool,
    /// `Q(x, y)`; the step was accepted iff `ln u ≤ Q`.
    pub q_value: f64,
    pub proposal: Vec<f64>,
}

/// One transition as seen by observers. On rejection `prev == next`.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'s> {
    pub step: usize,
    pub accepted: bool,
    pub q_value: f64,
    pub prev: &'s [f64],
    pub next: &'s [f64],
    pub proposal: &'s [f64],
}

/// Streaming consumer of chain transitions.
pub trait ChainObserver {
    fn observe(&mut self, t: &Transition<'_>) -> Result<()>;
}

/// Records every state, initial state included. Memory grows with the run.
#[derive(Debug, Default, Clone)]
pub struct TraceRecorder {
    pub states: Vec<Vec<f64>>,
    pub accepted: Vec<bool>,
}

impl ChainObserver for TraceRecorder {
    fn observe(&mut self, t: &Transition<'_>) -> Result<()> {
        if self.states.is_empty() {
            self.states.push(t.prev.to_vec());
        }
        self.states.push(t.next.to_vec());
        self.accepted.push(t.accepted);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Kernel<'a> {
    params: ProposalParams,
    spectrum: &'a Spectrum,
    skew: &'a dyn SkewOperator,
    contraction: f64,
    drift_scale: f64,
}

impl<'a> Kernel<'a> {
    pub fn new(
        params: ProposalParams,
        spectrum: &'a Spectrum,
        skew: &'a dyn SkewOperator,
    ) -> Result<Self> {
        let n = spectrum.n();
        if params.n() != n || skew.dim() != n {
            return Err(Error::validation(format!(
                "dimension mismatch: params {}, spectrum {n}, operator {}",
                params.n(),
                skew.dim()
            )));
        }
        let sigma = params.sigma();
        Ok(Self {
            params,
            spectrum,
            skew,
            contraction: 1.0 - 0.5 * sigma * sigma,
            drift_scale: sigma.powf(params.alpha()),
        })
    }

    pub fn params(&self) -> &ProposalParams {
        &self.params
    }

    pub fn spectrum(&self) -> &'a Spectrum {
        self.spectrum
    }

    pub fn skew(&self) -> &'a dyn SkewOperator {
        self.skew
    }

    /// Draws `y` from `x`; also returns the noise `z`.
    pub fn propose<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        let mut sx = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut z = vec![0.0; n];
        self.skew.apply_into(x, &mut sx);
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        self.proposal_from_noise(x, &sx, &z, &mut y);
        (y, z)
    }

    fn proposal_from_noise(&self, x: &[f64], sx: &[f64], z: &[f64], y: &mut [f64]) {
        let sigma = self.params.sigma();
        let cov = self.spectrum.cov();
        let lambda = self.spectrum.lambda();
        for i in 0..x.len() {
            y[i] = self.contraction * x[i]
                + self.drift_scale * cov[i] * sx[i]
                + sigma * lambda[i] * z[i];
        }
    }

    /// `‖to − m(from)‖²_C`, with `m(x) = (1 − σ²/2) x + σ^α C S x` and
    /// `s_from = S from`.
    fn residual_norm_sq(&self, from: &[f64], s_from: &[f64], to: &[f64]) -> f64 {
        let cov = self.spectrum.cov();
        let mut acc = 0.0;
        for i in 0..from.len() {
            let r = to[i] - self.contraction * from[i] - self.drift_scale * cov[i] * s_from[i];
            acc += r * r / cov[i];
        }
        acc
    }

    fn q_from_parts(&self, x: &[f64], sx: &[f64], y: &[f64], sy: &[f64]) -> f64 {
        let sigma = self.params.sigma();
        let inv_two_var = 0.5 / (sigma * sigma);
        let target = self.spectrum.log_density(y) - self.spectrum.log_density(x);
        let backward = -inv_two_var * self.residual_norm_sq(y, sy, x);
        let forward = -inv_two_var * self.residual_norm_sq(x, sx, y);
        target + backward - forward
    }

    /// `Q(x, y) = log π(y) − log π(x) + log q(y, x) − log q(x, y)`.
    pub fn log_accept_ratio(&self, x: &[f64], y: &[f64]) -> f64 {
        let sx = crate::skew::apply(self.skew, x);
        let sy = crate::skew::apply(self.skew, y);
        self.q_from_parts(x, &sx, y, &sy)
    }

    /// The expanded form
    ///
    /// ```text
    /// Q = −σ²/8 (‖y‖²_C − ‖x‖²_C) + ½ σ^{2α−2} (‖CSx‖²_C − ‖CSy‖²_C) + 2 σ^{α−2} ⟨Sy, x⟩
    /// ```
    ///
    /// Test oracle for [`Kernel::log_accept_ratio`].
    pub fn log_accept_ratio_closed_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let sigma = self.params.sigma();
        let alpha = self.params.alpha();
        let spec = self.spectrum;
        let tx = crate::skew::apply_tilde(self.skew, spec, x);
        let ty = crate::skew::apply_tilde(self.skew, spec, y);
        let sy = crate::skew::apply(self.skew, y);
        let cross: f64 = sy.iter().zip(x).map(|(a, b)| a * b).sum();

        -sigma * sigma / 8.0 * (spec.weighted_norm_sq(y) - spec.weighted_norm_sq(x))
            + 0.5
                * sigma.powf(2.0 * alpha - 2.0)
                * (spec.weighted_norm_sq(&tx) - spec.weighted_norm_sq(&ty))
            + 2.0 * sigma.powf(alpha - 2.0) * cross
    }

    /// Normalized log proposal density `log q(x, y)` of moving from `x` to `y`.
    pub fn log_proposal_density(&self, x: &[f64], y: &[f64]) -> f64 {
        let sigma = self.params.sigma();
        let n = x.len() as f64;
        let sx = crate::skew::apply(self.skew, x);
        let log_det: f64 = self.spectrum.cov().iter().map(|c| c.ln()).sum();
        -0.5 * n * (2.0 * PI * sigma * sigma).ln()
            - 0.5 * log_det
            - 0.5 / (sigma * sigma) * self.residual_norm_sq(x, &sx, y)
    }

    /// Metropolis–Hastings decision for a given proposal `y`.
    pub fn decide<R: Rng + ?Sized>(&self, x: &[f64], y: Vec<f64>, rng: &mut R) -> StepRecord {
        let q = self.log_accept_ratio(x, &y);
        let u: f64 = rng.random();
        StepRecord {
            accepted: u.ln() <= q,
            q_value: q,
            proposal: y,
        }
    }

    /// One full step from `x`; returns the next state and the record.
    pub fn mh_step<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> (Vec<f64>, StepRecord) {
        let (y, _z) = self.propose(x, rng);
        let rec = self.decide(x, y, rng);
        let next = if rec.accepted {
            rec.proposal.clone()
        } else {
            x.to_vec()
        };
        (next, rec)
    }
}

/// A chain with preallocated buffers; the hot loop does not allocate.
#[derive(Debug)]
pub struct Chain<'k, 'a> {
    kernel: &'k Kernel<'a>,
    state: Vec<f64>,
    proposal: Vec<f64>,
    s_state: Vec<f64>,
    s_proposal: Vec<f64>,
    noise: Vec<f64>,
    steps: usize,
    accepts: usize,
}

impl<'k, 'a> Chain<'k, 'a> {
    pub fn new(kernel: &'k Kernel<'a>, x0: Vec<f64>) -> Result<Self> {
        kernel.spectrum.check_len("initial state", x0.len())?;
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("initial state has non-finite entries"));
        }
        let n = x0.len();
        let mut s_state = vec![0.0; n];
        kernel.skew.apply_into(&x0, &mut s_state);
        Ok(Self {
            kernel,
            state: x0,
            proposal: vec![0.0; n],
            s_state,
            s_proposal: vec![0.0; n],
            noise: vec![0.0; n],
            steps: 0,
            accepts: 0,
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn into_state(self) -> Vec<f64> {
        self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn accepts(&self) -> usize {
        self.accepts
    }

    /// Advances one step and hands the transition to `visit`.
    pub fn step_with<R, F>(&mut self, rng: &mut R, visit: F) -> Result<()>
    where
        R: Rng + ?Sized,
        F: FnOnce(&Transition<'_>) -> Result<()>,
    {
        let k = self.kernel;
        for zi in self.noise.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        k.proposal_from_noise(&self.state, &self.s_state, &self.noise, &mut self.proposal);
        k.skew.apply_into(&self.proposal, &mut self.s_proposal);
        let q = k.q_from_parts(&self.state, &self.s_state, &self.proposal, &self.s_proposal);
        let u: f64 = rng.random();
        let accepted = u.ln() <= q;
        let step = self.steps;
        self.steps += 1;

        if accepted {
            self.accepts += 1;
            std::mem::swap(&mut self.state, &mut self.proposal);
            std::mem::swap(&mut self.s_state, &mut self.s_proposal);
            // `proposal` now holds the previous state.
            visit(&Transition {
                step,
                accepted,
                q_value: q,
                prev: &self.proposal,
                next: &self.state,
                proposal: &self.state,
            })
        } else {
            visit(&Transition {
                step,
                accepted,
                q_value: q,
                prev: &self.state,
                next: &self.state,
                proposal: &self.proposal,
            })
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let before = self.accepts;
        // The visitor never fails.
        let _ = self.step_with(rng, |_| Ok(()));
        self.accepts > before
    }
}

/// Runs `steps` transitions from `x0`, feeding each to every observer.
pub fn run_chain<R: Rng + ?Sized>(
    kernel: &Kernel<'_>,
    steps: usize,
    x0: Vec<f64>,
    rng: &mut R,
    observers: &mut [&mut dyn ChainObserver],
) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::validation("a chain needs at least one step"));
    }
    let mut chain = Chain::new(kernel, x0)?;
    for _ in 0..steps {
        chain.step_with(rng, |t| {
            for obs in observers.iter_mut() {
                obs.observe(t)?;
            }
            Ok(())
        })?;
    }
    Ok(chain.into_state())
}
