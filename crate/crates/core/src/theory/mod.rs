//! Limiting quantities of the rescaled chain: acceptance probability `h`,
//! the drift constants `ν` and `τ`, and the optimal step-size search.

mod normal;
mod optimal;

pub use normal::{gaussian_min_expect, gaussian_neg_part, log_norm_cdf, norm_cdf};
pub use optimal::{maximize_speed, optimal_ell, theory_table, Optimum, TheoryRow, ELL_MAX};

use crate::error::{Error, Result};
use crate::skew::CConstants;

/// Tolerance used to recognise `γ = 1/6` from a rounded input such as `0.1667`.
pub const ONE_SIXTH_TOL: f64 = 1e-3;

/// Which branch of the limiting acceptance probability applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaRegime {
    EqualOneSixth,
    Greater,
}

impl GammaRegime {
    /// Classifies `γ`; values below `1/6` have no non-degenerate limit.
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::validation(format!(
                "gamma must be finite, got {gamma}"
            )));
        }
        if (gamma - 1.0 / 6.0).abs() <= ONE_SIXTH_TOL {
            Ok(GammaRegime::EqualOneSixth)
        } else if gamma > 1.0 / 6.0 {
            Ok(GammaRegime::Greater)
        } else {
            Err(Error::Regime(format!(
                "gamma = {gamma} < 1/6: the acceptance probability degenerates to zero"
            )))
        }
    }

    /// `γ` with the `1/6` case snapped to its exact value.
    pub fn canonical_gamma(self, gamma: f64) -> f64 {
        match self {
            GammaRegime::EqualOneSixth => 1.0 / 6.0,
            GammaRegime::Greater => gamma,
        }
    }
}

/// Diffusive (`α ≥ 2`) or fluid (`α < 2`) scaling; fixes the time clock `N^{ζγ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRegime {
    pub gamma: f64,
    pub alpha: f64,
    pub zeta: f64,
}

impl LimitRegime {
    pub fn new(alpha: f64, gamma: f64) -> Self {
        Self {
            gamma,
            alpha,
            zeta: zeta(alpha),
        }
    }

    /// Standard MALA is always on the diffusive clock.
    pub fn mala(gamma: f64) -> Self {
        Self {
            gamma,
            alpha: 2.0,
            zeta: 2.0,
        }
    }

    pub fn is_diffusive(&self) -> bool {
        self.zeta == 2.0
    }

    /// Chain steps per unit of limiting time, `N^{ζγ}`.
    pub fn clock(&self, n: usize) -> f64 {
        (n as f64).powf(self.zeta * self.gamma)
    }
}

/// `ζ = 2` for `α ≥ 2`, `ζ = α` otherwise.
pub fn zeta(alpha: f64) -> f64 {
    if alpha >= 2.0 {
        2.0
    } else {
        alpha
    }
}

/// Mean and variance coefficients `(a, b)` of the limiting log-ratio.
///
/// `a = 2ℓ^{2(α−1)}c₁ + ½ℓ^{2(2α−1)}c₂`,
/// `b = 4ℓ^{2(α−1)}c₁ + 5ℓ^{2(2α−1)}c₂ + ℓ^{2(3α−1)}c₃`.
pub fn ab_constants(c: &CConstants, alpha: f64, ell: f64) -> Result<(f64, f64)> {
    if !(ell.is_finite() && ell > 0.0) {
        return Err(Error::validation(format!(
            "ell must be positive, got {ell}"
        )));
    }
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::validation(format!(
            "alpha must be >= 1, got {alpha}"
        )));
    }
    let p1 = ell.powf(2.0 * (alpha - 1.0));
    let p2 = ell.powf(2.0 * (2.0 * alpha - 1.0));
    let p3 = ell.powf(2.0 * (3.0 * alpha - 1.0));
    // Kept in this association so that c₂ = c₃ = 0 gives b == 2a bitwise.
    let a = 2.0 * p1 * c.c1 + 0.5 * p2 * c.c2;
    let b = 4.0 * p1 * c.c1 + 5.0 * p2 * c.c2 + p3 * c.c3;
    Ok((a, b))
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::validation(format!(
            "a, b must be finite, got ({a}, {b})"
        )));
    }
    if b < 0.0 {
        return Err(Error::validation(format!("b must be nonnegative, got {b}")));
    }
    Ok(())
}

/// Mean and variance of the limiting log-ratio, or `None` when it is the
/// constant `−a` (`γ > 1/6` with `b = 0`).
fn limit_law(a: f64, b: f64, ell: f64, regime: GammaRegime) -> Option<(f64, f64)> {
    match regime {
        GammaRegime::EqualOneSixth => {
            let l6 = ell.powi(6);
            Some((-l6 / 32.0 - a, l6 / 16.0 + b))
        }
        GammaRegime::Greater if b == 0.0 => None,
        GammaRegime::Greater => Some((-a, b)),
    }
}

/// `h_S^J = 2Φ((−ℓ⁶/32 − a)/√(ℓ⁶/16 + 2a))`, the `b = 2a` acceptance limit at `γ = 1/6`.
#[allow(non_snake_case)]
pub fn hJ(ell: f64, a: f64) -> Result<f64> {
    if !(ell.is_finite() && ell > 0.0) {
        return Err(Error::validation(format!(
            "ell must be positive, got {ell}"
        )));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::validation(format!("a must be nonnegative, got {a}")));
    }
    let l6 = ell.powi(6);
    Ok(2.0 * norm_cdf((-l6 / 32.0 - a) / (l6 / 16.0 + 2.0 * a).sqrt()))
}

/// Limiting average acceptance probability `h_S`.
pub fn limiting_accept(a: f64, b: f64, ell: f64, regime: GammaRegime) -> Result<f64> {
    Ok(tau_nu_h(a, b, ell, regime)?.2)
}

/// `(ν, τ)` with `τ = h − 2ν`; `b = 2a` gives `τ = 0` exactly.
pub fn tau_nu(a: f64, b: f64, ell: f64, regime: GammaRegime) -> Result<(f64, f64)> {
    let (nu, tau, _) = tau_nu_h(a, b, ell, regime)?;
    Ok((nu, tau))
}

fn tau_nu_h(a: f64, b: f64, ell: f64, regime: GammaRegime) -> Result<(f64, f64, f64)> {
    check_ab(a, b)?;
    if !(ell.is_finite() && ell > 0.0) {
        return Err(Error::validation(format!(
            "ell must be positive, got {ell}"
        )));
    }
    let Some((mu, var)) = limit_law(a, b, ell, regime) else {
        let h = (-a).exp().min(1.0);
        return Ok((0.5 * h, 0.0, h));
    };
    if b == 2.0 * a {
        // With b = 2a the two terms of h coincide, so ν = h/2 and τ vanishes.
        let h = match regime {
            GammaRegime::EqualOneSixth => hJ(ell, a)?,
            GammaRegime::Greater => gaussian_min_expect(mu, var.sqrt())?,
        };
        return Ok((0.5 * h, 0.0, h));
    }
    let delta = var.sqrt();
    let nu = gaussian_neg_part(mu, delta)?;
    let h = gaussian_min_expect(mu, delta)?;
    let tau = (h - 2.0 * nu).clamp(-h, h);
    Ok((nu, tau, h))
}
