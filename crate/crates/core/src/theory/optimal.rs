//! Step-size tuning: maximise the limiting speed `ℓ² h(ℓ)`.

use log::warn;

use super::{ab_constants, limiting_accept, GammaRegime};
use crate::error::{Error, Result};
use crate::skew::{c_constants_analytic, CConstants, SkewKind};

/// Upper end of the search bracket `(0, ELL_MAX]`.
pub const ELL_MAX: f64 = 10.0;

const SCAN_POINTS: usize = 129;
const ELL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub ell: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryRow {
    pub alpha: f64,
    pub ell_star: f64,
    pub h_star: f64,
}

fn speed(c: &CConstants, alpha: f64, ell: f64) -> Result<f64> {
    let (a, b) = ab_constants(c, alpha, ell)?;
    Ok(ell * ell * limiting_accept(a, b, ell, GammaRegime::EqualOneSixth)?)
}

/// Maximises `ℓ² h` at `γ = 1/6` for the given constants.
///
/// A 129-point scan over `(0, 10]` brackets the maximum, then golden-section
/// refines it to `1e-6` in `ℓ`. If the scan shows several local maxima the
/// scan argmax is returned and a warning logged.
pub fn maximize_speed(c: &CConstants, alpha: f64) -> Result<Optimum> {
    let grid: Vec<f64> = (1..=SCAN_POINTS)
        .map(|i| ELL_MAX * i as f64 / SCAN_POINTS as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&l| speed(c, alpha, l))
        .collect::<Result<Vec<_>>>()?;

    let best = values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let peaks = (1..values.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .count();
    if peaks > 1 {
        warn!("ell^2 h has {peaks} local maxima on the scan grid; returning the grid argmax");
        let ell = grid[best];
        return Ok(Optimum {
            ell,
            h: values[best] / (ell * ell),
        });
    }

    let mut lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let mut hi = grid[(best + 1).min(grid.len() - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |l: f64| {
        if l <= 0.0 {
            Ok(0.0)
        } else {
            speed(c, alpha, l)
        }
    };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > ELL_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1)?;
        }
    }
    let ell = 0.5 * (lo + hi);
    let (a, b) = ab_constants(c, alpha, ell)?;
    Ok(Optimum {
        ell,
        h: limiting_accept(a, b, ell, GammaRegime::EqualOneSixth)?,
    })
}

/// Optimal `ℓ` and the acceptance there, using the family's analytic constants.
///
/// Only the diffusive regime (`α ≥ 2`, `γ = 1/6`) has a speed to maximise.
pub fn optimal_ell(kind: SkewKind, alpha: f64, gamma: f64) -> Result<Optimum> {
    let regime = GammaRegime::from_gamma(gamma)?;
    if regime != GammaRegime::EqualOneSixth || alpha.is_nan() || alpha < 2.0 {
        return Err(Error::Regime(format!(
            "optimal ell needs the diffusive regime (alpha >= 2, gamma = 1/6), got alpha = {alpha}, gamma = {gamma}"
        )));
    }
    let c = c_constants_analytic(kind, alpha, regime.canonical_gamma(gamma))?;
    maximize_speed(&c, alpha)
}

/// One row per `α` for the weighted Jordan family.
pub fn theory_table(alphas: &[f64], gamma: f64) -> Result<Vec<TheoryRow>> {
    alphas
        .iter()
        .map(|&alpha| {
            let opt = optimal_ell(SkewKind::JordanWeighted, alpha, gamma)?;
            Ok(TheoryRow {
                alpha,
                ell_star: opt.ell,
                h_star: opt.h,
            })
        })
        .collect()
}
