//! The drift-moment constants `c₁, c₂, c₃`: closed forms for the implemented
//! families, plus a Monte Carlo probe of the normalized moments at finite `n`.

use rand::Rng;

use super::{SkewKind, SkewOperator};
use crate::error::{Error, Result};
use crate::target::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CConstants {
    pub const ZERO: CConstants = CConstants {
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
    };
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CEstimate {
    pub c1: Estimate,
    pub c2: Estimate,
    pub c3: Estimate,
    pub n: usize,
    pub samples: usize,
}

/// Limits of the normalized moments for the built-in families.
///
/// The weighted Jordan family gives `c₁ = 1/((α−1)γ)` and `c₂ = c₃ = 0`; the
/// unit-weight families and the zero matrix give all zeros.
pub fn c_constants_analytic(kind: SkewKind, alpha: f64, gamma: f64) -> Result<CConstants> {
    match kind {
        SkewKind::JordanWeighted => {
            if !(alpha.is_finite() && alpha > 1.0) {
                return Err(Error::validation(format!(
                    "s1 constants need alpha > 1, got {alpha}"
                )));
            }
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(Error::validation(format!(
                    "s1 constants need gamma > 0, got {gamma}"
                )));
            }
            Ok(CConstants {
                c1: 1.0 / ((alpha - 1.0) * gamma),
                c2: 0.0,
                c3: 0.0,
            })
        }
        SkewKind::FullBidiagonal | SkewKind::JordanUnit | SkewKind::Zero => Ok(CConstants::ZERO),
    }
}

/// Exact `E_π ‖S̃x‖²_C = Σ_i λ_i² Σ_j S_ij² λ_j²` at the operator's dimension.
pub fn expected_tilde_norm_sq(op: &dyn SkewOperator, spectrum: &Spectrum) -> f64 {
    let cov = spectrum.cov();
    let mut total = 0.0;
    op.for_each_upper(&mut |i, j, v| {
        total += 2.0 * cov[i] * v * v * cov[j];
    });
    total
}

#[derive(Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn estimate(&self, count: usize) -> Estimate {
        let m = count as f64;
        let mean = self.sum / m;
        let var = ((self.sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
        Estimate {
            mean,
            se: (var / m).sqrt(),
        }
    }
}

/// Monte Carlo estimates over `x ~ π` of
/// `‖S̃x‖²_C / n^{2(α−1)γ}`, `‖S̃²x‖²_C / n^{2(2α−1)γ}` and
/// `‖S̃³x‖²_C / n^{2(3α−1)γ}`.
pub fn estimate_c_constants<R: Rng + ?Sized>(
    op: &dyn SkewOperator,
    spectrum: &Spectrum,
    alpha: f64,
    gamma: f64,
    samples: usize,
    rng: &mut R,
) -> Result<CEstimate> {
    if samples < 100 {
        return Err(Error::validation(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    let n = spectrum.n();
    if op.dim() != n {
        return Err(Error::validation(format!(
            "operator dimension {} does not match spectrum dimension {n}",
            op.dim()
        )));
    }
    if op.is_zero() {
        let zero = Estimate { mean: 0.0, se: 0.0 };
        return Ok(CEstimate {
            c1: zero,
            c2: zero,
            c3: zero,
            n,
            samples,
        });
    }

    let nf = n as f64;
    let scale1 = nf.powf(2.0 * (alpha - 1.0) * gamma);
    let scale2 = nf.powf(2.0 * (2.0 * alpha - 1.0) * gamma);
    let scale3 = nf.powf(2.0 * (3.0 * alpha - 1.0) * gamma);
    let cov = spectrum.cov();

    let mut t1 = vec![0.0; n];
    let mut t2 = vec![0.0; n];
    let mut t3 = vec![0.0; n];
    let tilde = |src: &[f64], dst: &mut [f64]| {
        op.apply_into(src, dst);
        for (d, c) in dst.iter_mut().zip(cov) {
            *d *= c;
        }
    };

    let (mut m1, mut m2, mut m3) = (Moments::default(), Moments::default(), Moments::default());
    for _ in 0..samples {
        let x = spectrum.sample_stationary(rng);
        tilde(&x, &mut t1);
        tilde(&t1, &mut t2);
        tilde(&t2, &mut t3);
        m1.push(spectrum.weighted_norm_sq(&t1) / scale1);
        m2.push(spectrum.weighted_norm_sq(&t2) / scale2);
        m3.push(spectrum.weighted_norm_sq(&t3) / scale3);
    }

    Ok(CEstimate {
        c1: m1.estimate(samples),
        c2: m2.estimate(samples),
        c3: m3.estimate(samples),
        n,
        samples,
    })
}
