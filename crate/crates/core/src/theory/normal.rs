//! Standard normal distribution helpers and Gaussian expectations of `1 ∧ e^G`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// `Φ(x)`, accurate in both tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x > -30.0 {
        return norm_cdf(x).ln();
    }
    // Mills-ratio series: Φ(x) ≈ φ(x)/(−x) · (1 − 1/x² + 3/x⁴ − 15/x⁶).
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    -0.5 * x2 - 0.5 * (2.0 * PI).ln() - (-x).ln() + series.ln()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::validation(format!(
            "standard deviation must be positive, got {delta}"
        )));
    }
    Ok(())
}

/// `E(e^G 1_{G<0}) = e^{μ+δ²/2} Φ(−μ/δ − δ)` for `G ~ N(μ, δ²)`.
///
/// Computed in log space so that `e^{large} · Φ(very negative)` stays finite.
pub fn gaussian_neg_part(mu: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !mu.is_finite() {
        return Err(Error::validation(format!("mean must be finite, got {mu}")));
    }
    Ok((mu + 0.5 * delta * delta + log_norm_cdf(-mu / delta - delta)).exp())
}

/// `E(1 ∧ e^G) = e^{μ+δ²/2} Φ(−μ/δ − δ) + Φ(μ/δ)` for `G ~ N(μ, δ²)`.
pub fn gaussian_min_expect(mu: f64, delta: f64) -> Result<f64> {
    let neg = gaussian_neg_part(mu, delta)?;
    Ok((neg + norm_cdf(mu / delta)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert_relative_eq!(norm_cdf(-1.0), 0.158_655_253_931_457, max_relative = 1e-13);
        assert_relative_eq!(norm_cdf(1.96), 0.975_002_104_851_780, max_relative = 1e-13);
        assert_relative_eq!(
            norm_cdf(-8.0),
            6.220_960_574_271_785e-16,
            max_relative = 1e-10
        );
    }

    #[test]
    fn log_cdf_is_continuous_at_switch() {
        let inner = norm_cdf(-29.999_999).ln();
        let outer = log_norm_cdf(-30.000_001);
        assert!((inner - outer).abs() < 1e-4, "{inner} vs {outer}");
        assert!(log_norm_cdf(-1e4).is_finite());
        assert_eq!(log_norm_cdf(40.0), 0.0);
    }

    #[test]
    fn lemma_examples() {
        assert_relative_eq!(
            gaussian_min_expect(-0.5, 1.0).unwrap(),
            2.0 * norm_cdf(-0.5),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            gaussian_min_expect(-0.5, 1.0).unwrap(),
            0.617_075,
            max_relative = 1e-6
        );
        assert!((gaussian_min_expect(50.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_relative_eq!(
            gaussian_min_expect(-10.0, 0.01).unwrap(),
            (-10.0f64).exp(),
            max_relative = 1e-3
        );
        assert_relative_eq!(
            gaussian_neg_part(-0.5, 1.0).unwrap(),
            0.308_538,
            max_relative = 1e-5
        );
        assert_relative_eq!(
            gaussian_neg_part(0.0, 1.0).unwrap(),
            0.261_57,
            max_relative = 1e-4
        );
    }

    #[test]
    fn tails() {
        assert!(gaussian_min_expect(-200.0, 1.0).unwrap() < 1e-80);
        assert!(gaussian_min_expect(-200.0, 1.0).unwrap() > 0.0);
        assert!(gaussian_min_expect(0.0, 1e-3).unwrap() <= 1.0);
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(gaussian_min_expect(0.0, 0.0).is_err());
        assert!(gaussian_neg_part(0.0, -1.0).is_err());
        assert!(gaussian_neg_part(f64::NAN, 1.0).is_err());
    }
}
