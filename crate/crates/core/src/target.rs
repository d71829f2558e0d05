//! Diagonal Gaussian target `N(0, C)` with `C = diag(λ_1², …, λ_N²)`.
//!
//! All vectors live in the eigenbasis of `C`, so every operator here is
//! coordinate-wise.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Eigenvalue sequence of the target covariance.
///
/// `lambda[i]` is the standard deviation of coordinate `i`; the covariance
/// entry is its square.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    lambda: Vec<f64>,
    cov: Vec<f64>,
    decay_k: f64,
}

impl Spectrum {
    /// Power-law spectrum `λ_i = i^{-k}`, `i = 1..=n`.
    ///
    /// `k > 1/2` keeps `Σ λ_i²` bounded as `n` grows.
    pub fn power_law(n: usize, k: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("spectrum dimension must be at least 1"));
        }
        if !(k.is_finite() && k > 0.5) {
            return Err(Error::validation(format!(
                "spectral decay exponent must exceed 1/2, got {k}"
            )));
        }
        let lambda: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-k)).collect();
        let cov = lambda.iter().map(|l| l * l).collect();
        Ok(Self {
            lambda,
            cov,
            decay_k: k,
        })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn decay_k(&self) -> f64 {
        self.decay_k
    }

    /// Standard deviations `λ_i`.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Covariance diagonal `λ_i²`.
    pub fn cov(&self) -> &[f64] {
        &self.cov
    }

    /// `Σ λ_i²`, the stationary mean of `‖x‖²`.
    pub fn trace(&self) -> f64 {
        self.cov.iter().sum()
    }

    /// Exact draw from the target: `x_i = λ_i ρ_i` with `ρ_i` iid standard normal.
    pub fn sample_stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lambda
            .iter()
            .map(|l| l * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// `‖x‖²_C = Σ x_i² / λ_i²`.
    pub fn weighted_norm_sq(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n());
        x.iter().zip(&self.cov).map(|(xi, c)| xi * xi / c).sum()
    }

    /// `⟨u, v⟩_C = Σ u_i v_i / λ_i²`.
    pub fn weighted_dot(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.n());
        debug_assert_eq!(v.len(), self.n());
        u.iter()
            .zip(v)
            .zip(&self.cov)
            .map(|((a, b), c)| a * b / c)
            .sum()
    }

    /// Log-density up to its additive normalizing constant: `-½ ‖x‖²_C`.
    ///
    /// Only differences of log-densities enter the accept/reject step, so the
    /// constant is dropped.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * self.weighted_norm_sq(x)
    }

    /// Multiply by `C`.
    pub fn apply_cov(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n());
        v.iter().zip(&self.cov).map(|(a, c)| a * c).collect()
    }

    /// Multiply by `C^{1/2}`.
    pub fn apply_cov_sqrt(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n());
        v.iter().zip(&self.lambda).map(|(a, l)| a * l).collect()
    }

    pub(crate) fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::validation(format!(
                "{what} has length {len}, expected dimension {}",
                self.n()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn power_law_values() {
        let s = Spectrum::power_law(4, 2.0).unwrap();
        assert_eq!(s.lambda(), &[1.0, 0.25, 1.0 / 9.0, 0.0625]);
        assert_eq!(Spectrum::power_law(1, 1.0).unwrap().lambda(), &[1.0]);
    }

    #[test]
    fn trace_matches_partial_zeta_sum() {
        let s = Spectrum::power_law(10, 2.0).unwrap();
        let expected: f64 = (1..=10).map(|i| (i as f64).powi(-4)).sum();
        assert_relative_eq!(s.trace(), expected, max_relative = 1e-15);
        assert!((s.trace() - 1.0820366).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Spectrum::power_law(0, 2.0).is_err());
        assert!(Spectrum::power_law(5, 0.5).is_err());
        assert!(Spectrum::power_law(5, 0.2).is_err());
        assert!(Spectrum::power_law(5, f64::NAN).is_err());
    }

    #[test]
    fn spectrum_invariants() {
        let s = Spectrum::power_law(50, 0.75).unwrap();
        assert!(s.lambda().iter().all(|&l| l > 0.0));
        assert!(s.lambda().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn weighted_norm_examples() {
        let s = Spectrum::power_law(10, 2.0).unwrap();
        let x = s.lambda().to_vec();
        assert_relative_eq!(s.weighted_norm_sq(&x), 10.0, max_relative = 1e-14);
        assert_eq!(s.weighted_norm_sq(&[0.0; 10]), 0.0);
        assert_relative_eq!(s.log_density(&x), -5.0, max_relative = 1e-14);
        assert_eq!(s.log_density(&[0.0; 10]), 0.0);

        let s2 = Spectrum::power_law(2, 2.0).unwrap();
        assert_relative_eq!(s2.weighted_norm_sq(&[1.0, 1.0]), 17.0, max_relative = 1e-15);
    }

    #[test]
    fn cov_operators() {
        let s = Spectrum::power_law(2, 2.0).unwrap();
        assert_eq!(s.apply_cov_sqrt(&[1.0, 1.0]), vec![1.0, 0.25]);
        assert_eq!(s.apply_cov(&[1.0, 0.0]), vec![1.0, 0.0]);

        let s = Spectrum::power_law(7, 1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..7).map(|_| rng.random::<f64>() - 0.5).collect();
        let twice = s.apply_cov_sqrt(&s.apply_cov_sqrt(&v));
        for (a, b) in twice.iter().zip(s.apply_cov(&v)) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn log_density_difference_is_norm_difference() {
        let s = Spectrum::power_law(6, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = s.sample_stationary(&mut rng);
            let y = s.sample_stationary(&mut rng);
            let lhs = s.log_density(&x) - s.log_density(&y);
            let rhs = -0.5 * (s.weighted_norm_sq(&x) - s.weighted_norm_sq(&y));
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn log_density_decreases_along_rays() {
        let s = Spectrum::power_law(5, 1.0).unwrap();
        let dir = [0.3, -1.0, 0.2, 0.05, 0.7];
        let mut prev = s.log_density(&[0.0; 5]);
        for step in 1..20 {
            let t = step as f64 * 0.25;
            let x: Vec<f64> = dir.iter().map(|d| d * t).collect();
            let cur = s.log_density(&x);
            assert!(cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn stationary_draw_is_deterministic() {
        let s = Spectrum::power_law(10, 2.0).unwrap();
        let a = s.sample_stationary(&mut ChaCha8Rng::seed_from_u64(99));
        let b = s.sample_stationary(&mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);
    }

    #[test]
    fn stationary_moments() {
        let s = Spectrum::power_law(10, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let m = 100_000;
        let mut norm_sum = 0.0;
        let mut norm_sq_sum = 0.0;
        let mut coord_sum = [0.0; 10];
        let mut coord_sq = [0.0; 10];
        for _ in 0..m {
            let x = s.sample_stationary(&mut rng);
            let nsq: f64 = x.iter().map(|v| v * v).sum();
            norm_sum += nsq;
            norm_sq_sum += nsq * nsq;
            for (i, v) in x.iter().enumerate() {
                coord_sum[i] += v;
                coord_sq[i] += v * v;
            }
        }
        let mf = m as f64;
        let mean = norm_sum / mf;
        let se = ((norm_sq_sum / mf - mean * mean) / mf).sqrt();
        assert!((mean - 1.0820366).abs() < 3.0 * se, "mean {mean} se {se}");

        for i in 0..10 {
            let var_i = s.cov()[i];
            let mean_i = coord_sum[i] / mf;
            assert!(mean_i.abs() < 3.0 * (var_i / mf).sqrt());
            // Var of the sample second moment of N(0, v) is 2v²/m.
            let second = coord_sq[i] / mf;
            assert!((second - var_i).abs() < 4.0 * (2.0 * var_i * var_i / mf).sqrt());
        }
    }
}
