use ipmala_core::estimators::{aggregate, ReplicationStats};
use ipmala_core::harness::{read_rows, write_rows, ResultRow};
use ipmala_core::skew::{self, SkewParams, SkewRegistry};
use ipmala_core::theory::{
    gaussian_min_expect, gaussian_neg_part, hJ, limiting_accept, norm_cdf, GammaRegime,
};
use ipmala_core::{Kernel, ProposalParams, Spectrum};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("s1"), Just("s2"), Just("s3"), Just("zero")]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn log_ratio_matches_closed_form_and_is_antisymmetric(
        kind in kind_name(),
        pairs in 1usize..=8,
        ell in 0.1f64..3.0,
        half_gamma in prop::bool::ANY,
        alpha in 1.0f64..30.0,
        seed in any::<u64>(),
    ) {
        let n = 2 * pairs;
        let gamma = if half_gamma { 0.5 } else { 1.0 / 6.0 };
        // The weighted Jordan family needs alpha > 1.
        let alpha = if kind == "s1" { alpha.max(1.01) } else { alpha };
        let spectrum = Spectrum::power_law(n, 2.0).unwrap();
        let op = SkewRegistry::with_builtin()
            .build(kind, &SkewParams { n, k: 2.0, alpha, gamma })
            .unwrap();
        let kernel = Kernel::new(ProposalParams::new(ell, gamma, alpha, n).unwrap(), &spectrum, op.as_ref()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = spectrum.sample_stationary(&mut rng);
        let (y, _) = kernel.propose(&x, &mut rng);

        let q = kernel.log_accept_ratio(&x, &y);
        let closed = kernel.log_accept_ratio_closed_form(&x, &y);
        prop_assert!(close(q, closed, 1e-8), "first principles {q} vs closed form {closed}");
        let back = kernel.log_accept_ratio(&y, &x);
        prop_assert!(close(q, -back, 1e-9), "{q} vs {back}");
        prop_assert_eq!(kernel.log_accept_ratio(&x, &x), 0.0);
    }

    #[test]
    fn skew_operators_are_antisymmetric(kind in kind_name(), pairs in 1usize..=30, seed in any::<u64>()) {
        let n = 2 * pairs;
        let spectrum = Spectrum::power_law(n, 2.0).unwrap();
        let op = SkewRegistry::with_builtin()
            .build(kind, &SkewParams { n, k: 2.0, alpha: 3.0, gamma: 1.0 / 6.0 })
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = spectrum.sample_stationary(&mut rng);
        let v = spectrum.sample_stationary(&mut rng);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let su = skew::apply(op.as_ref(), &u);
        let sv = skew::apply(op.as_ref(), &v);
        let scale = 1.0 + dot(&u, &u).sqrt() * dot(&sv, &sv).sqrt();
        prop_assert!((dot(&u, &sv) + dot(&v, &su)).abs() <= 1e-12 * scale);
        prop_assert!(dot(&u, &su).abs() <= 1e-12 * (1.0 + dot(&su, &su).sqrt() * dot(&u, &u).sqrt()));
    }

    #[test]
    fn cov_sqrt_is_an_isometry_into_weighted_norm(n in 1usize..50, seed in any::<u64>()) {
        let spectrum = Spectrum::power_law(n, 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..n).map(|_| rand::Rng::random::<f64>(&mut rng) * 4.0 - 2.0).collect();
        let euclid: f64 = z.iter().map(|v| v * v).sum();
        let weighted = spectrum.weighted_norm_sq(&spectrum.apply_cov_sqrt(&z));
        prop_assert!((weighted - euclid).abs() <= 1e-12 * euclid.max(1e-300));
    }

    #[test]
    fn gaussian_min_expect_is_a_probability(mu in -50.0f64..50.0, delta in 0.01f64..20.0) {
        let h = gaussian_min_expect(mu, delta).unwrap();
        prop_assert!(h > 0.0 && h <= 1.0, "{h}");
        let split = gaussian_neg_part(mu, delta).unwrap() + norm_cdf(mu / delta);
        prop_assert!((h - split.min(1.0)).abs() <= 1e-14);
        prop_assert!(gaussian_min_expect(mu + 1.0, delta).unwrap() >= h - 1e-15);
    }

    #[test]
    fn jordan_limit_identity_and_monotonicity(ell in 0.05f64..4.0, a in 0.0f64..20.0) {
        let h = hJ(ell, a).unwrap();
        let general = limiting_accept(a, 2.0 * a, ell, GammaRegime::EqualOneSixth).unwrap();
        prop_assert!((h - general).abs() <= 1e-12);
        prop_assert!(hJ(ell * 1.01, a).unwrap() < h || h == 0.0);
    }

    #[test]
    fn aggregate_ignores_replication_order(
        hs in prop::collection::vec(0.0f64..1.0, 2..40),
        rotate in 0usize..40,
    ) {
        let reps: Vec<ReplicationStats> = hs
            .iter()
            .map(|&h| ReplicationStats { h_hat: h, esjd: h * h, rho1: Some(h), ct: (h > 0.1).then_some(1.0 / h), theta2: 1.0 + h, theta3: h - 0.5 })
            .collect();
        let mut shuffled = reps.clone();
        let k = rotate % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        prop_assert_eq!(aggregate(&reps).unwrap(), aggregate(&shuffled).unwrap());
    }

    #[test]
    fn csv_round_trips_exactly(
        ell in 0.01f64..10.0,
        h in prop::option::of(0.0f64..1.0),
        ct in prop::option::of(1e-6f64..1e6),
        theta3 in -1e3f64..1e3,
    ) {
        let row = ResultRow {
            n: 10, gamma: 1.0 / 6.0, alpha: "mala".into(), matrix: "zero".into(), ell, steps: 100, reps: 3,
            h_hat: h, h_sd: h.map(|v| v / 7.0), esjd: Some(ell / 3.0), esjd_sd: None, rho1: Some(0.1), rho1_sd: None,
            ct, ct_sd: ct, theta2: Some(1.0820366), theta2_sd: Some(0.01), theta3: Some(theta3), theta3_sd: None,
            selected: h.is_some(),
        };
        let mut buf = Vec::new();
        write_rows(std::slice::from_ref(&row), &mut buf).unwrap();
        prop_assert_eq!(read_rows(buf.as_slice()).unwrap(), vec![row]);
    }
}
