use proptest::prelude::*;

use gjb::distributions::{sample_sn, SkewNormalShape};
use gjb::gjb::{chi2_survival, sigma_analytic_with, Calibration, CovarianceMatrix2};
use gjb::io::{CampaignReport, Report, TestReport, SCHEMA_VERSION};
use gjb::moments::{analytic_shape_statistics, centered_moment, shape_statistics, sn_raw_moments};
use gjb::testing::{
    empirical_shape, estimate_alpha, gjb_statistic, Hypothesis, SigmaRoute, TestOutcome,
};

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + rel * a.abs().max(b.abs())
}

fn calibration() -> impl Strategy<Value = Calibration> {
    prop_oneof![Just(Calibration::Exact), Just(Calibration::Legacy)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_forms_agree_with_raw_moments(alpha in -10.0f64..10.0) {
        let shape = SkewNormalShape::new(alpha).unwrap();
        let by_moments = shape_statistics(&sn_raw_moments(shape)).unwrap();
        let closed = analytic_shape_statistics(shape);
        prop_assert!(close(by_moments.kurtosis_a, closed.kurtosis_a, 1e-10, 1e-12));
        prop_assert!(close(by_moments.skewness_b, closed.skewness_b, 1e-10, 1e-12));
    }

    #[test]
    fn odd_moments_flip_with_the_shape(alpha in -20.0f64..20.0) {
        let pos = sn_raw_moments(SkewNormalShape::new(alpha).unwrap());
        let neg = sn_raw_moments(SkewNormalShape::new(-alpha).unwrap());
        for j in 0..=8 {
            let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
            prop_assert!(close(neg[j], sign * pos[j], 1e-14, 1e-300));
        }
    }

    #[test]
    fn moment_inequalities(alpha in -50.0f64..50.0) {
        let raw = sn_raw_moments(SkewNormalShape::new(alpha).unwrap());
        let mu2 = centered_moment(2, &raw).unwrap();
        let mu3 = centered_moment(3, &raw).unwrap();
        let mu4 = centered_moment(4, &raw).unwrap();
        prop_assert!(mu2 > 0.0);
        // Pearson: kurtosis >= skewness^2 + 1.
        prop_assert!(mu4 / (mu2 * mu2) >= mu3 * mu3 / mu2.powi(3) + 1.0);
    }

    #[test]
    fn covariance_is_positive_semidefinite(alpha in -100.0f64..100.0, cal in calibration()) {
        let s = sigma_analytic_with(&sn_raw_moments(SkewNormalShape::new(alpha).unwrap()), cal).unwrap();
        prop_assert!(s.s11 > 0.0 && s.s22 > 0.0);
        prop_assert!(s.satisfies_cauchy_schwarz());
    }

    #[test]
    fn statistic_is_affine_invariant(
        alpha in -6.0f64..6.0,
        seed in any::<u64>(),
        n in 10usize..400,
        scale in 0.01f64..100.0,
        shift in -1e3f64..1e3,
        cal in calibration(),
    ) {
        let x = sample_sn(SkewNormalShape::new(alpha).unwrap(), n, seed).unwrap();
        let y: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let h = Hypothesis::new(alpha, SigmaRoute::Analytic, cal).unwrap();
        let (a, b) = (h.test(&x, 1).unwrap(), h.test(&y, 1).unwrap());
        prop_assert!(close(a.j_n, b.j_n, 1e-10, 1e-10), "{} vs {}", a.j_n, b.j_n);
        prop_assert!(close(a.p_value, b.p_value, 1e-10, 1e-12));
    }

    #[test]
    fn duplication_scales_the_statistic_exactly(
        alpha in -6.0f64..6.0,
        seed in any::<u64>(),
        n in 3usize..200,
        k in 1usize..100_000,
    ) {
        let x = sample_sn(SkewNormalShape::new(alpha).unwrap(), n, seed).unwrap();
        let h = Hypothesis::new(0.0, SigmaRoute::Analytic, Calibration::Exact).unwrap();
        let one = h.test(&x, 1).unwrap();
        let many = h.test(&x, k).unwrap();
        prop_assert_eq!(many.j_n, k as f64 * one.j_n);
        prop_assert_eq!((many.a_n, many.b_n), (one.a_n, one.b_n));
        prop_assert_eq!(many.n, k * n);
        prop_assert!(many.p_value <= one.p_value);
    }

    #[test]
    fn explicit_copies_match_the_duplication_factor(seed in any::<u64>(), n in 3usize..100) {
        let x = sample_sn(SkewNormalShape::new(2.0).unwrap(), n, seed).unwrap();
        let doubled: Vec<f64> = x.iter().chain(&x).copied().collect();
        let h = Hypothesis::new(2.0, SigmaRoute::Analytic, Calibration::Exact).unwrap();
        let (a, b) = (h.test(&x, 2).unwrap(), h.test(&doubled, 1).unwrap());
        prop_assert!(close(a.j_n, b.j_n, 1e-9, 1e-12));
        let (s, t) = (empirical_shape(&x).unwrap(), empirical_shape(&doubled).unwrap());
        prop_assert!(close(s.0, t.0, 1e-12, 1e-12) && close(s.1, t.1, 1e-12, 1e-12));
    }

    #[test]
    fn shape_estimate_is_sign_equivariant(alpha in -15.0f64..15.0, seed in any::<u64>(), n in 3usize..500) {
        let x = sample_sn(SkewNormalShape::new(alpha).unwrap(), n, seed).unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        match (estimate_alpha(&x), estimate_alpha(&neg)) {
            (Ok(e), Ok(f)) => {
                prop_assert!(close(e.alpha, -f.alpha, 1e-10, 1e-10));
                prop_assert_eq!(e.clamped, f.clamped);
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "mismatch {:?}", other),
        }
    }

    #[test]
    fn diagonal_statistic_identity(
        da in -3.0f64..3.0,
        db in -3.0f64..3.0,
        s11 in 0.1f64..100.0,
        s22 in 0.1f64..100.0,
        n in 1usize..100_000,
    ) {
        let sigma = CovarianceMatrix2::diagonal(s11, s22);
        let j = gjb_statistic(3.0 + da, db, 3.0, 0.0, &sigma, n).unwrap();
        let want = n as f64 * (da * da / s11 + db * db / s22);
        prop_assert!(close(j, want, 1e-12, 1e-300));
    }

    #[test]
    fn survival_is_monotone(x in 0.0f64..200.0, step in 0.0f64..5.0, dof in 1u32..12) {
        let (p, q) = (chi2_survival(x, dof).unwrap(), chi2_survival(x + step, dof).unwrap());
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(q <= p + 1e-15);
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        -1e-8f64..1e-8,
        any::<f64>().prop_filter("finite", |v| v.is_finite())
    ]
}

fn test_report() -> impl Strategy<Value = Report> {
    (
        (
            finite(),
            1usize..1_000_000,
            1usize..1000,
            finite(),
            finite(),
            finite(),
            finite(),
        ),
        (0.1f64..100.0, 0.1f64..100.0, -1.0f64..1.0),
        (
            0.0f64..1e4,
            0.001f64..0.2,
            calibration(),
            any::<bool>(),
            0u64..100_000,
        ),
    )
        .prop_map(
            |((alpha, n, k, a_n, b_n, a, b), (s11, s22, r), (j_n, level, cal, mc, ms))| {
                let outcome = TestOutcome {
                    n,
                    a_n,
                    b_n,
                    a,
                    b,
                    j_n,
                    p_value: (-j_n / 2.0).exp(),
                    sigma: CovarianceMatrix2::new(s11, s22, r * (s11 * s22).sqrt()),
                    duplication_factor: k,
                };
                let mut report = TestReport::new(
                    alpha,
                    &outcome,
                    level,
                    cal,
                    if mc { "monte-carlo" } else { "analytic" },
                );
                report.wall_time_ms = ms;
                Report::Test(report)
            },
        )
}

fn campaign_report() -> impl Strategy<Value = Report> {
    (
        finite(),
        2usize..10_000,
        proptest::collection::vec(0.0f64..=1.0, 1..50),
        any::<bool>(),
        any::<u64>(),
    )
        .prop_map(|(alpha, size, p, full, seed)| {
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            Report::Simulate(CampaignReport {
                schema_version: SCHEMA_VERSION.into(),
                alpha,
                data_law: format!("sn({alpha})"),
                sample_size: size,
                replications: p.len(),
                seed,
                sigma_route: "analytic".into(),
                calibration: Calibration::Exact,
                level: 0.05,
                mean_p_value: mean,
                rejection_rate: p.iter().filter(|&&v| v < 0.05).count() as f64 / p.len() as f64,
                p_values: full.then_some(p),
                wall_time_ms: 0,
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reports_round_trip_through_json(report in prop_oneof![test_report(), campaign_report()]) {
        let text = report.to_json().unwrap();
        let back = Report::from_json(&text).unwrap();
        prop_assert_eq!(&back, &report);
        prop_assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn csv_has_matching_header_and_row(report in test_report()) {
        let csv = report.to_csv().unwrap();
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let header = reader.headers().unwrap().clone();
        let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
        prop_assert_eq!(rows.len(), 1);
        prop_assert_eq!(rows[0].len(), header.len());
        let p_col = header.iter().position(|h| h == "p_value").unwrap();
        let Report::Test(t) = &report else { unreachable!() };
        prop_assert_eq!(rows[0][p_col].parse::<f64>().unwrap(), t.p_value);
    }
}
