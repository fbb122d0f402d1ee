use std::ffi::CStr;
use std::ptr;

use gjb_ffi::*;

fn last_error() -> String {
    let p = gjb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn raw_moments_of_the_normal() {
    let mut m = [0.0; 9];
    assert_eq!(
        unsafe { gjb_raw_moments(0.0, m.as_mut_ptr()) },
        GjbStatus::Ok
    );
    assert_eq!(m, [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0]);
}

#[test]
fn gaussian_sigma() {
    let mut s = GjbSigma::default();
    assert_eq!(
        unsafe { gjb_sigma_analytic(0.0, GjbCalibration::Exact, &mut s) },
        GjbStatus::Ok
    );
    assert!((s.s11 - 24.0).abs() < 1e-12 && (s.s22 - 6.0).abs() < 1e-12 && s.s12.abs() < 1e-12);
}

#[test]
fn chi2_two_dof_is_exponential() {
    let mut p = 0.0;
    assert_eq!(unsafe { gjb_chi2_survival(2.0, 2, &mut p) }, GjbStatus::Ok);
    assert!((p - (-1.0f64).exp()).abs() < 1e-15);
    assert_eq!(
        unsafe { gjb_chi2_survival(-1.0, 2, &mut p) },
        GjbStatus::InvalidArgument
    );
    assert!(!last_error().is_empty());
}

#[test]
fn sample_matches_core() {
    let mut buf = vec![0.0; 64];
    assert_eq!(
        unsafe { gjb_sample(3.0, 64, 11, buf.as_mut_ptr()) },
        GjbStatus::Ok
    );
    let shape = gjb::distributions::SkewNormalShape::new(3.0).unwrap();
    assert_eq!(buf, gjb::distributions::sample_sn(shape, 64, 11).unwrap());
}

#[test]
fn hypothesis_round_trip_matches_core() {
    let data = [-1.0, 0.0, 1.0];
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            gjb_hypothesis_new(1.0, GjbCalibration::Exact, &mut h),
            GjbStatus::Ok
        );
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(gjb_hypothesis_shape(h, &mut a, &mut b), GjbStatus::Ok);
        assert!(a > 3.0 && b > 0.0);

        let mut o = ptr::null_mut();
        assert_eq!(
            gjb_hypothesis_test(h, data.as_ptr(), data.len(), 4, &mut o),
            GjbStatus::Ok
        );
        let expected =
            gjb::testing::run_test(&data, 1.0, gjb::testing::SigmaRoute::Analytic, 4).unwrap();
        assert_eq!(gjb_outcome_statistic(o), expected.j_n);
        assert_eq!(gjb_outcome_p_value(o), expected.p_value);
        assert_eq!(gjb_outcome_n(o), 12);
        let (mut an, mut bn) = (0.0, 0.0);
        assert_eq!(
            gjb_outcome_empirical_shape(o, &mut an, &mut bn),
            GjbStatus::Ok
        );
        assert!((an - 1.5).abs() < 1e-12 && bn.abs() < 1e-12);
        let mut s = GjbSigma::default();
        assert_eq!(gjb_outcome_sigma(o, &mut s), GjbStatus::Ok);
        assert_eq!(s.s11, expected.sigma.s11);
        gjb_outcome_free(o);
        gjb_hypothesis_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            gjb_hypothesis_new(f64::NAN, GjbCalibration::Exact, &mut h),
            GjbStatus::InvalidArgument
        );
        assert!(h.is_null());
        assert_eq!(
            gjb_hypothesis_new(0.0, GjbCalibration::Exact, ptr::null_mut()),
            GjbStatus::NullPointer
        );

        assert_eq!(
            gjb_hypothesis_new(2.0, GjbCalibration::Exact, &mut h),
            GjbStatus::Ok
        );
        let mut o = ptr::null_mut();
        assert_eq!(
            gjb_hypothesis_test(h, ptr::null(), 0, 1, &mut o),
            GjbStatus::EmptySample
        );
        let flat = [2.0; 10];
        assert_eq!(
            gjb_hypothesis_test(h, flat.as_ptr(), 10, 1, &mut o),
            GjbStatus::ZeroVariance
        );
        assert!(o.is_null());
        assert!(last_error().contains("variance"));
        assert!(gjb_outcome_p_value(ptr::null()).is_nan());
        gjb_outcome_free(ptr::null_mut());
        gjb_hypothesis_free(h);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/gjb.h");
    let source = include_str!("../src/lib.rs");
    let exports: Vec<&str> = source
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    for ty in [
        "GjbStatus",
        "GjbCalibration",
        "GjbSigma",
        "typedef struct GjbHypothesis",
        "typedef struct GjbOutcome",
    ] {
        assert!(header.contains(ty), "{ty} missing from header");
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(gjb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
