//! Exercises the C entry points the way a foreign caller would: raw
//! pointers, status codes and explicit frees.

use cc_measure_ffi::*;

#[test]
fn euclidean_distance_through_the_abi() {
    let space = ccm_space_euclidean(2);
    assert!(!space.is_null());
    let p = [0.0, 0.0];
    let q = [3.0, 4.0];
    let mut out = CcmDistance {
        value: 0.0,
        gap: 0.0,
        is_exact: 0,
    };
    let status = unsafe { ccm_distance(space, p.as_ptr(), q.as_ptr(), 2, &mut out) };
    assert_eq!(status, CcmStatus::CcmStatusOk);
    assert!((out.value - 5.0).abs() < 1e-12);
    assert_eq!(out.is_exact, 1);
    unsafe { ccm_space_free(space) };
}

#[test]
fn heisenberg_anchor_through_the_abi() {
    let space = ccm_space_heisenberg();
    assert_eq!(unsafe { ccm_space_dim(space) }, 3);
    let p = [0.0, 0.0, 0.0];
    let q = [0.0, 0.0, 1.0];
    let mut out = CcmDistance {
        value: 0.0,
        gap: 0.0,
        is_exact: 0,
    };
    let status = unsafe { ccm_distance(space, p.as_ptr(), q.as_ptr(), 3, &mut out) };
    assert_eq!(status, CcmStatus::CcmStatusOk);
    assert!((out.value - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-9);
    unsafe { ccm_space_free(space) };
}

#[test]
fn dimension_mismatch_maps_to_status() {
    let space = ccm_space_heisenberg();
    let p = [0.0, 0.0];
    let q = [0.0, 0.0];
    let mut out = CcmDistance {
        value: 0.0,
        gap: 0.0,
        is_exact: 0,
    };
    let status = unsafe { ccm_distance(space, p.as_ptr(), q.as_ptr(), 2, &mut out) };
    assert_eq!(status, CcmStatus::CcmStatusDimensionMismatch);
    unsafe { ccm_space_free(space) };
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = CcmDistance {
        value: 0.0,
        gap: 0.0,
        is_exact: 0,
    };
    let status =
        unsafe { ccm_distance(std::ptr::null(), std::ptr::null(), std::ptr::null(), 0, &mut out) };
    assert_eq!(status, CcmStatus::CcmStatusNullPointer);
    // frees ignore null
    unsafe {
        ccm_space_free(std::ptr::null_mut());
        ccm_curve_free(std::ptr::null_mut());
    }
}

#[test]
fn meas_and_length_on_the_vertical_curve() {
    let space = ccm_space_heisenberg();
    let curve = ccm_curve_heisenberg_vertical(0.0, 1.0);
    assert!(!curve.is_null());
    let mut meas = CcmMeas {
        value: 0.0,
        spread: 0.0,
        gap_rel: 0.0,
        converged: 0,
    };
    let status = unsafe { ccm_meas_k(space, curve, 0.5, 2.0, &mut meas) };
    assert_eq!(status, CcmStatus::CcmStatusOk);
    assert_eq!(meas.converged, 1);
    let four_pi = 4.0 * std::f64::consts::PI;
    assert!((meas.value - four_pi).abs() < 1e-5 * four_pi);

    let mut len = 0.0;
    let status = unsafe { ccm_length_k(space, curve, 2.0, 17, &mut len) };
    assert_eq!(status, CcmStatus::CcmStatusOk);
    assert!((len - four_pi).abs() < 1e-5 * four_pi);

    let mut k_hat = 0.0;
    let mut resid = 0.0;
    let status = unsafe { ccm_degree(space, curve, 0.5, &mut k_hat, &mut resid) };
    assert_eq!(status, CcmStatus::CcmStatusOk);
    assert!((k_hat - 2.0).abs() < 0.01);

    unsafe {
        ccm_curve_free(curve);
        ccm_space_free(space);
    }
}

#[test]
fn verify_through_the_abi() {
    let space = ccm_space_euclidean(2);
    let v = [1.0, 0.0];
    let curve = unsafe { ccm_curve_euclidean_segment(v.as_ptr(), 2, 0.0, 1.0) };
    let eps = [0.2, 0.1, 0.05];
    let mut out = CcmVerifyReport {
        length_k: 0.0,
        hausdorff_upper: 0.0,
        spherical_upper: 0.0,
        complexity: 0.0,
        verdict: 0,
    };
    let status =
        unsafe { ccm_verify_main_theorem(space, curve, 1.0, eps.as_ptr(), 3, &mut out) };
    assert_eq!(status, CcmStatus::CcmStatusOk);
    assert_eq!(out.verdict, 1);
    assert!((out.length_k - 1.0).abs() < 0.01);
    unsafe {
        ccm_curve_free(curve);
        ccm_space_free(space);
    }
}

#[test]
fn invalid_weierstrass_parameters_yield_null() {
    // xi = 1/2 < 2/3
    let c = ccm_curve_engel_weierstrass(0.5, 4.0, 1.0, 0.0, 1.0);
    assert!(c.is_null());
    // valid parameters build
    let c = ccm_curve_engel_weierstrass(0.3, 4.0, 1.0, 0.0, 1.0);
    assert!(!c.is_null());
    unsafe { ccm_curve_free(c) };
}

#[test]
fn status_messages_are_nul_terminated() {
    for s in [
        CcmStatus::CcmStatusOk,
        CcmStatus::CcmStatusSolverFailed,
        CcmStatus::CcmStatusInternal,
    ] {
        let msg = ccm_status_message(s);
        assert!(!msg.is_null());
        let text = unsafe { std::ffi::CStr::from_ptr(msg) };
        assert!(!text.to_str().unwrap().is_empty());
    }
}
