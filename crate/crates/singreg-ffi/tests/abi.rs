//! Exercise the C surface through the Rust-visible extern functions: handle
//! lifecycle, status mapping, buffer evaluation, and registry access.

use std::ffi::{c_char, CStr};
use std::ptr;

use singreg::potentials::PotentialSpec;
use singreg::CorrelationModel;
use singreg_ffi::*;

fn lj_handle(lambda: f64) -> *mut SingregModel {
    let mut handle: *mut SingregModel = ptr::null_mut();
    let status = unsafe { singreg_model_lj(lambda, &mut handle) };
    assert_eq!(status, singreg_status::SINGREG_OK);
    assert!(!handle.is_null());
    handle
}

#[test]
fn lj_model_matches_the_library() {
    let handle = lj_handle(0.430);
    let reference = CorrelationModel::build(PotentialSpec::lennard_jones(), 0.430).unwrap();
    for x in [0.4, 1.0, 1.2, 5.0] {
        let mut g = f64::NAN;
        assert_eq!(
            unsafe { singreg_g(handle, x, &mut g) },
            singreg_status::SINGREG_OK
        );
        assert_eq!(g.to_bits(), reference.g(x).unwrap().to_bits());
        let mut phi = f64::NAN;
        assert_eq!(
            unsafe { singreg_phi_reg(handle, x, &mut phi) },
            singreg_status::SINGREG_OK
        );
        assert_eq!(phi.to_bits(), reference.phi_reg(x).unwrap().to_bits());
    }
    unsafe { singreg_model_free(handle) };
}

#[test]
fn constants_expose_the_closed_forms() {
    let handle = lj_handle(0.430);
    let (mut lambda, mut a, mut alpha, mut mu, mut s0) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let status =
        unsafe { singreg_constants(handle, &mut lambda, &mut a, &mut alpha, &mut mu, &mut s0) };
    assert_eq!(status, singreg_status::SINGREG_OK);
    assert_eq!(lambda, 0.430);
    assert!((a / lambda - 0.5).abs() < 1e-15);
    assert_eq!(alpha, 1.2);
    assert_eq!(mu, -0.1);
    assert_eq!(s0, 2.0);
    // individual outputs are skippable
    let mut a_only = 0.0;
    let status = unsafe {
        singreg_constants(
            handle,
            ptr::null_mut(),
            &mut a_only,
            ptr::null_mut(),
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, singreg_status::SINGREG_OK);
    assert_eq!(a_only, a);
    unsafe { singreg_model_free(handle) };
}

#[test]
fn buffer_evaluation_matches_pointwise_calls() {
    let handle = lj_handle(0.494);
    let xs: Vec<f64> = (1..=40).map(|i| 0.2 + 0.1 * i as f64).collect();
    let mut buffer = vec![f64::NAN; xs.len()];
    let status = unsafe { singreg_g_many(handle, xs.as_ptr(), xs.len(), buffer.as_mut_ptr()) };
    assert_eq!(status, singreg_status::SINGREG_OK);
    for (&x, &got) in xs.iter().zip(&buffer) {
        let mut one = f64::NAN;
        assert_eq!(
            unsafe { singreg_g(handle, x, &mut one) },
            singreg_status::SINGREG_OK
        );
        assert_eq!(got.to_bits(), one.to_bits());
    }
    // empty request needs no buffers
    let status = unsafe { singreg_g_many(handle, ptr::null(), 0, ptr::null_mut()) };
    assert_eq!(status, singreg_status::SINGREG_OK);
    let status = unsafe { singreg_g_many(handle, ptr::null(), 3, buffer.as_mut_ptr()) };
    assert_eq!(status, singreg_status::SINGREG_ERR_NULL);
    unsafe { singreg_model_free(handle) };
}

#[test]
fn status_codes_mirror_the_failure_modes() {
    let mut handle: *mut SingregModel = ptr::null_mut();

    assert_eq!(
        unsafe { singreg_model_lj(0.430, ptr::null_mut()) },
        singreg_status::SINGREG_ERR_NULL
    );
    assert_eq!(
        unsafe { singreg_model_lj(f64::NAN, &mut handle) },
        singreg_status::SINGREG_ERR_INVALID
    );
    assert_eq!(
        unsafe { singreg_model_lj(0.0, &mut handle) },
        singreg_status::SINGREG_ERR_DOMAIN
    );
    assert_eq!(
        unsafe { singreg_model_power(4.0, 0.5, &mut handle) },
        singreg_status::SINGREG_ERR_DEGENERATE
    );
    assert_eq!(
        unsafe { singreg_model_power(3.0, 0.5, &mut handle) },
        singreg_status::SINGREG_ERR_DOMAIN
    );
    assert_eq!(
        unsafe { singreg_model_for_material(ptr::null(), &mut handle) },
        singreg_status::SINGREG_ERR_NULL
    );
    let invalid_utf8: &[u8] = b"he\xff4\0";
    assert_eq!(
        unsafe { singreg_model_for_material(invalid_utf8.as_ptr().cast(), &mut handle) },
        singreg_status::SINGREG_ERR_UTF8
    );
    assert_eq!(
        unsafe { singreg_model_for_material(c"xx".as_ptr(), &mut handle) },
        singreg_status::SINGREG_ERR_UNKNOWN_MATERIAL
    );
    assert!(
        handle.is_null(),
        "failed constructions must not emit a handle"
    );

    let model = lj_handle(0.430);
    let mut value = 0.0;
    assert_eq!(
        unsafe { singreg_g(model, -1.0, &mut value) },
        singreg_status::SINGREG_ERR_DOMAIN
    );
    assert_eq!(
        unsafe { singreg_g(model, 1.0, ptr::null_mut()) },
        singreg_status::SINGREG_ERR_NULL
    );
    assert_eq!(
        unsafe { singreg_g(ptr::null(), 1.0, &mut value) },
        singreg_status::SINGREG_ERR_NULL
    );
    unsafe { singreg_model_free(model) };
    unsafe { singreg_model_free(ptr::null_mut()) };
}

#[test]
fn registry_access_lists_the_builtins() {
    assert_eq!(singreg_material_count(), 6);
    let mut ids = Vec::new();
    for i in 0..singreg_material_count() {
        let p: *const c_char = singreg_material_id(i);
        assert!(!p.is_null());
        ids.push(unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string());
    }
    assert_eq!(ids, ["d_pol", "h_pol", "he3", "he4", "he6", "t_pol"]);
    assert!(singreg_material_id(6).is_null());

    let mut lambda = 0.0;
    assert_eq!(
        unsafe { singreg_material_lambda(c"he4".as_ptr(), &mut lambda) },
        singreg_status::SINGREG_OK
    );
    assert_eq!(lambda, 0.430);

    let mut by_material: *mut SingregModel = ptr::null_mut();
    assert_eq!(
        unsafe { singreg_model_for_material(c"he3".as_ptr(), &mut by_material) },
        singreg_status::SINGREG_OK
    );
    let mut g_material = f64::NAN;
    assert_eq!(
        unsafe { singreg_g(by_material, 1.0, &mut g_material) },
        singreg_status::SINGREG_OK
    );
    let by_lambda = lj_handle(0.494);
    let mut g_lambda = f64::NAN;
    assert_eq!(
        unsafe { singreg_g(by_lambda, 1.0, &mut g_lambda) },
        singreg_status::SINGREG_OK
    );
    assert_eq!(g_material.to_bits(), g_lambda.to_bits());
    unsafe { singreg_model_free(by_material) };
    unsafe { singreg_model_free(by_lambda) };
}

#[test]
fn every_status_has_a_message() {
    use singreg_status::*;
    for status in [
        SINGREG_OK,
        SINGREG_ERR_INVALID,
        SINGREG_ERR_DEGENERATE,
        SINGREG_ERR_CONVERGENCE,
        SINGREG_ERR_DOMAIN,
        SINGREG_ERR_NULL,
        SINGREG_ERR_UTF8,
        SINGREG_ERR_UNKNOWN_MATERIAL,
        SINGREG_ERR_IO,
        SINGREG_ERR_INTERNAL,
    ] {
        let p = singreg_status_message(status);
        assert!(!p.is_null());
        assert!(!unsafe { CStr::from_ptr(p) }.to_bytes().is_empty());
    }
}
