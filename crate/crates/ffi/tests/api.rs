use std::ffi::CStr;
use std::ptr;

use hg_crosstalk_ffi::*;

const LAMBDA: f64 = 0.8e-6;
const Z: f64 = 5000.0;
const W0P: f64 = 0.1 / std::f64::consts::SQRT_2;

fn channel(kind: HgTurbulenceKind, value: f64) -> *mut HgChannel {
    let mut ch = ptr::null_mut();
    let st = unsafe { hg_channel_new(LAMBDA, Z, W0P, kind as u32, value, &mut ch) };
    assert_eq!(st, HgStatus::Ok);
    assert!(!ch.is_null());
    ch
}

fn last_error() -> String {
    let p = hg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn vacuum_matrix_through_handles() {
    let ch = channel(HgTurbulenceKind::Vacuum, 0.0);
    let mut mat = ptr::null_mut();
    assert_eq!(
        unsafe { hg_matrix_new(ch, 3, true, &mut mat) },
        HgStatus::Ok
    );
    let dim = unsafe { hg_matrix_dim(mat) };
    assert_eq!(dim, 10);
    let mut v = 0.0;
    assert_eq!(unsafe { hg_matrix_get(mat, 0, 0, &mut v) }, HgStatus::Ok);
    assert!((v - 0.31307).abs() < 1e-12);
    assert_eq!(unsafe { hg_matrix_get(mat, 0, 1, &mut v) }, HgStatus::Ok);
    assert_eq!(v, 0.0);
    let (mut m, mut n) = (9, 9);
    assert_eq!(
        unsafe { hg_matrix_mode(mat, 1, &mut m, &mut n) },
        HgStatus::Ok
    );
    assert_eq!((m, n), (0, 1));
    let mut buf = vec![0.0; dim * dim];
    assert_eq!(
        unsafe { hg_matrix_copy(mat, buf.as_mut_ptr(), buf.len()) },
        HgStatus::Ok
    );
    assert!((buf[3] - 0.03986).abs() < 5e-5);
    assert_eq!(
        unsafe { hg_matrix_copy(mat, buf.as_mut_ptr(), 5) },
        HgStatus::OutOfRange
    );
    assert_eq!(
        unsafe { hg_matrix_get(mat, 10, 0, &mut v) },
        HgStatus::OutOfRange
    );
    assert!(last_error().contains("outside"));
    unsafe {
        hg_matrix_free(mat);
        hg_channel_free(ch);
    }
}

#[test]
fn turbulent_channel_and_scalar_functions() {
    let ch = channel(HgTurbulenceKind::Rytov, 0.02);
    let mut gamma = 0.0;
    assert_eq!(unsafe { hg_channel_gamma(ch, &mut gamma) }, HgStatus::Ok);
    let mut expected = 0.0;
    assert_eq!(
        unsafe { hg_turbulence_strength(0.02, &mut expected) },
        HgStatus::Ok
    );
    assert_eq!(gamma, expected);
    assert!((gamma - 0.014_908_144_692_830_838).abs() < 1e-15);

    let mut pi00 = 0.0;
    assert_eq!(unsafe { hg_pi_factor(ch, 0, 0, &mut pi00) }, HgStatus::Ok);
    assert!((pi00 - 4.771_242_371_606_41).abs() < 1e-9);
    let (mut p, mut q) = (0.0, 0.0);
    assert_eq!(
        unsafe { hg_joint_probability(ch, 0, 0, 0, 1, &mut p) },
        HgStatus::Ok
    );
    assert_eq!(
        unsafe { hg_joint_probability(ch, 0, 1, 0, 0, &mut q) },
        HgStatus::Ok
    );
    assert!(p > 0.0);
    assert_eq!(p, q);
    let mut scale = 0.0;
    assert_eq!(
        unsafe { hg_calibration_scale(ch, &mut scale) },
        HgStatus::Ok
    );
    assert!(scale > 0.0);

    let mut r = 0.0;
    assert_eq!(
        unsafe { hg_rytov_variance(2.428_892_802_905_356_7e-17, LAMBDA, Z, &mut r) },
        HgStatus::Ok
    );
    assert!((r - 0.02).abs() < 1e-14);
    unsafe { hg_channel_free(ch) };
}

#[test]
fn matrix_from_explicit_modes() {
    let ch = channel(HgTurbulenceKind::Gamma, 0.0162);
    let m = [0u32, 0, 2];
    let n = [0u32, 2, 0];
    let mut mat = ptr::null_mut();
    assert_eq!(
        unsafe { hg_matrix_from_modes(ch, m.as_ptr(), n.as_ptr(), 3, false, &mut mat) },
        HgStatus::Ok
    );
    assert_eq!(unsafe { hg_matrix_dim(mat) }, 3);
    let mut a = 0.0;
    let mut b = 0.0;
    unsafe {
        hg_matrix_get(mat, 0, 1, &mut a);
        hg_matrix_get(mat, 1, 0, &mut b);
    }
    assert_eq!(a, b);
    let empty = unsafe { hg_matrix_from_modes(ch, ptr::null(), ptr::null(), 0, true, &mut mat) };
    assert_eq!(empty, HgStatus::InvalidParameter);
    unsafe {
        hg_matrix_free(mat);
        hg_channel_free(ch);
    }
}

#[test]
fn error_codes() {
    let mut ch = ptr::null_mut();
    let st = unsafe { hg_channel_new(-1.0, Z, W0P, HgTurbulenceKind::Vacuum as u32, 0.0, &mut ch) };
    assert_eq!(st, HgStatus::Domain);
    assert!(ch.is_null());
    assert!(last_error().contains("wavelength"));
    assert_eq!(
        unsafe { hg_channel_new(LAMBDA, Z, W0P, 42, 0.0, &mut ch) },
        HgStatus::InvalidParameter
    );
    assert_eq!(
        unsafe {
            hg_channel_new(
                LAMBDA,
                Z,
                W0P,
                HgTurbulenceKind::Rytov as u32,
                -0.5,
                &mut ch,
            )
        },
        HgStatus::Domain
    );
    assert_eq!(
        unsafe { hg_channel_new(LAMBDA, Z, W0P, 0, 0.0, ptr::null_mut()) },
        HgStatus::NullPointer
    );
    let mut v = 0.0;
    assert_eq!(
        unsafe { hg_pi_factor(ptr::null(), 0, 0, &mut v) },
        HgStatus::NullPointer
    );
    assert_eq!(
        unsafe { hg_turbulence_strength(f64::NAN, &mut v) },
        HgStatus::Domain
    );
    assert_eq!(unsafe { hg_matrix_dim(ptr::null()) }, 0);

    let good = channel(HgTurbulenceKind::Vacuum, 0.0);
    assert_eq!(
        unsafe { hg_pi_factor(good, 11, 0, &mut v) },
        HgStatus::OutOfRange
    );
    assert_eq!(
        unsafe { hg_pi_factor(good, 0, 0, ptr::null_mut()) },
        HgStatus::NullPointer
    );
    unsafe {
        hg_channel_free(good);
        hg_channel_free(ptr::null_mut());
        hg_matrix_free(ptr::null_mut());
    }
}

#[test]
fn status_messages_are_static_and_distinct() {
    let all = [
        HgStatus::Ok,
        HgStatus::NullPointer,
        HgStatus::Domain,
        HgStatus::Pole,
        HgStatus::NumericalRegime,
        HgStatus::NumericalFailure,
        HgStatus::Calibration,
        HgStatus::Quadrature,
        HgStatus::InvalidParameter,
        HgStatus::OutOfRange,
        HgStatus::Panic,
    ];
    let msgs: Vec<String> = all
        .iter()
        .map(|&s| {
            unsafe { CStr::from_ptr(hg_status_message(s)) }
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    for (i, a) in msgs.iter().enumerate() {
        assert!(!a.is_empty());
        assert!(msgs[i + 1..].iter().all(|b| b != a));
    }
    assert_eq!(msgs[0], "ok");
}
