use std::ffi::{c_char, CStr, CString};
use std::ptr;

use sercomp_ffi::*;

const LINE: SercompLine = SercompLine {
    r_series_ohm: 8.5,
    l_series_h: 0.25,
    f0_hz: 60.0,
    c_shunt_per_end_f: 1.1e-6,
};

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { sercomp_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(sercomp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn clarke_round_trip() {
    let (mut al, mut be) = (0.0, 0.0);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(sercomp_clarke(1.0, -0.25, -0.75, &mut al, &mut be), SercompStatus::Ok);
        assert_eq!(sercomp_inverse_clarke(al, be, &mut a, &mut b, &mut c), SercompStatus::Ok);
    }
    assert!((al - 1.0).abs() < 1e-15);
    assert!((be - 0.5 / 3f64.sqrt()).abs() < 1e-15);
    assert!((a - 1.0).abs() < 1e-14 && (b + 0.25).abs() < 1e-14 && (c + 0.75).abs() < 1e-14);
}

#[test]
fn null_outputs_are_reported() {
    let mut al = 0.0;
    let s = unsafe { sercomp_clarke(1.0, 0.0, -1.0, &mut al, ptr::null_mut()) };
    assert_eq!(s, SercompStatus::NullPointer);
    assert!(last_error().contains("beta"));
    let s = unsafe { sercomp_size_series_capacitor(ptr::null(), 0.25, 1, &mut al) };
    assert_eq!(s, SercompStatus::NullPointer);
}

#[test]
fn sizing_quantities() {
    let (mut f, mut g, mut c) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(sercomp_ssr_frequency(0.25, 60.0, &mut f), SercompStatus::Ok);
        assert_eq!(sercomp_loadability_gain(0.25, &mut g), SercompStatus::Ok);
        assert_eq!(sercomp_size_series_capacitor(&LINE, 0.25, 2, &mut c), SercompStatus::Ok);
    }
    assert!((f - 30.0).abs() < 1e-12);
    assert!((g - 4.0 / 3.0).abs() < 1e-12);
    let w = 2.0 * std::f64::consts::PI * 60.0;
    assert!((c - 1.0 / (0.25 * w * w * 0.25)).abs() < 1e-12 * c);

    let s = unsafe { sercomp_loadability_gain(1.0, &mut g) };
    assert_eq!(s, SercompStatus::InvalidInput);
    assert!(last_error().contains("n_pu"));
}

#[test]
fn bare_line_admittance_is_series_impedance() {
    let mut g = SercompAdmittance::default();
    let w = 2.0 * std::f64::consts::PI * 60.0;
    assert_eq!(unsafe { sercomp_line_admittance(&LINE, 0.0, 0.0, w, &mut g) }, SercompStatus::Ok);
    let z = num_complex::Complex64::new(8.5, 0.25 * w).inv();
    assert!((g.g_aa_re - z.re).abs() < 1e-15 && (g.g_aa_im - z.im).abs() < 1e-15);
    assert_eq!((g.g_ab_re, g.g_ab_im), (0.0, 0.0));
}

#[test]
fn power_and_its_rates() {
    let (mut p, mut q) = (0.0, 0.0);
    unsafe { sercomp_instantaneous_pq(100.0, 0.0, 10.0, 0.0, &mut p, &mut q) };
    assert_eq!((p, q), (-1500.0, 0.0));

    // Balanced buses with no flow and no injection: only the
    // voltage-difference term drives the power.
    let bus = SercompBus {
        vs_alpha: 1000.0,
        vs_beta: 0.0,
        vr_alpha: 1000.0,
        vr_beta: 0.0,
        vcon_alpha: 0.0,
        vcon_beta: 0.0,
    };
    let (mut dp, mut dq) = (1.0, 1.0);
    let s = unsafe { sercomp_pq_derivatives(&LINE, 0.25, &bus, 0.0, 0.0, &mut dp, &mut dq) };
    assert_eq!(s, SercompStatus::Ok);
    assert_eq!((dp, dq), (0.0, 0.0));

    let s = unsafe { sercomp_pq_derivatives(&LINE, 0.0, &bus, 0.0, 0.0, &mut dp, &mut dq) };
    assert_eq!(s, SercompStatus::InvalidInput);
}

#[test]
fn scenario_lifecycle() {
    let json = CString::new(r#"{"sim": {"dt_s": 1e-4, "duration_s": 0.05}, "record": ["p_delivered_w"]}"#).unwrap();
    let mut sc = ptr::null_mut();
    let mut res = ptr::null_mut();
    unsafe {
        assert_eq!(sercomp_scenario_from_json(json.as_ptr(), &mut sc), SercompStatus::Ok);
        assert!(!sc.is_null());
        assert_eq!(sercomp_scenario_run(sc, &mut res), SercompStatus::Ok);
        assert!(!res.is_null());

        let (mut len, mut dt) = (0usize, 0.0);
        assert_eq!(sercomp_result_shape(res, &mut len, &mut dt), SercompStatus::Ok);
        assert_eq!((len, dt), (501, 1e-4));

        let name = CString::new("p_delivered_w").unwrap();
        let (mut data, mut n) = (ptr::null(), 0usize);
        assert_eq!(sercomp_result_channel(res, name.as_ptr(), &mut data, &mut n), SercompStatus::Ok);
        let p = std::slice::from_raw_parts(data, n);
        assert_eq!(n, 501);
        assert!(p.iter().all(|v| (v - 288e6).abs() < 1e-3 * 288e6));

        let time = CString::new("time_s").unwrap();
        assert_eq!(sercomp_result_channel(res, time.as_ptr(), &mut data, &mut n), SercompStatus::Ok);
        assert_eq!(*data.add(n - 1), 0.05);

        let missing = CString::new("q_var").unwrap();
        assert_eq!(sercomp_result_channel(res, missing.as_ptr(), &mut data, &mut n), SercompStatus::InvalidInput);
        let unknown = CString::new("nope").unwrap();
        assert_eq!(sercomp_result_channel(res, unknown.as_ptr(), &mut data, &mut n), SercompStatus::InvalidInput);

        sercomp_result_free(res);
        sercomp_scenario_free(sc);
        sercomp_result_free(ptr::null_mut());
        sercomp_scenario_free(ptr::null_mut());
    }
}

#[test]
fn scenario_errors_map_to_status_codes() {
    let mut sc = ptr::null_mut();
    let bad = CString::new(r#"{"sim": {"dt_s": -1}}"#).unwrap();
    assert_eq!(unsafe { sercomp_scenario_from_json(bad.as_ptr(), &mut sc) }, SercompStatus::InvalidInput);
    assert!(sc.is_null());
    assert!(last_error().contains("dt"));

    let heavy = CString::new(r#"{"initial_flow": {"s_va": 5e9, "pf": 1.0}, "sim": {"duration_s": 0.01}}"#).unwrap();
    let mut res = ptr::null_mut();
    unsafe {
        assert_eq!(sercomp_scenario_from_json(heavy.as_ptr(), &mut sc), SercompStatus::Ok);
        assert_eq!(sercomp_scenario_run(sc, &mut res), SercompStatus::Infeasible);
        assert!(res.is_null());
        sercomp_scenario_free(sc);
    }

    let long = unsafe { sercomp_last_error_message(ptr::null_mut(), 0) };
    assert!(long > 10);
    let mut tiny = [1 as c_char; 4];
    let n = unsafe { sercomp_last_error_message(tiny.as_mut_ptr(), tiny.len()) };
    assert_eq!(n, long);
    assert_eq!(tiny[3], 0);
}
