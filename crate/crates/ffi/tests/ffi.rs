use std::ffi::{CStr, CString};
use std::ptr;

use orbitlab_ffi::*;

fn last_error() -> String {
    let p = ol_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn group_handle_round_trip() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ol_group_new([3usize].as_ptr(), 1, &mut g), OlStatus::Ok);
        let mut dim = 0;
        assert_eq!(ol_group_ambient_dim(g, &mut dim), OlStatus::Ok);
        assert_eq!(dim, 3);

        let diag = [2.0f64.exp(), 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, (-2.0f64).exp()];
        let mut a = [0.0; 3];
        let mut mu = 0.0;
        assert_eq!(ol_cartan(g, diag.as_ptr(), 9, a.as_mut_ptr(), 3, &mut mu), OlStatus::Ok);
        assert!((a[0] - 2.0).abs() < 1e-12 && a[1].abs() < 1e-12 && (a[2] + 2.0).abs() < 1e-12);
        assert!((mu - 8f64.sqrt()).abs() < 1e-12);

        let mut d = 0.0;
        assert_eq!(ol_distance_to_origin(g, diag.as_ptr(), 9, &mut d), OlStatus::Ok);
        assert!((d - mu).abs() < 1e-12);
        ol_group_free(g);
    }
}

#[test]
fn sl2_volume_is_cosh_minus_one() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ol_group_new([2usize].as_ptr(), 1, &mut g), OlStatus::Ok);
        let mut v = 0.0;
        assert_eq!(ol_log_ball_volume(g, 3.0, &mut v), OlStatus::Ok);
        assert!((v - (3f64.cosh() - 1.0).ln()).abs() < 1e-12);
        assert_eq!(ol_log_ball_volume(g, -1.0, &mut v), OlStatus::Domain);
        assert!(last_error().contains("radius"));
        ol_group_free(g);
    }
}

#[test]
fn errors_are_reported_through_status_and_message() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ol_group_new([1usize].as_ptr(), 1, &mut g), OlStatus::InvalidInput);
        assert!(g.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(ol_group_new(ptr::null(), 1, &mut g), OlStatus::NullPointer);
        assert_eq!(ol_group_ambient_dim(ptr::null(), ptr::null_mut()), OlStatus::NullPointer);

        assert_eq!(ol_group_new([2usize].as_ptr(), 1, &mut g), OlStatus::Ok);
        assert!(ol_last_error().is_null());
        let mut d = 0.0;
        let not_sl = [2.0, 0.0, 0.0, 2.0];
        assert_eq!(ol_distance_to_origin(g, not_sl.as_ptr(), 4, &mut d), OlStatus::InvalidInput);
        assert_eq!(ol_distance_to_origin(g, not_sl.as_ptr(), 3, &mut d), OlStatus::InvalidInput);
        ol_group_free(g);
        ol_group_free(ptr::null_mut());
    }
}

#[test]
fn orbit_counts_and_cache_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("o.wlc").to_str().unwrap()).unwrap();
    unsafe {
        let mut o = ptr::null_mut();
        assert_eq!(ol_orbit_enumerate(0, 1, 8.0, &mut o), OlStatus::Ok);
        let (mut len, mut r) = (0usize, 0.0);
        assert_eq!(ol_orbit_info(o, &mut len, &mut r), OlStatus::Ok);
        assert_eq!(r, 8.0);

        let (mut obs, mut pred) = (0u64, 0.0);
        assert_eq!(ol_count_ball(o, 8.0, &mut obs, &mut pred), OlStatus::Ok);
        assert_eq!(obs as usize, len);
        assert!((obs as f64 / pred - 1.0).abs() < 0.1);

        let mut so = [0u64; 4];
        let mut sp = [0.0; 4];
        assert_eq!(ol_count_sector(o, 4, 0.0, 8.0, false, so.as_mut_ptr(), sp.as_mut_ptr()), OlStatus::Ok);
        assert_eq!(so.iter().sum::<u64>(), obs);
        assert_eq!(ol_count_ball(o, 9.0, &mut obs, &mut pred), OlStatus::MissingCache);

        assert_eq!(ol_orbit_save(o, path.as_ptr()), OlStatus::Ok);
        let mut o2 = ptr::null_mut();
        assert_eq!(ol_orbit_load(path.as_ptr(), &mut o2), OlStatus::Ok);
        let mut len2 = 0;
        assert_eq!(ol_orbit_info(o2, &mut len2, &mut r), OlStatus::Ok);
        assert_eq!(len2, len);
        ol_orbit_free(o);
        ol_orbit_free(o2);

        let missing = CString::new(dir.path().join("none.wlc").to_str().unwrap()).unwrap();
        assert_eq!(ol_orbit_load(missing.as_ptr(), &mut o2), OlStatus::MissingCache);
        assert_eq!(ol_orbit_enumerate(3, 1, 4.0, &mut o2), OlStatus::InvalidInput);
        assert_eq!(ol_orbit_enumerate(0, 1, 1e3, &mut o2), OlStatus::Resource);
    }
}

#[test]
fn reduce_returns_word_and_point() {
    // m i = 2 + i/2, which reduces to 2i.
    let m = [1.0 / 2f64.sqrt(), 2.0 * 2f64.sqrt(), 0.0, 2f64.sqrt()];
    let (mut w, mut z) = ([0i64; 4], [0.0; 2]);
    assert_eq!(unsafe { ol_reduce(m.as_ptr(), w.as_mut_ptr(), z.as_mut_ptr()) }, OlStatus::Ok);
    assert!((z[0]).abs() < 1e-12 && (z[1] - 2.0).abs() < 1e-12, "{z:?}");
    assert_eq!(w[0] * w[3] - w[1] * w[2], 1);
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(ol_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/orbitlab.h")).unwrap();
    for sym in ["ol_group_new", "ol_count_ball", "ol_reduce", "OL_STATUS_OK", "typedef struct OlOrbit OlOrbit"] {
        assert!(h.contains(sym), "header lacks {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler on PATH; skipping");
        return;
    };
    assert!(cc.status.success());
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, "#include \"orbitlab.h\"\nint main(void) { OlGroup *g = 0; size_t n = 2; return ol_group_new(&n, 1, &g) == OL_STATUS_OK ? 0 : 1; }\n").unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
