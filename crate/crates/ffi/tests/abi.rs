use scri_ffi::*;
use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 512];
    unsafe { scri_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn numerical_and_exact_coefficients_agree() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(scri_medium_constant(&mut m), ScriStatus::Ok);
        let (mut re, mut im, mut cond) = (0.0, 0.0, 0.0);
        assert_eq!(scri_scattering_coefficient(m, ScriRoute::Characteristic, 12.0, 4, 48, &mut re, &mut im, &mut cond), ScriStatus::Ok);
        let (mut ere, mut eim) = (0.0, 0.0);
        assert_eq!(scri_exact_scattering_coefficient(m, 12.0, 4, &mut ere, &mut eim), ScriStatus::Ok);
        assert!((re - ere).hypot(im - eim) < 1e-10);
        assert!(cond >= 1.0);
        assert_eq!(scri_last_error_message(ptr::null_mut(), 0), 0);
        scri_medium_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(scri_medium_quadratic(-1.0, &mut m), ScriStatus::Domain);
        assert!(m.is_null());
        assert!(last_error().contains("κ"));

        assert_eq!(scri_medium_anisotropic(1.0, 0.8, 1.0, &mut m), ScriStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(scri_exact_scattering_coefficient(m, 2.0, 0, &mut re, &mut im), ScriStatus::Unsupported);
        scri_medium_free(m);

        let mut lin = ptr::null_mut();
        assert_eq!(scri_medium_linear(0.5, &mut lin), ScriStatus::Ok);
        let mut cond = 0.0;
        let st = scri_scattering_coefficient(lin, ScriRoute::Hyperbolic, 2.0, 0, 16, &mut re, &mut im, &mut cond);
        assert_eq!(st, ScriStatus::Config);
        assert!(last_error().contains("rate condition"));
        scri_medium_free(lin);

        assert_eq!(scri_exact_scattering_coefficient(ptr::null(), 2.0, 0, &mut re, &mut im), ScriStatus::NullPointer);
        assert_eq!(scri_medium_constant(ptr::null_mut()), ScriStatus::NullPointer);
    }
}

#[test]
fn truncated_error_messages_stay_terminated() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(scri_medium_linear(-3.0, &mut m), ScriStatus::Domain);
        let mut small = [1 as std::ffi::c_char; 8];
        let full = scri_last_error_message(small.as_mut_ptr(), small.len());
        assert!(full > 7);
        assert_eq!(small[7], 0);
        assert_eq!(CStr::from_ptr(small.as_ptr()).to_bytes().len(), 7);
    }
}

#[test]
fn far_field_handle_round_trip() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(scri_medium_constant(&mut m), ScriStatus::Ok);
        let mut far = ptr::null_mut();
        assert_eq!(scri_scatter_beam(m, ScriRoute::Characteristic, 2.0, 1.0, 0.5, 16, 32, &mut far), ScriStatus::Ok);
        let n = scri_far_field_len(far);
        assert_eq!(n, 32);
        let (mut t, mut re, mut im) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        assert_eq!(scri_far_field_values(far, n, t.as_mut_ptr(), re.as_mut_ptr(), im.as_mut_ptr()), ScriStatus::Ok);
        assert_eq!(t[0], 0.0);
        assert!(re.iter().zip(&im).any(|(a, b)| a.hypot(*b) > 1e-3));
        assert_eq!(scri_far_field_values(far, n - 1, t.as_mut_ptr(), ptr::null_mut(), ptr::null_mut()), ScriStatus::Config);
        assert_eq!(scri_far_field_len(ptr::null()), 0);
        scri_far_field_free(far);
        scri_far_field_free(ptr::null_mut());
        scri_medium_free(m);
    }
    let v = unsafe { CStr::from_ptr(scri_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test exe> → target/<profile>/libscri_ffi.a
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libscri_ffi.a");
    lib.is_file().then_some(lib)
}

#[test]
fn header_compiles_and_links_from_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let Some(lib) = static_lib() else {
        panic!("static library not found next to the test binary");
    };
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("rate condition"));
}
