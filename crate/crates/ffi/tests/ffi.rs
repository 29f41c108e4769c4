use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use gl2rep_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(gl2_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn coset_and_induced_counts() {
    let mut out = 0usize;
    for (n, expected) in [(1, 6), (2, 14), (3, 22), (4, 30)] {
        assert_eq!(gl2_double_coset_count(5, n, &mut out), Gl2Status::Ok);
        assert_eq!(out, expected);
    }
    assert_eq!(gl2_induced_dim(5, 2, 2, &mut out), Gl2Status::Ok);
    assert_eq!(out, 90);
    assert_eq!(gl2_double_coset_count(4, 1, &mut out), Gl2Status::Domain);
    assert!(!last_error().is_empty());
    assert_eq!(gl2_double_coset_count(5, 1, ptr::null_mut()), Gl2Status::NullPointer);
}

#[test]
fn truncation_handle_lifecycle() {
    let mut h: *mut Gl2PiTruncation = ptr::null_mut();
    assert_eq!(gl2_pi_truncation_new(5, 1, 1, 0, 2, 0, &mut h), Gl2Status::Ok);
    assert!(!h.is_null());
    let mut out = 0usize;
    assert_eq!(gl2_pi_truncation_dim(h, &mut out), Gl2Status::Ok);
    assert_eq!(out, 60);
    assert_eq!(gl2_pi_truncation_bar_r_dim(h, 1, &mut out), Gl2Status::Ok);
    assert_eq!(out, 12);
    assert_eq!(gl2_invariant_dim(h, Gl2Family::Kn, 1, 7, &mut out), Gl2Status::Ok);
    assert_eq!(out, 6);
    assert_eq!(gl2_invariant_dim(h, Gl2Family::Kn, 2, 7, &mut out), Gl2Status::Domain);
    assert_eq!(gl2_invariant_dim(h, Gl2Family::H, 0, 7, &mut out), Gl2Status::Unsupported);
    assert_eq!(gl2_pi_truncation_bar_r_dim(h, 9, &mut out), Gl2Status::Domain);
    unsafe { gl2_pi_truncation_free(h) };
    unsafe { gl2_pi_truncation_free(ptr::null_mut()) };
    assert_eq!(gl2_pi_truncation_new(5, 1, 1, 0, 2, 3, &mut h), Gl2Status::Precision);
    assert_eq!(gl2_pi_truncation_dim(ptr::null(), &mut out), Gl2Status::NullPointer);
}

#[test]
fn matrices() {
    let data = [1u32, 1, 0, 1];
    let mut m: *mut Gl2Matrix = ptr::null_mut();
    assert_eq!(unsafe { gl2_matrix_new(5, 2, 2, data.as_ptr(), &mut m) }, Gl2Status::Ok);
    let (mut rank, mut nullity, mut h0, mut h1) = (0usize, 0usize, 0usize, 0usize);
    assert_eq!(gl2_matrix_rank(m, &mut rank), Gl2Status::Ok);
    assert_eq!(gl2_matrix_nullity(m, &mut nullity), Gl2Status::Ok);
    assert_eq!((rank, nullity), (2, 0));
    assert_eq!(gl2_zp_cohomology(m, &mut h0, &mut h1), Gl2Status::Ok);
    assert_eq!((h0, h1), (1, 1));
    unsafe { gl2_matrix_free(m) };
    let diag = [2u32, 0, 0, 1];
    assert_eq!(unsafe { gl2_matrix_new(5, 2, 2, diag.as_ptr(), &mut m) }, Gl2Status::Ok);
    assert_eq!(gl2_zp_cohomology(m, &mut h0, &mut h1), Gl2Status::Domain);
    unsafe { gl2_matrix_free(m) };
    assert_eq!(unsafe { gl2_matrix_new(5, 2, 2, ptr::null(), &mut m) }, Gl2Status::NullPointer);
    assert_eq!(unsafe { gl2_matrix_new(6, 1, 1, data.as_ptr(), &mut m) }, Gl2Status::Domain);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(gl2_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn find_tool(name: &str) -> bool {
    Command::new(name).arg("--version").output().is_ok()
}

/// Compiles a C program against the generated header and links the static
/// library built alongside this test.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("gl2rep.h").exists(), "header not generated");
    if !find_tool("cc") {
        eprintln!("no C compiler available; header presence checked only");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libgl2rep_ffi.a");
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "gl2rep.h"
int main(void) {
    size_t out = 0;
    if (gl2_double_coset_count(5, 3, &out) != GL2_STATUS_OK || out != 22) return 1;
    Gl2PiTruncation *h = NULL;
    if (gl2_pi_truncation_new(5, 1, 0, 0, 2, 0, &h) != GL2_STATUS_OK) return 2;
    if (gl2_pi_truncation_dim(h, &out) != GL2_STATUS_OK || out != 60) return 3;
    gl2_pi_truncation_free(h);
    if (gl2_double_coset_count(9, 1, &out) == GL2_STATUS_OK) return 4;
    printf("%s\n", gl2_last_error_message());
    return 0;
}
"#,
    )
    .unwrap();
    let status = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile");
    if !lib.exists() {
        eprintln!("static library not found at {}; skipped link step", lib.display());
        return;
    }
    let bin = tmp.join("smoke");
    let status = Command::new("cc")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).contains("prime"));
}
