//! The C ABI exercised from Rust, plus a C program built against the
//! generated header and the static library.

use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bh_complexity_ffi::*;

fn params(t: f64, mu: f64) -> BhcParams {
    BhcParams {
        d: 2,
        extents: [12, 12, 0],
        n: 6,
        t,
        mu_bar: mu,
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bhc_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn meanfield_handle_round_trip() {
    let p = params(0.2, 0.4);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { bhc_meanfield_solve(&p, &mut h) }, BhcStatus::Ok);
    let direct = bh_complexity::onsite::self_consistent_phi(
        &bh_complexity::onsite::ModelParams::cubic(2, 12, 6, 0.2, 0.4).unwrap(),
    )
    .unwrap();
    unsafe {
        assert_eq!(bhc_meanfield_phi(h), direct.phi);
        assert_eq!(bhc_meanfield_free_energy(h), direct.free_energy);
        assert_eq!(bhc_meanfield_levels(h), 6);
        let mut buf = [0.0; 6];
        assert_eq!(bhc_meanfield_energies(h, buf.as_mut_ptr(), 6), BhcStatus::Ok);
        assert_eq!(&buf[..], &direct.energies[..]);
        let mut small = [0.0; 2];
        assert_eq!(bhc_meanfield_energies(h, small.as_mut_ptr(), 2), BhcStatus::InvalidArgument);
        bhc_meanfield_free(h);
        bhc_meanfield_free(ptr::null_mut());
        assert!(bhc_meanfield_phi(ptr::null()).is_nan());
    }
}

#[test]
fn report_accessors() {
    let p = params(0.2, 0.4);
    let ks = [1.0, 2.0];
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { bhc_complexity(&p, ks.as_ptr(), 2, &mut r) }, BhcStatus::Ok);
    unsafe {
        assert_eq!(bhc_report_num_kappas(r), 2);
        let (mut c2, mut qc, mut dens) = (0.0, 0.0, 0.0);
        assert_eq!(bhc_report_total(r, 1, &mut c2), BhcStatus::Ok);
        assert_eq!(bhc_report_c_qc(r, &mut qc), BhcStatus::Ok);
        assert!((qc * qc - c2).abs() <= 1e-12 * c2);
        assert_eq!(bhc_report_density(r, 1, &mut dens), BhcStatus::Ok);
        assert!((dens * 144.0 - c2).abs() <= 1e-12 * c2);
        assert_eq!(bhc_report_density(r, 7, &mut dens), BhcStatus::InvalidArgument);
        assert_eq!(bhc_report_zero_modes(r), 1);
        assert!(bhc_report_min_omega(r) > 0.0);
        bhc_report_free(r);
    }

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { bhc_complexity(&p, ks.as_ptr(), 1, &mut r) }, BhcStatus::Ok);
    let mut qc = 0.0;
    assert_eq!(unsafe { bhc_report_c_qc(r, &mut qc) }, BhcStatus::Domain);
    unsafe { bhc_report_free(r) };
}

#[test]
fn error_codes_and_messages() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { bhc_meanfield_solve(ptr::null(), &mut h) }, BhcStatus::NullPointer);
    assert!(last_error().contains("params"));

    let mut bad = params(0.2, 0.4);
    bad.n = 1;
    assert_eq!(unsafe { bhc_meanfield_solve(&bad, &mut h) }, BhcStatus::InvalidArgument);
    assert!(last_error().contains("truncation"));

    bad = params(0.2, 0.4);
    bad.d = 4;
    assert_eq!(unsafe { bhc_meanfield_solve(&bad, &mut h) }, BhcStatus::InvalidArgument);
    assert!(h.is_null());

    let p = params(0.2, 0.4);
    assert_eq!(unsafe { bhc_meanfield_solve(&p, &mut h) }, BhcStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe { bhc_meanfield_free(h) };

    let mut out = 0.0;
    assert_eq!(unsafe { bhc_c_closed_form(0.5, 1.0, 3, 2.5, &mut out) }, BhcStatus::Domain);
}

#[test]
fn scalar_functions() {
    let (mut t, mut mu) = (0.0, 0.0);
    assert_eq!(unsafe { bhc_locate_tip(&params(0.1, 0.5), 1, &mut t, &mut mu) }, BhcStatus::Ok);
    assert!((t - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-4);
    assert!((mu - (2f64.sqrt() - 1.0)).abs() < 1e-4);

    let (mut cf, mut q) = (0.0, 0.0);
    assert_eq!(unsafe { bhc_c_closed_form(0.3, 1.0, 2, 1.0, &mut cf) }, BhcStatus::Ok);
    assert_eq!(unsafe { bhc_c_kappa_quadrature(0.3, 1.0, 2, 1.0, &mut q) }, BhcStatus::Ok);
    assert!(((cf - q) / q).abs() < 1e-8);

    let mut dc = 0.0;
    assert_eq!(unsafe { bhc_cv_delta(2, 1.0, 1.0, 1.0, 10.0, 0.5, &mut dc) }, BhcStatus::Ok);
    assert!(dc > 0.0);
    let v = unsafe { CStr::from_ptr(bhc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn c_program_against_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = crate_dir.join("include");
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libbh_complexity_ffi.a");
    assert!(lib.exists(), "static library at {}", lib.display());

    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("smoke.c");
    let exe = tmp.join("smoke");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <math.h>
#include "bh_complexity.h"

int main(void) {
    BhcParams p = {2, {10, 10, 0}, 6, 0.2, 0.4};
    double ks[2] = {1.0, 2.0};
    BhcReport *r = NULL;
    if (bhc_complexity(&p, ks, 2, &r) != BHC_STATUS_OK) return 1;
    double c2 = 0.0, qc = 0.0;
    if (bhc_report_total(r, 1, &c2) != BHC_STATUS_OK) return 2;
    if (bhc_report_c_qc(r, &qc) != BHC_STATUS_OK) return 3;
    bhc_report_free(r);
    if (fabs(qc * qc - c2) > 1e-12 * c2) return 4;
    p.n = 1;
    BhcMeanField *m = NULL;
    if (bhc_meanfield_solve(&p, &m) != BHC_STATUS_INVALID_ARGUMENT) return 5;
    if (bhc_last_error_message()[0] == '\0') return 6;
    printf("%.6f\n", c2);
    return 0;
}
"#,
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile/link failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exit {:?}", out.status.code());
    let c2: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(c2 > 0.0);
}
