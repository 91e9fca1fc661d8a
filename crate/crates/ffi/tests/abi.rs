use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use dschan_ffi::*;

fn last_error() -> String {
    let p = dschan_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut out = DschanTrialResult::default();
        assert_eq!(
            dschan_run_trial(ptr::null(), 1, &mut out),
            DschanStatus::NullPointer
        );
        assert!(last_error().contains("config"));
        let cfg = dschan_config_full_scale();
        assert_eq!(
            dschan_run_trial(cfg, 1, ptr::null_mut()),
            DschanStatus::NullPointer
        );
        assert_eq!(
            dschan_config_set_seed(ptr::null_mut(), 3),
            DschanStatus::NullPointer
        );
        dschan_config_free(cfg);
        dschan_config_free(ptr::null_mut());
    }
}

#[test]
fn invalid_settings_leave_the_handle_unchanged() {
    unsafe {
        let cfg = dschan_config_full_scale();
        assert_eq!(
            dschan_config_set_bem_order(cfg, 4),
            DschanStatus::InvalidParameter
        );
        assert!(last_error().contains("odd"));
        assert_eq!(
            dschan_config_set_pilot_groups(cfg, 500),
            DschanStatus::InvalidParameter
        );
        assert_eq!(dschan_config_set_antennas(cfg, 4), DschanStatus::Ok);
        let mut r = DschanTrialResult::default();
        assert_eq!(dschan_run_trial(cfg, 9, &mut r), DschanStatus::Ok);
        assert!(r.proposed_nmse_db < r.ls_nmse_db);
        assert!(r.has_smoothed && r.smoothed_nmse_db.is_finite());
        dschan_config_free(cfg);
    }
}

#[test]
fn trial_matches_the_rust_api() {
    unsafe {
        let cfg = dschan_config_full_scale();
        assert_eq!(dschan_config_set_antennas(cfg, 2), DschanStatus::Ok);
        assert_eq!(
            dschan_config_set_snr_db(cfg, f64::INFINITY),
            DschanStatus::Ok
        );
        let mut r = DschanTrialResult::default();
        assert_eq!(dschan_run_trial(cfg, 42, &mut r), DschanStatus::Ok);
        let native = dschan::harness::run_trial(
            &dschan::SystemConfig {
                antennas: 2,
                snr_db: None,
                ..dschan::SystemConfig::full_scale()
            },
            42,
        )
        .unwrap();
        assert_eq!(r.proposed_nmse_db, native.proposed_nmse_db);
        assert_eq!(r.support_hit, native.support_hit);
        dschan_config_free(cfg);
    }
}

#[test]
fn infeasible_recovery_maps_to_rank_deficient() {
    unsafe {
        // 32 selections from 24 measurements
        let cfg = dschan_config_desk_scale();
        let mut r = DschanTrialResult::default();
        assert_eq!(
            dschan_run_trial(cfg, 1, &mut r),
            DschanStatus::RankDeficient
        );
        assert!(last_error().contains("rank deficient"));
        dschan_config_free(cfg);
    }
}

#[test]
fn config_from_toml_and_clone() {
    let text = CString::new(
        "subcarriers = 128\npilot_groups = 12\ntaps = 8\nstrong_taps = 2\nbem_order = 3\n\
         antennas = 2\ndoppler_norm = 0.05\nsnr_db = 15.0\nseed = 4\n",
    )
    .unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(
            dschan_config_from_toml(text.as_ptr(), &mut cfg),
            DschanStatus::Ok
        );
        let copy = dschan_config_clone(cfg);
        dschan_config_free(cfg);
        let mut r = DschanTrialResult::default();
        assert_eq!(dschan_run_trial(copy, 1, &mut r), DschanStatus::Ok);
        dschan_config_free(copy);

        let bad = CString::new("subcarriers = \"many\"").unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(
            dschan_config_from_toml(bad.as_ptr(), &mut cfg),
            DschanStatus::Format
        );
        assert!(cfg.is_null());
    }
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let points = [10.0, 20.0];
    unsafe {
        let cfg = dschan_config_full_scale();
        assert_eq!(dschan_config_set_antennas(cfg, 2), DschanStatus::Ok);
        let status = dschan_run_sweep(
            cfg,
            DschanAxis::SnrDb,
            points.as_ptr(),
            points.len(),
            2,
            DschanPilotRule::Fixed,
            cpath.as_ptr(),
        );
        assert_eq!(status, DschanStatus::Ok);
        dschan_config_free(cfg);
    }
    let rows = dschan::harness::read_csv(&path).unwrap();
    assert_eq!(rows.len(), 6);
}

#[test]
fn verify_suite_passes() {
    let (mut passed, mut total) = (0usize, 0usize);
    assert_eq!(
        unsafe { dschan_verify(&mut passed, &mut total) },
        DschanStatus::Ok
    );
    assert!(total > 0);
    assert_eq!(passed, total);
}

#[test]
fn matrix_entry_points_round_trip() {
    // 4 x 3 matrix with orthogonal first two columns; third equals the first
    let (rows, cols) = (4usize, 3usize);
    let a_re = [1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0];
    let a_im = [0.0; 12];
    let mut mu = 0.0;
    unsafe {
        assert_eq!(
            dschan_mutual_coherence(a_re.as_ptr(), a_im.as_ptr(), rows, cols, &mut mu),
            DschanStatus::Ok
        );
    }
    assert!((mu - 1.0).abs() < 1e-15);

    let a_re = [
        1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0,
    ];
    // y = 2 * column 1 (real) and 3j * column 1
    let y_re: Vec<f64> = a_re[4..8].iter().map(|v| 2.0 * v).collect();
    let y_re = [y_re, vec![0.0; 4]].concat();
    let y_im = [vec![0.0; 4], a_re[4..8].iter().map(|v| 3.0 * v).collect()].concat();
    let (mut x_re, mut x_im) = (vec![0.0; cols * 2], vec![0.0; cols * 2]);
    let mut support = [usize::MAX];
    unsafe {
        let status = dschan_somp(
            a_re.as_ptr(),
            a_im.as_ptr(),
            rows,
            cols,
            y_re.as_ptr(),
            y_im.as_ptr(),
            2,
            1,
            x_re.as_mut_ptr(),
            x_im.as_mut_ptr(),
            support.as_mut_ptr(),
        );
        assert_eq!(status, DschanStatus::Ok);
    }
    assert_eq!(support, [1]);
    assert!((x_re[1] - 2.0).abs() < 1e-12 && (x_im[cols + 1] - 3.0).abs() < 1e-12);
    assert!(x_re[0].abs() < 1e-12 && x_re[2].abs() < 1e-12);

    unsafe {
        let status = dschan_somp(
            a_re.as_ptr(),
            a_im.as_ptr(),
            rows,
            cols,
            y_re.as_ptr(),
            y_im.as_ptr(),
            2,
            4,
            x_re.as_mut_ptr(),
            x_im.as_mut_ptr(),
            support.as_mut_ptr(),
        );
        assert_eq!(status, DschanStatus::InvalidParameter);
    }
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/dschan.h")
}

#[test]
fn header_declares_every_entry_point() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "dschan_last_error_message",
        "dschan_version",
        "dschan_config_desk_scale",
        "dschan_config_full_scale",
        "dschan_config_from_toml",
        "dschan_config_clone",
        "dschan_config_free",
        "dschan_config_set_snr_db",
        "dschan_config_set_block_selection",
        "dschan_run_trial",
        "dschan_run_sweep",
        "dschan_verify",
        "dschan_mutual_coherence",
        "dschan_somp",
        "typedef struct DschanConfig DschanConfig",
        "DSCHAN_STATUS_RANK_DEFICIENT = 5",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    // target/<profile>/deps/abi-<hash> -> target/<profile>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libdschan_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
