use std::ffi::{CStr, CString};
use std::ptr;

use merisc_ffi::*;

const TINY: &str = r#"
[scene]
bs_rows = 2
bs_cols = 2
bs_position = [-2.0, 3.0, 2.5]
ris_rows = 2
ris_cols = 2
ris_width_m = 0.0857
ris_height_m = 0.0857
wall_width_m = 0.4
wall_height_m = 0.4
surface_origin = [0.0, 0.0, 2.0]
user_area = { x_min = -3.0, x_max = 3.0, y_min = 2.0, y_max = 6.0 }
min_separation_m = 0.5

[table]
bits = 1

[ga]
population_size = 12
max_iterations = 10

[scenario]
steps = 3
users = 2
"#;

fn write_config(dir: &tempfile::TempDir, text: &str) -> CString {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = merisc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn load_run_and_query() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(&dir, TINY);
    unsafe {
        let mut setup = ptr::null_mut();
        assert_eq!(merisc_setup_load(path.as_ptr(), 5, &mut setup), MeriscStatus::Ok);
        assert_eq!(merisc_setup_num_steps(setup), 3);
        assert_eq!(merisc_setup_num_users(setup), 2);
        assert_eq!(merisc_setup_num_patches(setup), 4);
        assert_eq!(merisc_setup_num_states(setup), 2);

        let mut run = ptr::null_mut();
        assert_eq!(merisc_run(setup, MeriscVariant::MeRisc, 5, &mut run), MeriscStatus::Ok);
        assert_eq!(merisc_run_num_steps(run), 3);
        let mean = merisc_run_mean_worst(run);
        let per_step: Vec<f64> = (0..3).map(|i| merisc_run_worst(run, i)).collect();
        assert!((mean - per_step.iter().sum::<f64>() / 3.0).abs() < 1e-12);
        assert!(merisc_run_worst(run, 3).is_nan());

        let mut states = [0u16; 4];
        let mut written = 0;
        assert_eq!(merisc_run_config(run, 1, states.as_mut_ptr(), 4, &mut written), MeriscStatus::Ok);
        assert_eq!(written, 4);
        let mut worst = 0.0;
        assert_eq!(merisc_setup_evaluate(setup, 2, states.as_ptr(), 4, &mut worst), MeriscStatus::Ok);
        assert_eq!(worst, per_step[1]);

        let csv = CString::new(dir.path().join("r.csv").to_str().unwrap()).unwrap();
        assert_eq!(merisc_run_write_csv(run, csv.as_ptr()), MeriscStatus::Ok);
        let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert_eq!(text.lines().filter(|l| l.contains(",me_risc,")).count(), 3);

        merisc_run_free(run);
        merisc_setup_free(setup);
    }
}

#[test]
fn errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut setup = ptr::null_mut();
        let bad = write_config(&dir, "[ga]\nfoo = 1\n");
        assert_eq!(merisc_setup_load(bad.as_ptr(), 1, &mut setup), MeriscStatus::ConfigError);
        assert!(setup.is_null());
        assert!(last_error().contains("foo"));

        assert_eq!(merisc_setup_load(ptr::null(), 1, &mut setup), MeriscStatus::NullPointer);

        let path = write_config(&dir, TINY);
        assert_eq!(merisc_setup_load(path.as_ptr(), 1, &mut setup), MeriscStatus::Ok);
        let mut worst = 0.0;
        let states = [1u16, 2, 3, 1];
        assert_eq!(merisc_setup_evaluate(setup, 1, states.as_ptr(), 4, &mut worst), MeriscStatus::InvalidArgument);
        assert!(last_error().contains("state 3"));
        assert_eq!(merisc_setup_evaluate(setup, 9, states.as_ptr(), 4, &mut worst), MeriscStatus::InvalidArgument);

        let mut run = ptr::null_mut();
        assert_eq!(merisc_run(setup, MeriscVariant::NoRis, 1, &mut run), MeriscStatus::Ok);
        let mut written = 0;
        let mut small = [0u16; 2];
        assert_eq!(merisc_run_config(run, 0, small.as_mut_ptr(), 2, &mut written), MeriscStatus::InvalidArgument);
        assert_eq!(written, 4);
        merisc_run_free(run);
        merisc_setup_free(setup);
    }
    assert_eq!(unsafe { merisc_run_num_steps(ptr::null()) }, 0);
    unsafe { merisc_setup_free(ptr::null_mut()) };
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(merisc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/merisc.h");
    let source = include_str!("../src/lib.rs");
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exports.len() >= 14);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct MeriscSetup MeriscSetup;"));
}
