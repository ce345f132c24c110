use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use critwalk_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cw_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn tree_round_trip_through_handles() {
    unsafe {
        let mut rng = ptr::null_mut();
        assert_eq!(cw_rng_new(9, &mut rng), CwStatus::Ok);
        for uniform in [0, 1] {
            let mut tree = ptr::null_mut();
            assert_eq!(cw_tree_sample(rng, 200, uniform, &mut tree), CwStatus::Ok);
            assert_eq!(cw_tree_vertex_count(tree), 200);

            let mut needed = 0usize;
            assert_eq!(
                cw_tree_search_depth(tree, ptr::null_mut(), 0, &mut needed),
                CwStatus::BufferTooSmall
            );
            let mut buf = vec![0u32; needed];
            assert_eq!(
                cw_tree_search_depth(tree, buf.as_mut_ptr(), buf.len(), &mut needed),
                CwStatus::Ok
            );

            let mut back = ptr::null_mut();
            assert_eq!(
                cw_tree_from_search_depth(buf.as_ptr(), buf.len(), &mut back),
                CwStatus::Ok
            );
            let mut again = vec![0u32; needed];
            assert_eq!(
                cw_tree_search_depth(back, again.as_mut_ptr(), again.len(), &mut needed),
                CwStatus::Ok
            );
            assert_eq!(buf, again);

            let mut e = 0.0;
            assert_eq!(cw_tree_expected_exit_time(tree, &mut e), CwStatus::Ok);
            assert!((e - 200.0).abs() < 1e-9);
            let mut s = 0u64;
            assert_eq!(cw_tree_sample_exit_time(tree, rng, &mut s), CwStatus::Ok);
            assert!(s >= 1);
            cw_tree_free(back);
            cw_tree_free(tree);
        }
        cw_rng_free(rng);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut x = 0.0;
        assert_eq!(cw_cluster_size_laplace(0.5, 0.0, &mut x), CwStatus::Ok);
        assert!((x - 1.0).abs() < 1e-12);
        assert_eq!(cw_cluster_size_laplace(0.9, 1.0, &mut x), CwStatus::InvalidArgument);
        assert!(last_error().contains("p <= 1/2"));
        assert_eq!(
            cw_cluster_size_laplace(0.5, 1.0, ptr::null_mut()),
            CwStatus::NullPointer
        );
        assert_eq!(last_error(), "out is null");

        let mut tree = ptr::null_mut();
        assert_eq!(cw_tree_sample(ptr::null_mut(), 10, 0, &mut tree), CwStatus::NullPointer);
        let bad = [0u32, 5, 0];
        assert_eq!(
            cw_tree_from_search_depth(bad.as_ptr(), bad.len(), &mut tree),
            CwStatus::InvalidCurve
        );
        assert!(tree.is_null());

        let mut rng = ptr::null_mut();
        cw_rng_new(1, &mut rng);
        assert_eq!(
            cw_sample_inverse_gaussian(rng, -1.0, 0.0, 1.0, &mut x),
            CwStatus::InvalidArgument
        );
        assert_eq!(cw_sample_inverse_gaussian(rng, 1.0, 1.0, 1.0, &mut x), CwStatus::Ok);
        assert!(x > 0.0);
        cw_rng_free(rng);

        let mut report = ptr::null_mut();
        assert_eq!(cw_verify(99, 1, 0, &mut report), CwStatus::Config);
        assert_eq!(cw_report_passed(ptr::null()), 0);
        assert!(cw_report_json(ptr::null()).is_null());
        cw_tree_free(ptr::null_mut());
        cw_rng_free(ptr::null_mut());
    }
}

#[test]
fn verify_returns_a_json_report() {
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(cw_verify(10, 3, 50, &mut report), CwStatus::Ok);
        assert_eq!(cw_report_passed(report), 1);
        let json = CStr::from_ptr(cw_report_json(report)).to_str().unwrap();
        assert!(json.contains("\"experiment_id\": \"criterion-10\""));
        cw_report_free(report);
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/critwalk.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "CW_STATUS_BUFFER_TOO_SMALL",
        "typedef struct CwTree CwTree;",
        "cw_verify(",
        "cw_last_error(void)",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
