use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use plfilter_ffi::*;

const SECTION_IV: &str = r#"{
    "dimension": 2,
    "objective": {"linear": {"c": [-4, -3], "d0": 36}},
    "constraints": [
        {"h": [3, 6], "d": -48}, {"h": [4, 2], "d": -32}, {"h": [1, 1], "d": -10},
        {"h": [-1, 0], "d": 0}, {"h": [0, -1], "d": 0}
    ]
}"#;

fn problem(doc: &str) -> *mut PlProblem {
    let json = CString::new(doc).unwrap();
    let mut p = ptr::null_mut();
    let st = unsafe { pl_problem_from_json(json.as_ptr(), &mut p) };
    assert_eq!(st, PlStatus::Ok);
    p
}

#[test]
fn lp_round_trip() {
    unsafe {
        let p = problem(SECTION_IV);
        assert_eq!(pl_problem_dimension(p), 2);
        let mut m = ptr::null_mut();
        assert_eq!(pl_mode_sum_from_problem(p, &mut m), PlStatus::Ok);
        assert_eq!(pl_mode_sum_len(m), 5);

        let mut r = PlMoments::default();
        assert_eq!(pl_mode_sum_eval(m, 1.0, &mut r), PlStatus::Ok);
        let z = 2.5 - (-2.0f64).exp() - 1.25 * (-4.0f64).exp() - 2.0 / 3.0 * (-12.0f64).exp()
            + 5.0 / 12.0 * (-36.0f64).exp();
        assert!((r.log_z - z.ln()).abs() < 1e-12);

        let mut grid = 0.0;
        assert_eq!(pl_brute_force_z(p, 1.0, 400, &mut grid), PlStatus::Ok);
        assert!((grid / z - 1.0).abs() < 1e-2);

        let mut s = ptr::null_mut();
        assert_eq!(pl_mode_sum_to_json(m, &mut s), PlStatus::Ok);
        let mut m2 = ptr::null_mut();
        assert_eq!(pl_mode_sum_from_json(s, &mut m2), PlStatus::Ok);
        let mut r2 = PlMoments::default();
        pl_mode_sum_eval(m2, 1.0, &mut r2);
        assert_eq!(r, r2);

        pl_string_free(s);
        pl_mode_sum_free(m2);
        pl_mode_sum_free(m);
        pl_problem_free(p);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let bad = CString::new(r#"{"objective": {"linear": {"c": [1]}}}"#).unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(pl_problem_from_json(bad.as_ptr(), &mut p), PlStatus::Schema);
        assert!(p.is_null());
        let msg = CStr::from_ptr(pl_last_error_message()).to_str().unwrap();
        assert!(msg.contains("dimension"), "{msg}");

        let empty = problem(
            r#"{"dimension": 1, "objective": {"linear": {"c": [1]}},
                "constraints": [{"h": [1], "d": 1}, {"h": [-1], "d": 1}]}"#,
        );
        let mut m = ptr::null_mut();
        assert_eq!(pl_mode_sum_from_problem(empty, &mut m), PlStatus::EmptyRegion);
        pl_problem_free(empty);

        let bb = problem(r#"{"dimension": 1, "objective": {"expression": "x1^2"}, "box": {"lower": [0], "upper": [1]}}"#);
        assert_eq!(pl_mode_sum_from_problem(bb, &mut m), PlStatus::Unsupported);
        pl_problem_free(bb);

        let bad_modes = CString::new(r#"{"modes": []}"#).unwrap();
        assert_eq!(pl_mode_sum_from_json(bad_modes.as_ptr(), &mut m), PlStatus::Schema);

        let mut r = PlMoments::default();
        assert_eq!(pl_mode_sum_eval(ptr::null(), 1.0, &mut r), PlStatus::NullPointer);
    }
}

#[test]
fn success_clears_last_error() {
    unsafe {
        let mut r = PlMoments::default();
        pl_mode_sum_eval(ptr::null(), 1.0, &mut r);
        assert!(!pl_last_error_message().is_null());
        let p = problem(SECTION_IV);
        assert!(pl_last_error_message().is_null());
        pl_problem_free(p);
        assert!(!CStr::from_ptr(pl_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/plfilter.h");
    assert!(header.exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ PlMoments m; PlProblem *p = 0; (void)m; \
             return pl_problem_dimension(p) == 0 ? PL_STATUS_OK : PL_STATUS_PANIC; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() {
        Ok(st) => assert!(st.success()),
        Err(_) => eprintln!("no C compiler found; header check skipped"),
    }
}
