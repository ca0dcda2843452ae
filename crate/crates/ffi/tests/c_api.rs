use std::ffi::{CStr, CString};
use std::ptr;

use robsched_ffi::*;

const TINY_A: &str = include_str!("../../core/fixtures/tiny_a.json");

fn tiny_a() -> *mut RsInstance {
    let json = CString::new(TINY_A).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { rs_instance_from_json(json.as_ptr(), &mut inst) }, RsCode::Ok);
    inst
}

fn tight() -> RsSolveParams {
    RsSolveParams { rel_gap: 1e-9, ..rs_solve_params_default() }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(rs_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn solve_compact_through_handles() {
    let inst = tiny_a();
    unsafe {
        assert_eq!(rs_instance_n(inst), 2);
        assert_eq!(rs_instance_horizon(inst), 4);
        let mut report = ptr::null_mut();
        let params = tight();
        assert_eq!(rs_solve(inst, RsMethod::Compact as i32, 1.0, &params, &mut report), RsCode::Ok);
        assert!((rs_report_objective(report) - 5.0).abs() < 1e-6);
        assert_eq!(rs_report_status(report), RsStatus::Optimal);
        let mut perm = [9usize; 2];
        assert_eq!(rs_report_ordering(report, perm.as_mut_ptr(), 2), RsCode::Ok);
        assert_eq!(perm, [0, 1]);
        assert_eq!(rs_report_ordering(report, perm.as_mut_ptr(), 1), RsCode::InvalidArgument);
        let json = rs_report_to_json(report);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap().to_string();
        assert!(text.contains("\"method\": \"compact\""));
        rs_string_free(json);
        rs_report_free(report);
        rs_instance_free(inst);
    }
}

#[test]
fn iterative_and_nominal_methods() {
    let inst = tiny_a();
    let params = tight();
    for (method, gamma, expected) in
        [(RsMethod::NominalLb, 0.0, 2.0), (RsMethod::NominalUb, 0.0, 7.0), (RsMethod::IterativeStr, 1.0, 5.0)]
    {
        let mut report = ptr::null_mut();
        unsafe {
            assert_eq!(rs_solve(inst, method as i32, gamma, &params, &mut report), RsCode::Ok);
            assert!((rs_report_objective(report) - expected).abs() < 1e-6, "{method:?}");
            rs_report_free(report);
        }
    }
    unsafe { rs_instance_free(inst) };
}

#[test]
fn evaluate_ordering_values() {
    let inst = tiny_a();
    let perm = [1usize, 0];
    let (mut lb, mut cont, mut disc) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(rs_evaluate(inst, perm.as_ptr(), 2, 1.0, ptr::null(), &mut lb, &mut cont, &mut disc), RsCode::Ok);
        assert_eq!((lb, cont, disc), (4.0, 6.0, 6.0));
        assert_eq!(rs_evaluate(inst, perm.as_ptr(), 2, 0.5, ptr::null(), &mut lb, &mut cont, &mut disc), RsCode::Ok);
        assert!(disc.is_nan());
        let bad = [0usize, 0];
        assert_eq!(
            rs_evaluate(inst, bad.as_ptr(), 2, 1.0, ptr::null(), &mut lb, &mut cont, &mut disc),
            RsCode::InvalidArgument
        );
        rs_instance_free(inst);
    }
}

#[test]
fn raw_arrays_and_generator() {
    let d = [1u32, 2];
    let lower = [4.0, 1.0, 3.0, 2.0, 2.0, 5.0, 1.0, 4.0];
    let hat = [1.0, 2.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0];
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(rs_instance_new(2, 4, d.as_ptr(), lower.as_ptr(), hat.as_ptr(), &mut inst), RsCode::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(rs_solve(inst, RsMethod::Compact as i32, 1.0, &tight(), &mut report), RsCode::Ok);
        assert!((rs_report_objective(report) - 5.0).abs() < 1e-6);
        rs_report_free(report);
        rs_instance_free(inst);

        // horizon too short for both activities
        let mut bad = ptr::null_mut();
        assert_eq!(rs_instance_new(2, 1, d.as_ptr(), lower.as_ptr(), hat.as_ptr(), &mut bad), RsCode::InvalidInstance);
        assert!(bad.is_null());

        let mut gen = ptr::null_mut();
        assert_eq!(rs_instance_generate(4, 11, &mut gen), RsCode::Ok);
        assert_eq!(rs_instance_n(gen), 4);
        rs_instance_free(gen);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(rs_instance_from_json(ptr::null(), &mut inst), RsCode::NullPointer);
        assert!(last_error().contains("null"));
        let garbage = CString::new("{").unwrap();
        assert_eq!(rs_instance_from_json(garbage.as_ptr(), &mut inst), RsCode::Format);
        assert!(!last_error().is_empty());
        let missing = CString::new("/nonexistent/instance.json").unwrap();
        assert_eq!(rs_instance_load(missing.as_ptr(), &mut inst), RsCode::Io);

        let tiny = tiny_a();
        let mut report = ptr::null_mut();
        assert_eq!(rs_solve(tiny, 42, 1.0, ptr::null(), &mut report), RsCode::InvalidArgument);
        assert!(last_error().contains("unknown method"));
        assert_eq!(rs_solve(tiny, RsMethod::Iterative as i32, 0.5, ptr::null(), &mut report), RsCode::InvalidArgument);
        assert_eq!(rs_solve(ptr::null(), RsMethod::Compact as i32, 1.0, ptr::null(), &mut report), RsCode::NullPointer);
        assert_eq!(rs_instance_n(tiny), 2);
        assert!(last_error().contains("null"));
        let perm = [0usize, 1];
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        assert_eq!(rs_evaluate(tiny, perm.as_ptr(), 2, 1.0, ptr::null(), &mut a, &mut b, &mut c), RsCode::Ok);
        assert_eq!(last_error(), "");
        assert!(rs_report_objective(ptr::null()).is_nan());
        assert_eq!(rs_report_status(ptr::null()), RsStatus::Error);
        rs_instance_free(ptr::null_mut());
        rs_report_free(ptr::null_mut());
        rs_instance_free(tiny);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(rs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/robsched.h")).unwrap();
    for name in [
        "rs_instance_load",
        "rs_instance_from_json",
        "rs_instance_new",
        "rs_instance_generate",
        "rs_instance_free",
        "rs_solve",
        "rs_report_objective",
        "rs_report_ordering",
        "rs_report_to_json",
        "rs_report_free",
        "rs_string_free",
        "rs_evaluate",
        "rs_last_error_message",
        "typedef struct RsInstance RsInstance",
        "RS_CODE_OK = 0",
        "RS_METHOD_COMPACT_STR = 3",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"robsched.h\"\nint main(void) { RsSolveParams p = rs_solve_params_default(); return (int)p.threads - 1 + (int)RS_METHOD_NOMINAL_LB; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
