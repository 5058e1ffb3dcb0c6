use std::ffi::CStr;
use std::ptr;

use liqshock_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(lqs_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn solve_and_read_back() {
    unsafe {
        let params = lqs_params_reference();
        let mut sol = ptr::null_mut();
        let st = lqs_solve(params, LqsScheme::Linear, LqsGrid::Uniform, 0.0, 30, &mut sol);
        assert_eq!(st, LqsStatus::Ok, "{}", last_error());
        assert_eq!(last_error(), "");
        let n = lqs_solution_len(sol);
        assert_eq!(n, 31);

        let mut nodes = vec![0.0; n];
        assert_eq!(lqs_solution_copy(sol, LqsField::Nodes, nodes.as_mut_ptr(), n), LqsStatus::Ok);
        assert_eq!((nodes[0], nodes[30]), (0.0, 5.0));

        let mut r0 = 0.0;
        let mut r1 = 0.0;
        assert_eq!(lqs_solution_value_at(sol, false, 2.0, &mut r0), LqsStatus::Ok);
        assert_eq!(lqs_solution_value_at(sol, true, 2.0, &mut r1), LqsStatus::Ok);
        assert!((r0 - 0.24310211555697078).abs() < 1e-12, "{r0}");
        assert!((r1 - 0.23158650865353136).abs() < 1e-12, "{r1}");

        let mut short = vec![0.0; n - 1];
        let st = lqs_solution_copy(sol, LqsField::PriceLiquid, short.as_mut_ptr(), n - 1);
        assert_eq!(st, LqsStatus::InvalidArgument);
        assert!(last_error().contains("buffer"));

        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        lqs_solution_copy(sol, LqsField::PriceLiquid, p.as_mut_ptr(), n);
        lqs_solution_copy(sol, LqsField::PriceIlliquid, q.as_mut_ptr(), n);
        assert!(p.iter().zip(&q).all(|(a, b)| a.is_finite() && b.is_finite()));
        assert!(p[30] > p[0]);

        lqs_solution_free(sol);
        lqs_params_free(params);
    }
}

#[test]
fn invalid_parameters_are_reported() {
    unsafe {
        let mut params = ptr::null_mut();
        let st = lqs_params_new(-0.3, 0.06, 1.0, 1.0, 12.0, 2.0, 1.0, 0.0, 5.0, &mut params);
        assert_eq!(st, LqsStatus::InvalidArgument);
        assert!(params.is_null());
        assert!(last_error().contains("sigma"), "{}", last_error());

        let st = lqs_params_new(0.3, 0.06, 1.0, 1.0, 12.0, 2.0, 1.0, 0.0, 5.0, &mut params);
        assert_eq!(st, LqsStatus::Ok);
        let mut sol = ptr::null_mut();
        let st = lqs_solve(params, LqsScheme::Linear, LqsGrid::Uniform, 0.0, 1, &mut sol);
        assert_eq!(st, LqsStatus::InvalidArgument);
        assert!(sol.is_null());
        lqs_params_free(params);
    }
}

#[test]
fn null_handles() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(lqs_f_values(ptr::null(), 0.0, &mut out, &mut out), LqsStatus::NullPointer);
        assert_eq!(lqs_solution_len(ptr::null()), 0);
        lqs_solution_free(ptr::null_mut());
        lqs_params_free(ptr::null_mut());
    }
}

#[test]
fn closed_form_values() {
    unsafe {
        let params = lqs_params_reference();
        let (mut f0, mut f1) = (0.0, 0.0);
        assert_eq!(lqs_f_values(params, 1.0, &mut f0, &mut f1), LqsStatus::Ok);
        assert_eq!((f0, f1), (1.0, 1.0));
        assert_eq!(lqs_f_values(params, 0.0, &mut f0, &mut f1), LqsStatus::Ok);
        assert!(f0 > 0.0 && f0 < 1.0 && f1 > 0.0 && f1 < 1.0, "{f0} {f1}");
        assert_eq!(lqs_f_values(params, 2.0, &mut f0, &mut f1), LqsStatus::InvalidArgument);
        lqs_params_free(params);
    }
}

#[test]
fn richardson_combination() {
    let mut y = 0.0;
    assert_eq!(unsafe { lqs_richardson(1.0, 1.5, 1, &mut y) }, LqsStatus::Ok);
    assert_eq!(y, 2.0);
    assert_eq!(unsafe { lqs_richardson(1.0, 1.5, 0, &mut y) }, LqsStatus::InvalidArgument);
}

#[test]
fn convergence_values_per_level() {
    unsafe {
        let params = lqs_params_reference();
        let levels = [30usize, 60];
        let mut r0 = [0.0; 2];
        let mut r1 = [0.0; 2];
        let st = lqs_convergence_values(
            params,
            LqsScheme::Linearized,
            LqsGrid::Uniform,
            0.0,
            levels.as_ptr(),
            2,
            r0.as_mut_ptr(),
            r1.as_mut_ptr(),
        );
        assert_eq!(st, LqsStatus::Ok, "{}", last_error());
        assert!((r0[0] - 0.24315245002257743).abs() < 1e-12);
        assert!((r1[0] - 0.23101391088962758).abs() < 1e-12);

        let bad = [30usize, 50];
        let st = lqs_convergence_values(
            params,
            LqsScheme::Linear,
            LqsGrid::Uniform,
            0.0,
            bad.as_ptr(),
            2,
            r0.as_mut_ptr(),
            r1.as_mut_ptr(),
        );
        assert_eq!(st, LqsStatus::InvalidArgument);
        lqs_params_free(params);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(lqs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/liqshock.h")).unwrap();
    for sym in [
        "lqs_last_error_message",
        "lqs_params_reference",
        "lqs_params_new",
        "lqs_params_free",
        "lqs_f_values",
        "lqs_richardson",
        "lqs_solve",
        "lqs_solution_len",
        "lqs_solution_restriction_violations",
        "lqs_solution_copy",
        "lqs_solution_value_at",
        "lqs_solution_free",
        "lqs_convergence_values",
        "lqs_version",
        "typedef struct LqsParams LqsParams",
        "typedef struct LqsSolution LqsSolution",
        "LQS_STATUS_PANIC = 5",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}
