//! Exercise the C ABI exactly as a foreign caller would: raw pointers,
//! status codes, explicit frees.

use std::ffi::CStr;
use std::ptr;

use mbfem_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mbfem_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn solve_builtin_problem_through_the_abi() {
    unsafe {
        let mut problem: *mut MbfemProblem = ptr::null_mut();
        let status = mbfem_problem_builtin(c"sine".as_ptr(), &mut problem);
        assert_eq!(status, MbfemStatus::Ok);
        assert!(!problem.is_null());

        let mut limit = 0.0;
        let status = mbfem_stability_limit(problem, MbfemMethod::BackwardEuler, &mut limit);
        assert_eq!(status, MbfemStatus::Ok);
        assert_eq!(limit, 0.25);

        let mut solution: *mut MbfemSolution = ptr::null_mut();
        let status = mbfem_solve(
            problem,
            MbfemMethod::LinearizedCrankNicolson,
            2,
            8,
            0.01,
            0.1,
            &mut solution,
        );
        assert_eq!(status, MbfemStatus::Ok, "solve failed: {}", last_error());

        let mut count = 0u32;
        assert_eq!(
            mbfem_solution_equation_count(solution, &mut count),
            MbfemStatus::Ok
        );
        assert_eq!(count, 2);

        for eq in 0..count {
            let mut l2 = f64::NAN;
            let mut nodal = f64::NAN;
            assert_eq!(
                mbfem_solution_l2_error(solution, eq, &mut l2),
                MbfemStatus::Ok
            );
            assert_eq!(
                mbfem_solution_max_nodal_error(solution, eq, &mut nodal),
                MbfemStatus::Ok
            );
            assert!(l2.is_finite() && l2 > 0.0 && l2 < 1e-2);
            assert!(nodal.is_finite() && nodal < 1e-2);
        }

        let mut iterations = u64::MAX;
        assert_eq!(
            mbfem_solution_iterations(solution, &mut iterations),
            MbfemStatus::Ok
        );
        assert_eq!(iterations, 0); // linearized scheme has no inner loop

        let mut cpu = 0.0;
        assert_eq!(mbfem_solution_cpu_ms(solution, &mut cpu), MbfemStatus::Ok);
        assert!(cpu >= 0.0);

        mbfem_solution_free(solution);
        mbfem_problem_free(problem);
    }
}

#[test]
fn error_paths_report_status_and_message() {
    unsafe {
        // unknown problem name
        let mut problem: *mut MbfemProblem = ptr::null_mut();
        let status = mbfem_problem_builtin(c"no-such-problem".as_ptr(), &mut problem);
        assert_eq!(status, MbfemStatus::InvalidArgument);
        assert!(last_error().contains("no-such-problem"));
        assert!(problem.is_null());

        // null out pointer
        let status = mbfem_problem_builtin(c"sine".as_ptr(), ptr::null_mut());
        assert_eq!(status, MbfemStatus::NullPointer);

        // degenerate discretization surfaces as a solve failure
        let mut ok_problem: *mut MbfemProblem = ptr::null_mut();
        assert_eq!(
            mbfem_problem_builtin(c"quartic".as_ptr(), &mut ok_problem),
            MbfemStatus::Ok
        );
        let mut solution: *mut MbfemSolution = ptr::null_mut();
        let status = mbfem_solve(
            ok_problem,
            MbfemMethod::CrankNicolson,
            0, // invalid degree
            8,
            0.01,
            0.1,
            &mut solution,
        );
        assert_eq!(status, MbfemStatus::SolveFailed);
        assert!(solution.is_null());

        // equation index out of range
        let status = mbfem_solve(
            ok_problem,
            MbfemMethod::BackwardEuler,
            1,
            4,
            0.05,
            0.1,
            &mut solution,
        );
        assert_eq!(status, MbfemStatus::Ok, "{}", last_error());
        let mut v = 0.0;
        assert_eq!(
            mbfem_solution_l2_error(solution, 7, &mut v),
            MbfemStatus::InvalidArgument
        );

        mbfem_solution_free(solution);
        mbfem_problem_free(ok_problem);

        // frees tolerate null
        mbfem_problem_free(ptr::null_mut());
        mbfem_solution_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_exists_and_declares_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("mbfem.h");
    let text = std::fs::read_to_string(&header).expect("cbindgen header present");
    for symbol in [
        "mbfem_problem_builtin",
        "mbfem_solve",
        "mbfem_solution_l2_error",
        "mbfem_last_error_message",
        "MbfemStatus",
        "MbfemMethod",
    ] {
        assert!(text.contains(symbol), "header misses {symbol}");
    }
    // handles stay opaque
    assert!(text.contains("typedef struct MbfemProblem MbfemProblem;"));
    assert!(text.contains("typedef struct MbfemSolution MbfemSolution;"));
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(mbfem_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
