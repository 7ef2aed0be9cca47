//! C ABI for the moving-boundary solver: opaque handles, status codes and
//! a thread-local last-error message. The header `include/mbfem.h` is
//! generated by cbindgen at build time.
//!
//! Ownership rules: every `*_new`-style constructor hands ownership of the
//! returned handle to the caller, to be released with the matching
//! `*_free`; getters never take ownership. All functions are safe to call
//! from multiple threads as long as each handle is used from one thread at
//! a time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mbfem::harness::{single_run, Experiment, RunReport};
use mbfem::integrators::{stability_limit, Method};
use mbfem::problem::{
    quartic_benchmark, sine_benchmark, skewed_quartic_benchmark, ExactSolution, MovingProblem,
};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbfemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolveFailed = 3,
    InternalPanic = 4,
}

/// Time integrator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbfemMethod {
    BackwardEuler = 0,
    CrankNicolson = 1,
    LinearizedCrankNicolson = 2,
}

impl From<MbfemMethod> for Method {
    fn from(m: MbfemMethod) -> Self {
        match m {
            MbfemMethod::BackwardEuler => Method::BackwardEuler,
            MbfemMethod::CrankNicolson => Method::CrankNicolson,
            MbfemMethod::LinearizedCrankNicolson => Method::LinearizedCrankNicolson,
        }
    }
}

/// Opaque handle to a problem definition plus its reference solution.
pub struct MbfemProblem {
    problem: MovingProblem,
    exact: ExactSolution,
}

/// Opaque handle to the outcome of one solve.
pub struct MbfemSolution {
    report: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).expect("NUL bytes stripped");
    });
}

/// Message describing the most recent failure on the calling thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mbfem_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mbfem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guarded<F: FnOnce() -> MbfemStatus>(f: F) -> MbfemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            MbfemStatus::InternalPanic
        }
    }
}

/// Create one of the built-in benchmark problems by name: "sine",
/// "quartic" or "quartic-skew". On success writes a handle the caller
/// owns and must release with [`mbfem_problem_free`].
///
/// # Safety
/// `name` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn mbfem_problem_builtin(
    name: *const c_char,
    out: *mut *mut MbfemProblem,
) -> MbfemStatus {
    if name.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MbfemStatus::NullPointer;
    }
    guarded(|| {
        let name = match unsafe { CStr::from_ptr(name) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_last_error("problem name is not valid UTF-8");
                return MbfemStatus::InvalidArgument;
            }
        };
        let built = match name {
            "sine" => sine_benchmark(),
            "quartic" => quartic_benchmark(),
            "quartic-skew" => skewed_quartic_benchmark(),
            other => {
                set_last_error(format!("unknown builtin problem `{other}`"));
                return MbfemStatus::InvalidArgument;
            }
        };
        let handle = Box::new(MbfemProblem {
            problem: built.0,
            exact: built.1,
        });
        unsafe { *out = Box::into_raw(handle) };
        MbfemStatus::Ok
    })
}

/// Release a problem handle. A null pointer is a no-op.
///
/// # Safety
/// `problem` must be null or a pointer obtained from
/// [`mbfem_problem_builtin`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn mbfem_problem_free(problem: *mut MbfemProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Largest stable time step of the method on the problem's boundary
/// motion.
///
/// # Safety
/// `problem` must be a live problem handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbfem_stability_limit(
    problem: *const MbfemProblem,
    method: MbfemMethod,
    out: *mut f64,
) -> MbfemStatus {
    if problem.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MbfemStatus::NullPointer;
    }
    guarded(|| {
        let p = unsafe { &*problem };
        unsafe { *out = stability_limit(method.into(), &p.problem.motion) };
        MbfemStatus::Ok
    })
}

/// Solve the problem on a uniform mesh and report errors against its
/// reference solution. `horizon <= 0` selects the problem's own horizon.
/// On success the caller owns the solution handle and must release it with
/// [`mbfem_solution_free`].
///
/// # Safety
/// `problem` must be a live problem handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbfem_solve(
    problem: *const MbfemProblem,
    method: MbfemMethod,
    degree: u32,
    elements: u32,
    delta: f64,
    horizon: f64,
    out: *mut *mut MbfemSolution,
) -> MbfemStatus {
    if problem.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MbfemStatus::NullPointer;
    }
    guarded(|| {
        let p = unsafe { &*problem };
        let mut exp = Experiment::new(
            p.problem.clone(),
            p.exact.clone(),
            degree as usize,
            method.into(),
        );
        if horizon > 0.0 {
            exp.horizon = Some(horizon);
        }
        match single_run(&exp, elements as usize, delta) {
            Ok(report) => {
                let handle = Box::new(MbfemSolution { report });
                unsafe { *out = Box::into_raw(handle) };
                MbfemStatus::Ok
            }
            Err(e) => {
                set_last_error(e.to_string());
                MbfemStatus::SolveFailed
            }
        }
    })
}

/// Release a solution handle. A null pointer is a no-op.
///
/// # Safety
/// `solution` must be null or a pointer obtained from [`mbfem_solve`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn mbfem_solution_free(solution: *mut MbfemSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

unsafe fn solution_field(
    solution: *const MbfemSolution,
    out: *mut f64,
    get: impl Fn(&RunReport) -> Option<f64>,
) -> MbfemStatus {
    if solution.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MbfemStatus::NullPointer;
    }
    let report = unsafe { &(*solution).report };
    match get(report) {
        Some(v) => {
            unsafe { *out = v };
            MbfemStatus::Ok
        }
        None => {
            set_last_error("equation index out of range");
            MbfemStatus::InvalidArgument
        }
    }
}

/// Number of equations in the solved system.
///
/// # Safety
/// `solution` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbfem_solution_equation_count(
    solution: *const MbfemSolution,
    out: *mut u32,
) -> MbfemStatus {
    if solution.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MbfemStatus::NullPointer;
    }
    unsafe { *out = (*solution).report.errors_l2.len() as u32 };
    MbfemStatus::Ok
}

/// L2 error of equation `equation` (0-based) on the moving domain at the
/// final time.
///
/// # Safety
/// `solution` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbfem_solution_l2_error(
    solution: *const MbfemSolution,
    equation: u32,
    out: *mut f64,
) -> MbfemStatus {
    unsafe {
        solution_field(solution, out, |r| {
            r.errors_l2.get(equation as usize).copied()
        })
    }
}

/// Largest interior-node error of equation `equation` (0-based) at the
/// final time.
///
/// # Safety
/// `solution` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbfem_solution_max_nodal_error(
    solution: *const MbfemSolution,
    equation: u32,
    out: *mut f64,
) -> MbfemStatus {
    unsafe {
        solution_field(solution, out, |r| {
            r.max_nodal.get(equation as usize).copied()
        })
    }
}

/// Wall-clock milliseconds spent assembling and integrating.
///
/// # Safety
/// `solution` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbfem_solution_cpu_ms(
    solution: *const MbfemSolution,
    out: *mut f64,
) -> MbfemStatus {
    unsafe { solution_field(solution, out, |r| Some(r.cpu_ms)) }
}

/// Total inner fixed-point iterations across all steps (0 for the
/// linearized scheme).
///
/// # Safety
/// `solution` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mbfem_solution_iterations(
    solution: *const MbfemSolution,
    out: *mut u64,
) -> MbfemStatus {
    if solution.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MbfemStatus::NullPointer;
    }
    unsafe { *out = (*solution).report.total_iterations as u64 };
    MbfemStatus::Ok
}
