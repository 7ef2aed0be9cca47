//! Minimal library usage: solve the sine benchmark and print its error.

use mbfem::femspace::FemSpace;
use mbfem::integrators::{integrate, FixedPointParams, Method, SchemeContext, TimeGrid};
use mbfem::problem::{sine_benchmark, transform_problem};

fn main() -> mbfem::Result<()> {
    let (problem, exact) = sine_benchmark();
    let fixed = transform_problem(&problem);
    let space = FemSpace::uniform(32, 2)?;
    let grid = TimeGrid::with_delta(1e-3, 1.0)?;
    let ctx = SchemeContext::new(&space, &fixed, grid);
    let trajectory = integrate(&ctx, Method::CrankNicolson, &FixedPointParams::default())?;
    let error = mbfem::harness::error_l2_moving(
        &space,
        &trajectory.final_state()[0],
        |x, t| (exact.components[0].value)(x, t),
        &problem.motion,
        1.0,
    )?;
    println!("L2 error at T = 1: {error:.3e}");
    Ok(())
}
