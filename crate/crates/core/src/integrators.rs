//! Fully discrete time stepping for the transformed system: backward
//! Euler and Crank-Nicolson with a fixed-point resolution of the nonlocal
//! coefficient, and a linearized Crank-Nicolson multistep scheme.
//!
//! With `M` the mass matrix, `A` the stiffness matrix and `B(t)` the
//! advection matrix, one backward Euler step solves
//!
//! ```text
//! (M + d b2 a_i A - d B) V_i = M V_i_prev + d G_i
//! ```
//!
//! per equation, with `a_i` evaluated at the nonlocal values of the new
//! iterate and resolved by freezing it, solving, and repeating until the
//! coefficient change drops below tolerance. The Crank-Nicolson step does
//! the same around the interval midpoint with `d/2` factors. The
//! linearized variant replaces the fixed point by the extrapolation
//! `1.5 V(n-1) - 0.5 V(n-2)` inside `a_i`, at the cost of a
//! predictor-corrector start-up for the first step.

use std::time::{Duration, Instant};

use crate::femspace::{solve_banded, BandedMatrix, CoefVector, FemSpace};
use crate::geometry::BoundaryMotion;
use crate::problem::FixedProblem;
use crate::{Error, Result};

/// Time integrator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BackwardEuler,
    CrankNicolson,
    LinearizedCrankNicolson,
}

impl Method {
    pub const ALL: [Method; 3] = [
        Method::BackwardEuler,
        Method::CrankNicolson,
        Method::LinearizedCrankNicolson,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::BackwardEuler => "euler",
            Method::CrankNicolson => "cn",
            Method::LinearizedCrankNicolson => "lcn",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Method::BackwardEuler),
            "cn" => Ok(Method::CrankNicolson),
            "lcn" => Ok(Method::LinearizedCrankNicolson),
            other => Err(Error::Config {
                key: "method".to_string(),
                message: format!("unknown method `{other}` (expected euler, cn or lcn)"),
            }),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Uniform partition of `[0, horizon]` into `step_count` steps.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    delta: f64,
    step_count: usize,
    horizon: f64,
}

impl TimeGrid {
    pub fn new(step_count: usize, horizon: f64) -> Result<Self> {
        if step_count == 0 || !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "need step_count >= 1 and horizon > 0, got {step_count} and {horizon}"
            )));
        }
        Ok(Self {
            delta: horizon / step_count as f64,
            step_count,
            horizon,
        })
    }

    /// Grid from a requested step size; `horizon / delta` must be an
    /// integer up to rounding noise, and the stored step is recomputed so
    /// `delta * step_count == horizon` exactly.
    pub fn with_delta(delta: f64, horizon: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 || !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "need delta > 0 and horizon > 0, got {delta} and {horizon}"
            )));
        }
        let ratio = horizon / delta;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-6 * n.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon {horizon} is not an integer multiple of delta {delta}"
            )));
        }
        Self::new(n as usize, horizon)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Time level `t_n`.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.step_count {
            self.horizon
        } else {
            self.delta * n as f64
        }
    }

    /// Midpoint of step `n`, between levels `n` and `n + 1`.
    pub fn midpoint(&self, n: usize) -> f64 {
        self.delta * (n as f64 + 0.5)
    }
}

/// Inner fixed-point controls.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointParams {
    /// Stop once the max-norm coefficient change drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 50,
        }
    }
}

/// Diagnostics for one time step.
#[derive(Debug, Clone, Default)]
pub struct StepReport {
    /// Linear solves performed by the inner iteration (0 for the
    /// linearized scheme).
    pub iterations: usize,
    /// Max-norm change of the last inner iteration.
    pub final_residual: f64,
    /// Max-norm change after every inner iteration.
    pub iterate_distances: Vec<f64>,
    /// Diffusion evaluations outside the declared bounds (flagged, never
    /// clamped).
    pub diffusion_flags: usize,
}

/// Full discrete evolution: one coefficient vector per equation per time
/// level, plus per-step diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `states[n][i]` holds equation `i` at time level `n`.
    pub states: Vec<Vec<CoefVector>>,
    pub reports: Vec<StepReport>,
    pub grid: TimeGrid,
    pub stability_warning: Option<String>,
    pub elapsed: Duration,
}

impl Trajectory {
    pub fn final_state(&self) -> &[CoefVector] {
        self.states.last().expect("trajectory holds level 0")
    }

    pub fn total_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).sum()
    }

    pub fn total_diffusion_flags(&self) -> usize {
        self.reports.iter().map(|r| r.diffusion_flags).sum()
    }
}

/// Everything a step needs: the space, the transformed problem, the time
/// grid, and the time-independent matrices. `M` and `A` are assembled
/// once here; `B(t)` and the load are reassembled each step.
pub struct SchemeContext<'a> {
    pub space: &'a FemSpace,
    pub problem: &'a FixedProblem,
    pub grid: TimeGrid,
    mass: BandedMatrix,
    stiffness: BandedMatrix,
}

impl<'a> SchemeContext<'a> {
    pub fn new(space: &'a FemSpace, problem: &'a FixedProblem, grid: TimeGrid) -> Self {
        Self {
            space,
            problem,
            grid,
            mass: space.assemble_mass(),
            stiffness: space.assemble_stiffness(),
        }
    }

    pub fn mass(&self) -> &BandedMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &BandedMatrix {
        &self.stiffness
    }

    /// Interpolants of the initial data, the level-0 state.
    pub fn initial_state(&self) -> Vec<CoefVector> {
        self.problem
            .initial
            .iter()
            .map(|v0| self.space.interpolate(|y| v0(y)))
            .collect()
    }

    fn motion(&self) -> &BoundaryMotion {
        &self.problem.motion
    }

    /// Advection matrix and per-equation loads at time `t`.
    fn time_dependent_parts(&self, t: f64) -> Result<(f64, BandedMatrix, Vec<CoefVector>)> {
        let b2 = self.motion().b2(t)?;
        let advection = self.space.assemble_advection(self.motion(), t)?;
        let loads = self
            .problem
            .forcing
            .iter()
            .map(|g| self.space.assemble_load(|y, t| g(y, t), t))
            .collect::<Result<Vec<_>>>()?;
        Ok((b2, advection, loads))
    }

    /// Nonlocal values `l(V_j)` for a family of coefficient vectors at
    /// time `t`.
    fn nonlocal_values(&self, state: &[CoefVector], t: f64) -> Result<Vec<f64>> {
        state
            .iter()
            .map(|v| self.space.nonlocal_value(v, self.motion(), t))
            .collect()
    }

    /// Diffusion coefficients at the given nonlocal values; counts bound
    /// violations into `flags`.
    fn diffusion_at(&self, nonlocal: &[f64], flags: &mut usize) -> Result<Vec<f64>> {
        self.problem
            .diffusion
            .iter()
            .map(|d| {
                let a = d.eval(nonlocal)?;
                if !d.in_bounds(a) {
                    *flags += 1;
                }
                Ok(a)
            })
            .collect()
    }
}

/// Largest time step for which the scheme's stability estimate holds:
/// `gamma0 / (gamma0 + gamma'_max)` for backward Euler and
/// `4 gamma0 / (gamma'_max + gamma0)` for both Crank-Nicolson variants.
pub fn stability_limit(method: Method, motion: &BoundaryMotion) -> f64 {
    let g0 = motion.gamma0();
    let gp = motion.gamma_prime_max();
    match method {
        Method::BackwardEuler => g0 / (g0 + gp),
        Method::CrankNicolson | Method::LinearizedCrankNicolson => 4.0 * g0 / (gp + g0),
    }
}

fn max_norm_change(a: &[CoefVector], b: &[CoefVector]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            x.iter()
                .zip(y.iter())
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// One backward Euler step from level `n` to `n + 1`.
///
/// Solves `(M + d b2 a_i A - d B) V_i = M V_i_prev + d G_i` with all
/// time-dependent data at `t_{n+1}`, freezing `a_i` at the current
/// iterate and starting from the previous level.
pub fn step_backward_euler(
    ctx: &SchemeContext,
    state: &[CoefVector],
    n: usize,
    fp: &FixedPointParams,
) -> Result<(Vec<CoefVector>, StepReport)> {
    let d = ctx.grid.delta();
    let t_next = ctx.grid.time(n + 1);
    let (b2, advection, loads) = ctx.time_dependent_parts(t_next)?;
    let rhs_fixed: Vec<CoefVector> = state
        .iter()
        .zip(&loads)
        .map(|(v, g)| ctx.mass.matvec(v) + &(g * d))
        .collect();

    let mut report = StepReport::default();
    let mut current = state.to_vec();
    for it in 1..=fp.max_iterations {
        let nonlocal = ctx.nonlocal_values(&current, t_next)?;
        let a = ctx.diffusion_at(&nonlocal, &mut report.diffusion_flags)?;
        let mut next = Vec::with_capacity(current.len());
        for (i, rhs) in rhs_fixed.iter().enumerate() {
            let system = BandedMatrix::linear_combination(&[
                (1.0, &ctx.mass),
                (d * b2 * a[i], &ctx.stiffness),
                (-d, &advection),
            ]);
            next.push(solve_banded(&system, rhs)?);
        }
        let change = max_norm_change(&next, &current);
        report.iterations = it;
        report.final_residual = change;
        report.iterate_distances.push(change);
        current = next;
        if change <= fp.tolerance {
            return Ok((current, report));
        }
    }
    Err(Error::FixedPointDiverged {
        iterations: fp.max_iterations,
        residual: report.final_residual,
    })
}

/// Crank-Nicolson data at one step midpoint.
struct MidpointParts {
    t_mid: f64,
    b2: f64,
    advection: BandedMatrix,
    loads: Vec<CoefVector>,
}

impl MidpointParts {
    fn new(ctx: &SchemeContext, n: usize) -> Result<Self> {
        let t_mid = ctx.grid.midpoint(n);
        let (b2, advection, loads) = ctx.time_dependent_parts(t_mid)?;
        Ok(Self {
            t_mid,
            b2,
            advection,
            loads,
        })
    }

    /// Linear Crank-Nicolson solve with frozen diffusion values `a`:
    /// `(M + d/2 b2 a_i A - d/2 B) V_i = (M - d/2 b2 a_i A + d/2 B) V_i_prev + d G_i`.
    fn solve(
        &self,
        ctx: &SchemeContext,
        prev: &[CoefVector],
        a: &[f64],
    ) -> Result<Vec<CoefVector>> {
        let d = ctx.grid.delta();
        let mut out = Vec::with_capacity(prev.len());
        for (i, v_prev) in prev.iter().enumerate() {
            let c = 0.5 * d * self.b2 * a[i];
            let system = BandedMatrix::linear_combination(&[
                (1.0, &ctx.mass),
                (c, &ctx.stiffness),
                (-0.5 * d, &self.advection),
            ]);
            let rhs_matrix = BandedMatrix::linear_combination(&[
                (1.0, &ctx.mass),
                (-c, &ctx.stiffness),
                (0.5 * d, &self.advection),
            ]);
            let rhs = rhs_matrix.matvec(v_prev) + &(&self.loads[i] * d);
            out.push(solve_banded(&system, &rhs)?);
        }
        Ok(out)
    }
}

/// One Crank-Nicolson step from level `n` to `n + 1`.
///
/// The scheme is evaluated at the midpoint `t_{n+1/2}` with the unknown
/// entering through the average `(V_new + V_prev) / 2`; the diffusion
/// coefficient is resolved by the same freeze-and-solve iteration as the
/// Euler step, starting from the previous level.
pub fn step_crank_nicolson(
    ctx: &SchemeContext,
    state: &[CoefVector],
    n: usize,
    fp: &FixedPointParams,
) -> Result<(Vec<CoefVector>, StepReport)> {
    let parts = MidpointParts::new(ctx, n)?;
    let mut report = StepReport::default();
    let mut current = state.to_vec();
    for it in 1..=fp.max_iterations {
        let averaged: Vec<CoefVector> = current
            .iter()
            .zip(state)
            .map(|(v, p)| (v + p) * 0.5)
            .collect();
        let nonlocal = ctx.nonlocal_values(&averaged, parts.t_mid)?;
        let a = ctx.diffusion_at(&nonlocal, &mut report.diffusion_flags)?;
        let next = parts.solve(ctx, state, &a)?;
        let change = max_norm_change(&next, &current);
        report.iterations = it;
        report.final_residual = change;
        report.iterate_distances.push(change);
        current = next;
        if change <= fp.tolerance {
            return Ok((current, report));
        }
    }
    Err(Error::FixedPointDiverged {
        iterations: fp.max_iterations,
        residual: report.final_residual,
    })
}

/// Run the linearized Crank-Nicolson multistep scheme over the whole
/// grid. Level 1 comes from a predictor-corrector pair: the predictor
/// freezes the diffusion at the initial nonlocal values, the corrector
/// re-evaluates it at the average of predictor and initial state. From
/// level 2 on, the diffusion argument is the extrapolation
/// `1.5 V(n-1) - 0.5 V(n-2)` and each step is one linear solve per
/// equation. Requires at least two steps.
pub fn run_linearized_cn(ctx: &SchemeContext) -> Result<Trajectory> {
    if ctx.grid.step_count() < 2 {
        return Err(Error::InvalidGrid(
            "the linearized scheme needs at least 2 steps (predictor-corrector start-up \
             plus one multistep level)"
                .to_string(),
        ));
    }
    let start = Instant::now();
    let mut states = Vec::with_capacity(ctx.grid.step_count() + 1);
    let mut reports = Vec::with_capacity(ctx.grid.step_count());
    states.push(ctx.initial_state());

    // Predictor-corrector start-up for level 1.
    {
        let mut report = StepReport::default();
        let parts = MidpointParts::new(ctx, 0).map_err(|e| wrap_step(0, e))?;
        let initial = &states[0];
        // Predictor: diffusion frozen at the initial nonlocal values,
        // taken at t = 0.
        let l0 = ctx
            .nonlocal_values(initial, 0.0)
            .map_err(|e| wrap_step(0, e))?;
        let a0 = ctx
            .diffusion_at(&l0, &mut report.diffusion_flags)
            .map_err(|e| wrap_step(0, e))?;
        let predicted = parts
            .solve(ctx, initial, &a0)
            .map_err(|e| wrap_step(0, e))?;
        // Corrector: diffusion at the average of predictor and initial
        // state, evaluated at the midpoint.
        let averaged: Vec<CoefVector> = predicted
            .iter()
            .zip(initial)
            .map(|(p, v)| (p + v) * 0.5)
            .collect();
        let lc = ctx
            .nonlocal_values(&averaged, parts.t_mid)
            .map_err(|e| wrap_step(0, e))?;
        let ac = ctx
            .diffusion_at(&lc, &mut report.diffusion_flags)
            .map_err(|e| wrap_step(0, e))?;
        let corrected = parts
            .solve(ctx, initial, &ac)
            .map_err(|e| wrap_step(0, e))?;
        states.push(corrected);
        reports.push(report);
    }

    // Multistep levels.
    for level in 2..=ctx.grid.step_count() {
        let n = level - 1; // step index: level n -> level n + 1
        let mut report = StepReport::default();
        let parts = MidpointParts::new(ctx, n).map_err(|e| wrap_step(n, e))?;
        let extrapolated: Vec<CoefVector> = states[level - 1]
            .iter()
            .zip(&states[level - 2])
            .map(|(v1, v2)| v1 * 1.5 - v2 * 0.5)
            .collect();
        let l = ctx
            .nonlocal_values(&extrapolated, parts.t_mid)
            .map_err(|e| wrap_step(n, e))?;
        let a = ctx
            .diffusion_at(&l, &mut report.diffusion_flags)
            .map_err(|e| wrap_step(n, e))?;
        let next = parts
            .solve(ctx, &states[level - 1], &a)
            .map_err(|e| wrap_step(n, e))?;
        states.push(next);
        reports.push(report);
    }

    Ok(Trajectory {
        states,
        reports,
        grid: ctx.grid,
        stability_warning: stability_warning(Method::LinearizedCrankNicolson, ctx),
        elapsed: start.elapsed(),
    })
}

fn wrap_step(step: usize, source: Error) -> Error {
    Error::StepFailed {
        step,
        source: Box::new(source),
    }
}

fn stability_warning(method: Method, ctx: &SchemeContext) -> Option<String> {
    let limit = stability_limit(method, &ctx.problem.motion);
    (ctx.grid.delta() > limit).then(|| {
        format!(
            "delta = {} exceeds the {} stability bound {limit}; proceeding anyway \
             (the bound is sufficient, not necessary)",
            ctx.grid.delta(),
            method.tag()
        )
    })
}

/// Integrate the transformed problem over the whole grid with the chosen
/// method. A step size above the stability bound is recorded as a warning
/// and the run proceeds. Step failures carry the failing step index.
pub fn integrate(ctx: &SchemeContext, method: Method, fp: &FixedPointParams) -> Result<Trajectory> {
    if method == Method::LinearizedCrankNicolson {
        return run_linearized_cn(ctx);
    }
    let start = Instant::now();
    let mut states = Vec::with_capacity(ctx.grid.step_count() + 1);
    let mut reports = Vec::with_capacity(ctx.grid.step_count());
    states.push(ctx.initial_state());
    for n in 0..ctx.grid.step_count() {
        let (next, report) = match method {
            Method::BackwardEuler => step_backward_euler(ctx, &states[n], n, fp),
            Method::CrankNicolson => step_crank_nicolson(ctx, &states[n], n, fp),
            Method::LinearizedCrankNicolson => unreachable!(),
        }
        .map_err(|e| wrap_step(n, e))?;
        states.push(next);
        reports.push(report);
    }
    Ok(Trajectory {
        states,
        reports,
        grid: ctx.grid,
        stability_warning: stability_warning(method, ctx),
        elapsed: start.elapsed(),
    })
}
