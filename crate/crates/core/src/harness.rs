//! Experiment harness: error measurement on the moving domain,
//! convergence studies in `h` and `delta` with fitted log-log slopes, and
//! delimited-text result files.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::femspace::{CoefVector, FemSpace};
use crate::geometry::BoundaryMotion;
use crate::integrators::{integrate, FixedPointParams, Method, SchemeContext, TimeGrid};
use crate::problem::{transform_problem, ExactSolution, MovingProblem};
use crate::{Error, Result};

/// L2 error on the moving domain at time `t`:
/// the square root of `integral over (alpha(t), beta(t))` of
/// `(U(y(x)) - u(x, t))^2 dx`, by per-element Gauss quadrature with
/// `k + 3` points applied directly in the physical coordinate.
pub fn error_l2_moving(
    space: &FemSpace,
    coef: &CoefVector,
    exact_u: impl Fn(f64, f64) -> f64,
    motion: &BoundaryMotion,
    t: f64,
) -> Result<f64> {
    let gamma = motion.gamma(t)?;
    let alpha = motion.alpha(t);
    let rule = crate::femspace::gauss_legendre(space.degree() + 3);
    let bounds = space.element_boundaries();
    let mut total = 0.0;
    for e in 0..space.element_count() {
        let xa = alpha + gamma * bounds[e];
        let xb = alpha + gamma * bounds[e + 1];
        let width = xb - xa;
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            let x = xa + width * p;
            let y = motion.to_fixed(x, t)?;
            let diff = space.evaluate(coef, y) - exact_u(x, t);
            total += width * w * diff * diff;
        }
    }
    Ok(total.sqrt())
}

/// Largest pointwise error over the interior nodes, evaluated on the
/// moving domain at time `t`.
pub fn max_nodal_error(
    space: &FemSpace,
    coef: &CoefVector,
    exact_u: impl Fn(f64, f64) -> f64,
    motion: &BoundaryMotion,
    t: f64,
) -> f64 {
    space
        .node_positions()
        .iter()
        .zip(coef.iter())
        .map(|(&y, &v)| (exact_u(motion.to_moving(y, t), t) - v).abs())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `log(error)` against `log(parameter)`.
#[derive(Debug, Clone, Copy)]
pub struct SlopeEstimate {
    pub slope: f64,
    /// Points dropped because their error was zero or negative.
    pub excluded: usize,
}

pub fn estimate_slope(points: &[(f64, f64)]) -> Result<SlopeEstimate> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(p, e)| *p > 0.0 && *e > 0.0)
        .map(|&(p, e)| (p.ln(), e.ln()))
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 2 {
        return Err(Error::SlopeFit(format!(
            "only {} usable points after excluding {excluded} nonpositive entries",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = usable.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(SlopeEstimate {
        slope: sxy / sxx,
        excluded,
    })
}

/// A problem, a reference solution and the discretization knobs shared by
/// every run of a study.
#[derive(Clone)]
pub struct Experiment {
    pub problem: MovingProblem,
    pub exact: ExactSolution,
    pub degree: usize,
    pub method: Method,
    pub fp: FixedPointParams,
    /// Integration horizon; defaults to the problem's.
    pub horizon: Option<f64>,
}

impl Experiment {
    pub fn new(
        problem: MovingProblem,
        exact: ExactSolution,
        degree: usize,
        method: Method,
    ) -> Self {
        Self {
            problem,
            exact,
            degree,
            method,
            fp: FixedPointParams::default(),
            horizon: None,
        }
    }

    fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(self.problem.horizon)
    }
}

/// Outcome of a single discretized solve.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub method: Method,
    pub degree: usize,
    pub h: f64,
    pub delta: f64,
    /// L2 error on the moving domain at the final time, per equation.
    pub errors_l2: Vec<f64>,
    /// Max interior-node error at the final time, per equation.
    pub max_nodal: Vec<f64>,
    /// Wall-clock milliseconds around matrix assembly and integration.
    pub cpu_ms: f64,
    pub total_iterations: usize,
    pub stability_warning: Option<String>,
}

/// Solve one configuration and measure its errors at the final time.
pub fn single_run(exp: &Experiment, element_count: usize, delta: f64) -> Result<RunReport> {
    let horizon = exp.horizon();
    let space = FemSpace::uniform(element_count, exp.degree)?;
    let fixed = transform_problem(&exp.problem);
    let grid = TimeGrid::with_delta(delta, horizon)?;
    let start = Instant::now();
    let ctx = SchemeContext::new(&space, &fixed, grid);
    let trajectory = integrate(&ctx, exp.method, &exp.fp)?;
    let cpu_ms = start.elapsed().as_secs_f64() * 1e3;
    let final_state = trajectory.final_state();
    let mut errors_l2 = Vec::with_capacity(exp.problem.equation_count);
    let mut max_nodal = Vec::with_capacity(exp.problem.equation_count);
    for (i, coef) in final_state.iter().enumerate() {
        let u = &exp.exact.components[i].value;
        errors_l2.push(error_l2_moving(
            &space,
            coef,
            |x, t| u(x, t),
            &exp.problem.motion,
            horizon,
        )?);
        max_nodal.push(max_nodal_error(
            &space,
            coef,
            |x, t| u(x, t),
            &exp.problem.motion,
            horizon,
        ));
    }
    Ok(RunReport {
        method: exp.method,
        degree: exp.degree,
        h: space.h_max(),
        delta: grid.delta(),
        errors_l2,
        max_nodal,
        cpu_ms,
        total_iterations: trajectory.total_iterations(),
        stability_warning: trajectory.stability_warning,
    })
}

/// What a convergence study refines.
#[derive(Debug, Clone)]
pub enum Vary {
    /// Refine the mesh at fixed time step.
    MeshWidth {
        element_counts: Vec<usize>,
        delta: f64,
    },
    /// Refine the time step at fixed mesh.
    TimeStep {
        deltas: Vec<f64>,
        element_count: usize,
    },
}

/// One row of a convergence table.
#[derive(Debug, Clone)]
pub struct StudyRow {
    /// Refinement parameter: `h` or `delta`.
    pub parameter: f64,
    pub report: Option<RunReport>,
    pub failure: Option<String>,
}

/// Rows of (parameter, per-equation error, wall-clock time) with the
/// slope fitted per equation over the three finest rows; coarser rows are
/// often pre-asymptotic and would pollute a global fit.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub method: Method,
    pub degree: usize,
    pub rows: Vec<StudyRow>,
    /// Fitted slope per equation; `None` when too few rows succeeded.
    pub slopes: Vec<Option<f64>>,
}

pub fn convergence_study(exp: &Experiment, vary: &Vary) -> Result<ConvergenceTable> {
    let configs: Vec<(usize, f64, f64)> = match vary {
        Vary::MeshWidth {
            element_counts,
            delta,
        } => element_counts
            .iter()
            .map(|&n| (n, *delta, 1.0 / n as f64))
            .collect(),
        Vary::TimeStep {
            deltas,
            element_count,
        } => deltas.iter().map(|&d| (*element_count, d, d)).collect(),
    };
    if configs.len() < 3 {
        return Err(Error::Study(format!(
            "need at least 3 refinement values, got {}",
            configs.len()
        )));
    }
    for w in configs.windows(2) {
        if w[1].2 >= w[0].2 {
            return Err(Error::Study(
                "refinement values must be strictly decreasing".to_string(),
            ));
        }
    }

    let rows: Vec<StudyRow> = configs
        .par_iter()
        .map(
            |&(elements, delta, parameter)| match single_run(exp, elements, delta) {
                Ok(report) => StudyRow {
                    parameter,
                    report: Some(report),
                    failure: None,
                },
                Err(e) => StudyRow {
                    parameter,
                    report: None,
                    failure: Some(e.to_string()),
                },
            },
        )
        .collect();

    let equation_count = exp.problem.equation_count;
    let mut slopes = Vec::with_capacity(equation_count);
    for eq in 0..equation_count {
        let finest: Vec<(f64, f64)> = rows
            .iter()
            .rev()
            .filter_map(|r| {
                r.report
                    .as_ref()
                    .map(|rep| (r.parameter, rep.errors_l2[eq]))
            })
            .take(3)
            .collect();
        slopes.push(estimate_slope(&finest).ok().map(|s| s.slope));
    }
    Ok(ConvergenceTable {
        method: exp.method,
        degree: exp.degree,
        rows,
        slopes,
    })
}

/// Run all three integrators on the same grid for side-by-side error and
/// CPU-time comparison.
pub fn compare_integrators(
    exp: &Experiment,
    element_count: usize,
    delta: f64,
) -> Vec<(Method, Result<RunReport>)> {
    Method::ALL
        .iter()
        .map(|&method| {
            let run = Experiment {
                method,
                ..exp.clone()
            };
            (method, single_run(&run, element_count, delta))
        })
        .collect()
}

// ---------------------------------------------------------------------
// Result files
// ---------------------------------------------------------------------

/// One output line: a (run, equation) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub method: String,
    pub degree: usize,
    pub h: f64,
    pub delta: f64,
    /// 1-based equation index.
    pub equation: usize,
    pub error_l2: f64,
    pub error_maxnodal: f64,
    pub cpu_ms: f64,
    pub slope: Option<f64>,
}

pub fn records_from_report(
    report: &RunReport,
    slopes: Option<&[Option<f64>]>,
) -> Vec<ResultRecord> {
    (0..report.errors_l2.len())
        .map(|eq| ResultRecord {
            method: report.method.tag().to_string(),
            degree: report.degree,
            h: report.h,
            delta: report.delta,
            equation: eq + 1,
            error_l2: report.errors_l2[eq],
            error_maxnodal: report.max_nodal[eq],
            cpu_ms: report.cpu_ms,
            slope: slopes.and_then(|s| s.get(eq).copied().flatten()),
        })
        .collect()
}

pub fn records_from_table(table: &ConvergenceTable) -> Vec<ResultRecord> {
    table
        .rows
        .iter()
        .filter_map(|row| row.report.as_ref())
        .flat_map(|report| records_from_report(report, Some(&table.slopes)))
        .collect()
}

/// Full-precision decimal with 17 significant digits.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

pub const RESULT_HEADER: &str = "method,k,h,delta,eq,error_l2,error_maxnodal,cpu_ms,slope";

/// Write records as delimited text. Fields are full precision; a missing
/// slope is an empty field. Identical record lists produce byte-identical
/// files.
pub fn write_results(records: &[ResultRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(RESULT_HEADER);
    out.push('\n');
    for r in records {
        let slope = r.slope.map(full).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.method,
            r.degree,
            full(r.h),
            full(r.delta),
            r.equation,
            full(r.error_l2),
            full(r.error_maxnodal),
            full(r.cpu_ms),
            slope
        )
        .expect("writing to a string cannot fail");
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Gnuplot-ready companion files: two columns, `log10(parameter)` and
/// `log10(error_l2)`, one file per equation next to `stem`.
pub fn write_gnuplot(table: &ConvergenceTable, stem: &Path) -> Result<()> {
    let equations = table
        .rows
        .iter()
        .find_map(|r| r.report.as_ref().map(|rep| rep.errors_l2.len()))
        .unwrap_or(0);
    for eq in 0..equations {
        let mut out = String::new();
        for row in &table.rows {
            if let Some(report) = &row.report {
                let err = report.errors_l2[eq];
                if err > 0.0 {
                    writeln!(out, "{} {}", full(row.parameter.log10()), full(err.log10()))
                        .expect("writing to a string cannot fail");
                }
            }
        }
        let path = stem.with_extension(format!("{}.eq{}.dat", table.method.tag(), eq + 1));
        std::fs::write(&path, out).map_err(|source| Error::Io { path, source })?;
    }
    Ok(())
}
