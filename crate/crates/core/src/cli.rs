//! Experiment configuration and the command-line driver behind the
//! `mbfem` binary.
//!
//! A configuration is UTF-8 `key = value` text, one pair per line, `#`
//! comments allowed. Exactly one of a single run, an `h` sweep
//! (`h_list`) or a `delta` sweep (`delta_list`) may be active. Values for
//! `h_list` accept fractions (`1/8`) or decimals; they are converted to
//! element counts of the uniform mesh.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{OnceLock, RwLock};

use crate::harness::{
    compare_integrators, convergence_study, records_from_report, records_from_table, single_run,
    write_gnuplot, write_results, Experiment, ResultRecord, Vary,
};
use crate::integrators::{stability_limit, FixedPointParams, Method};
use crate::problem::{
    quartic_benchmark, sine_benchmark, skewed_quartic_benchmark, ExactSolution, MovingProblem,
};
use crate::{Error, Result};

/// Which problem a run solves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemChoice {
    /// Manufactured sine benchmark; the convergence-study default.
    Sine,
    /// Manufactured quartic benchmark (exact in degree >= 4 spaces).
    Quartic,
    /// Closed-form benchmark with the skewed coordinate; its reference
    /// values violate the right boundary condition for t > 0.
    QuarticSkew,
    /// A problem registered through [`register_problem`].
    Custom(String),
}

impl std::str::FromStr for ProblemChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sine" => ProblemChoice::Sine,
            "quartic" => ProblemChoice::Quartic,
            "quartic-skew" => ProblemChoice::QuarticSkew,
            other => ProblemChoice::Custom(other.to_string()),
        })
    }
}

type ProblemBuilder = fn() -> (MovingProblem, ExactSolution);

fn registry() -> &'static RwLock<HashMap<String, ProblemBuilder>> {
    static REGISTRY: OnceLock<RwLock<HashMap<String, ProblemBuilder>>> = OnceLock::new();
    REGISTRY.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Register a user-defined problem under a name usable as `problem =
/// <name>` in configurations. Compiled-in registration replaces any
/// runtime expression language.
pub fn register_problem(name: &str, builder: ProblemBuilder) {
    registry()
        .write()
        .unwrap()
        .insert(name.to_string(), builder);
}

pub fn build_problem(choice: &ProblemChoice) -> Result<(MovingProblem, ExactSolution)> {
    let built = match choice {
        ProblemChoice::Sine => sine_benchmark(),
        ProblemChoice::Quartic => quartic_benchmark(),
        ProblemChoice::QuarticSkew => skewed_quartic_benchmark(),
        ProblemChoice::Custom(name) => registry()
            .read()
            .unwrap()
            .get(name)
            .map(|b| b())
            .ok_or_else(|| Error::Config {
                key: "problem".to_string(),
                message: format!("no registered problem named `{name}`"),
            })?,
    };
    built.0.validate()?;
    Ok(built)
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Gnuplot,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "gnuplot" => Ok(OutputFormat::Gnuplot),
            other => Err(Error::Config {
                key: "format".to_string(),
                message: format!("unknown format `{other}` (expected csv or gnuplot)"),
            }),
        }
    }
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemChoice,
    pub method: Method,
    pub degree: usize,
    pub elements: usize,
    /// Element counts of an `h` sweep, coarse to fine.
    pub element_sweep: Option<Vec<usize>>,
    pub delta: f64,
    /// Step sizes of a `delta` sweep, coarse to fine.
    pub delta_sweep: Option<Vec<f64>>,
    pub horizon: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Acknowledge a step size above the stability bound: the warning is
    /// still recorded but not printed.
    pub allow_unstable: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemChoice::Sine,
            method: Method::LinearizedCrankNicolson,
            degree: 2,
            elements: 100,
            element_sweep: None,
            delta: 1e-2,
            delta_sweep: None,
            horizon: 1.0,
            tolerance: 1e-12,
            max_iterations: 50,
            output: None,
            format: OutputFormat::Csv,
            allow_unstable: false,
        }
    }
}

/// The study mode a configuration selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Single,
    MeshSweep,
    DeltaSweep,
}

impl RunConfig {
    pub fn mode(&self) -> Result<StudyKind> {
        match (&self.element_sweep, &self.delta_sweep) {
            (Some(_), Some(_)) => Err(Error::Config {
                key: "h_list".to_string(),
                message: "h_list and delta_list are mutually exclusive".to_string(),
            }),
            (Some(_), None) => Ok(StudyKind::MeshSweep),
            (None, Some(_)) => Ok(StudyKind::DeltaSweep),
            (None, None) => Ok(StudyKind::Single),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mode()?;
        let positive = [
            ("delta", self.delta),
            ("horizon", self.horizon),
            ("tol", self.tolerance),
        ];
        for (key, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Config {
                    key: key.to_string(),
                    message: format!("must be positive, got {value}"),
                });
            }
        }
        for (key, value) in [
            ("degree", self.degree),
            ("elements", self.elements),
            ("max_iter", self.max_iterations),
        ] {
            if value == 0 {
                return Err(Error::Config {
                    key: key.to_string(),
                    message: "must be positive".to_string(),
                });
            }
        }
        if let Some(sweep) = &self.element_sweep {
            if sweep.iter().any(|&n| n < 2) {
                return Err(Error::Config {
                    key: "h_list".to_string(),
                    message: "each h must correspond to at least 2 elements".to_string(),
                });
            }
        }
        if let Some(sweep) = &self.delta_sweep {
            if sweep.iter().any(|&d| !d.is_finite() || d <= 0.0) {
                return Err(Error::Config {
                    key: "delta_list".to_string(),
                    message: "each delta must be positive".to_string(),
                });
            }
        }
        Ok(())
    }
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Parse `1/8`, `0.125` or `1e-3` into a finite float.
pub fn parse_number(key: &str, text: &str) -> Result<f64> {
    let text = text.trim();
    let value = if let Some((num, den)) = text.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| config_err(key, format!("malformed number `{text}`")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| config_err(key, format!("malformed number `{text}`")))?;
        n / d
    } else {
        text.parse()
            .map_err(|_| config_err(key, format!("malformed number `{text}`")))?
    };
    if !value.is_finite() {
        return Err(config_err(key, format!("non-finite value `{text}`")));
    }
    Ok(value)
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    text.trim_matches(|c| c == '{' || c == '}')
        .split(',')
        .map(|part| parse_number(key, part))
        .collect()
}

/// Element count of the uniform mesh with width `h`; `1/h` must be an
/// integer.
pub fn elements_for_width(key: &str, h: f64) -> Result<usize> {
    if !h.is_finite() || h <= 0.0 || h > 0.5 {
        return Err(config_err(key, format!("h = {h} outside (0, 1/2]")));
    }
    let n = 1.0 / h;
    if (n - n.round()).abs() > 1e-9 * n {
        return Err(config_err(
            key,
            format!("h = {h} does not divide the unit interval evenly"),
        ));
    }
    Ok(n.round() as usize)
}

/// Parse a `key = value` configuration into a [`RunConfig`] on top of the
/// defaults. Unknown keys, malformed numbers and constraint violations
/// are errors naming the key.
pub fn parse_config(source: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    for (lineno, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            config_err(
                line,
                format!("line {} is not a key = value pair", lineno + 1),
            )
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "problem" => config.problem = value.parse()?,
            "method" => config.method = value.parse()?,
            "degree" => {
                config.degree = value
                    .parse()
                    .map_err(|_| config_err(key, format!("malformed integer `{value}`")))?
            }
            "elements" => {
                config.elements = value
                    .parse()
                    .map_err(|_| config_err(key, format!("malformed integer `{value}`")))?
            }
            "h" => config.elements = elements_for_width(key, parse_number(key, value)?)?,
            "h_list" => {
                let hs = parse_list(key, value)?;
                config.element_sweep = Some(
                    hs.iter()
                        .map(|&h| elements_for_width(key, h))
                        .collect::<Result<_>>()?,
                );
            }
            "delta" => config.delta = parse_number(key, value)?,
            "delta_list" => config.delta_sweep = Some(parse_list(key, value)?),
            "horizon" => config.horizon = parse_number(key, value)?,
            "tol" => config.tolerance = parse_number(key, value)?,
            "max_iter" => {
                config.max_iterations = value
                    .parse()
                    .map_err(|_| config_err(key, format!("malformed integer `{value}`")))?
            }
            "output" => config.output = Some(PathBuf::from(value)),
            "format" => config.format = value.parse()?,
            "allow_unstable" => {
                config.allow_unstable = value
                    .parse()
                    .map_err(|_| config_err(key, format!("malformed boolean `{value}`")))?
            }
            other => return Err(config_err(other, "unknown key")),
        }
    }
    config.validate()?;
    Ok(config)
}

/// Cap the sweep worker pool from the `MBFEM_THREADS` environment
/// variable; later calls are no-ops once the global pool exists.
pub fn init_thread_pool() {
    static ONCE: OnceLock<()> = OnceLock::new();
    ONCE.get_or_init(|| {
        if let Ok(n) = std::env::var("MBFEM_THREADS") {
            if let Ok(n) = n.parse::<usize>() {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build_global();
            }
        }
    });
}

/// Outcome summary of a CLI run.
#[derive(Debug, Default)]
pub struct RunSummary {
    /// Human-readable table printed to standard output.
    pub printed: String,
    pub failed_rows: usize,
    pub warnings: Vec<String>,
}

impl RunSummary {
    pub fn success(&self) -> bool {
        self.failed_rows == 0
    }
}

fn experiment(config: &RunConfig) -> Result<Experiment> {
    let (problem, exact) = build_problem(&config.problem)?;
    Ok(Experiment {
        problem,
        exact,
        degree: config.degree,
        method: config.method,
        fp: FixedPointParams {
            tolerance: config.tolerance,
            max_iterations: config.max_iterations,
        },
        horizon: Some(config.horizon),
    })
}

fn stability_note(config: &RunConfig, exp: &Experiment, delta: f64) -> Option<String> {
    let limit = stability_limit(config.method, &exp.problem.motion);
    (delta > limit).then(|| {
        format!(
            "warning: delta = {delta} exceeds the {} stability bound {limit}",
            config.method.tag()
        )
    })
}

fn write_output(
    config: &RunConfig,
    records: &[ResultRecord],
    table: Option<&crate::harness::ConvergenceTable>,
) -> Result<()> {
    if let Some(path) = &config.output {
        match config.format {
            OutputFormat::Csv => write_results(records, path)?,
            OutputFormat::Gnuplot => {
                write_results(records, path)?;
                if let Some(table) = table {
                    write_gnuplot(table, path)?;
                }
            }
        }
    }
    Ok(())
}

fn error_columns(equations: usize) -> String {
    (1..=equations)
        .map(|eq| format!("{:>13}", format!("error_l2(eq{eq})")))
        .collect::<Vec<_>>()
        .join("  ")
}

fn summarize_table(table: &crate::harness::ConvergenceTable, parameter_name: &str) -> String {
    let equations = table.slopes.len();
    let mut out = String::new();
    out.push_str(&format!(
        "{:>12}  {}  {:>9}\n",
        parameter_name,
        error_columns(equations),
        "cpu_ms"
    ));
    for row in &table.rows {
        match (&row.report, &row.failure) {
            (Some(r), _) => {
                let errors = r
                    .errors_l2
                    .iter()
                    .map(|e| format!("{e:>13.6e}"))
                    .collect::<Vec<_>>()
                    .join("  ");
                out.push_str(&format!(
                    "{:>12.6e}  {errors}  {:>9.2}\n",
                    row.parameter, r.cpu_ms
                ));
            }
            (None, Some(f)) => {
                out.push_str(&format!("{:>12.6e}  failed: {f}\n", row.parameter));
            }
            (None, None) => unreachable!("row carries a report or a failure"),
        }
    }
    let slopes: Vec<String> = table
        .slopes
        .iter()
        .map(|s| {
            s.map(|v| format!("{v:.3}"))
                .unwrap_or_else(|| "n/a".to_string())
        })
        .collect();
    out.push_str(&format!(
        "fitted slope per equation: {}\n",
        slopes.join(", ")
    ));
    out
}

/// Run one experiment configuration end to end: solve or sweep, print a
/// summary, write result files. Returns a summary whose `success` drives
/// the process exit status.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    init_thread_pool();
    let exp = experiment(config)?;
    let mut summary = RunSummary::default();
    match config.mode()? {
        StudyKind::Single => {
            if !config.allow_unstable {
                if let Some(note) = stability_note(config, &exp, config.delta) {
                    summary.warnings.push(note);
                }
            }
            let report = single_run(&exp, config.elements, config.delta)?;
            let mut out = String::new();
            out.push_str(&format!(
                "{} k={} h={:.6e} delta={:.6e}\n",
                report.method.tag(),
                report.degree,
                report.h,
                report.delta
            ));
            for (eq, (l2, nodal)) in report.errors_l2.iter().zip(&report.max_nodal).enumerate() {
                out.push_str(&format!(
                    "eq {}: error_l2 = {:.6e}, max_nodal = {:.6e}\n",
                    eq + 1,
                    l2,
                    nodal
                ));
            }
            out.push_str(&format!(
                "cpu_ms = {:.2}, fixed-point iterations = {}\n",
                report.cpu_ms, report.total_iterations
            ));
            let records = records_from_report(&report, None);
            write_output(config, &records, None)?;
            summary.printed = out;
        }
        StudyKind::MeshSweep => {
            let vary = Vary::MeshWidth {
                element_counts: config.element_sweep.clone().expect("mode checked"),
                delta: config.delta,
            };
            let table = convergence_study(&exp, &vary)?;
            summary.failed_rows = table.rows.iter().filter(|r| r.failure.is_some()).count();
            summary.printed = summarize_table(&table, "h");
            let records = records_from_table(&table);
            write_output(config, &records, Some(&table))?;
        }
        StudyKind::DeltaSweep => {
            let deltas = config.delta_sweep.clone().expect("mode checked");
            if !config.allow_unstable {
                if let Some(&coarsest) = deltas.first() {
                    if let Some(note) = stability_note(config, &exp, coarsest) {
                        summary.warnings.push(note);
                    }
                }
            }
            let vary = Vary::TimeStep {
                deltas,
                element_count: config.elements,
            };
            let table = convergence_study(&exp, &vary)?;
            summary.failed_rows = table.rows.iter().filter(|r| r.failure.is_some()).count();
            summary.printed = summarize_table(&table, "delta");
            let records = records_from_table(&table);
            write_output(config, &records, Some(&table))?;
        }
    }
    Ok(summary)
}

/// Run all three integrators on the configured grid and tabulate their
/// errors and CPU times.
pub fn run_compare(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    if config.mode()? != StudyKind::Single {
        return Err(Error::Config {
            key: "h_list".to_string(),
            message: "compare-integrators takes a single grid, not a sweep".to_string(),
        });
    }
    init_thread_pool();
    let exp = experiment(config)?;
    let mut summary = RunSummary::default();
    let mut out = String::new();
    out.push_str(&format!(
        "{:>6}  {}  {:>9}  {:>6}\n",
        "method",
        error_columns(exp.problem.equation_count),
        "cpu_ms",
        "iters"
    ));
    let mut records = Vec::new();
    for (method, result) in compare_integrators(&exp, config.elements, config.delta) {
        match result {
            Ok(report) => {
                let errors = report
                    .errors_l2
                    .iter()
                    .map(|e| format!("{e:>13.6e}"))
                    .collect::<Vec<_>>()
                    .join("  ");
                out.push_str(&format!(
                    "{:>6}  {errors}  {:>9.2}  {:>6}\n",
                    method.tag(),
                    report.cpu_ms,
                    report.total_iterations
                ));
                records.extend(records_from_report(&report, None));
            }
            Err(e) => {
                summary.failed_rows += 1;
                out.push_str(&format!("{:>6}  failed: {e}\n", method.tag()));
            }
        }
    }
    write_output(config, &records, None)?;
    summary.printed = out;
    Ok(summary)
}
