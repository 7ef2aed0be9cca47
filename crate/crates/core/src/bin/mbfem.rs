//! Command-line front end: single solves, refinement studies and
//! integrator comparisons for the moving-boundary solver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mbfem::cli::{
    self, elements_for_width, parse_config, parse_number, OutputFormat, ProblemChoice, RunConfig,
    RunSummary,
};
use mbfem::integrators::Method;
use mbfem::Result;

#[derive(Parser)]
#[command(
    name = "mbfem",
    about = "Finite element solver for nonlocal parabolic systems on moving 1-D domains",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and report its errors.
    Solve(CommonArgs),
    /// Mesh refinement study: one run per h, fitted convergence slope.
    ConvergeH {
        #[command(flatten)]
        common: CommonArgs,
        /// Mesh widths, coarse to fine, e.g. "1/8,1/16,1/32".
        #[arg(long, value_delimiter = ',', required_unless_present = "config")]
        h_list: Vec<String>,
    },
    /// Time step refinement study: one run per delta, fitted slope.
    ConvergeDt {
        #[command(flatten)]
        common: CommonArgs,
        /// Step sizes, coarse to fine, e.g. "0.1,0.05,0.025".
        #[arg(long, value_delimiter = ',', required_unless_present = "config")]
        delta_list: Vec<String>,
    },
    /// Run all three integrators on one grid and tabulate errors and CPU
    /// time.
    CompareIntegrators(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Base configuration file (key = value lines); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem: sine, quartic, quartic-skew, or a registered name.
    #[arg(long)]
    problem: Option<String>,
    /// Integrator: euler, cn or lcn.
    #[arg(long)]
    method: Option<String>,
    /// Polynomial degree k.
    #[arg(long)]
    degree: Option<usize>,
    /// Element count of the uniform mesh.
    #[arg(long)]
    elements: Option<usize>,
    /// Mesh width (1/elements); fractions accepted.
    #[arg(long, conflicts_with = "elements")]
    h: Option<String>,
    /// Time step size.
    #[arg(long)]
    delta: Option<String>,
    /// Final time.
    #[arg(long)]
    horizon: Option<f64>,
    /// Fixed-point stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed-point iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Result file destination.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Result file format: csv or gnuplot.
    #[arg(long)]
    format: Option<String>,
    /// Proceed quietly when delta exceeds the stability bound.
    #[arg(long)]
    allow_unstable: bool,
}

fn build_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| mbfem::Error::Io {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = &common.problem {
        config.problem = p.parse::<ProblemChoice>()?;
    }
    if let Some(m) = &common.method {
        config.method = m.parse::<Method>()?;
    }
    if let Some(k) = common.degree {
        config.degree = k;
    }
    if let Some(n) = common.elements {
        config.elements = n;
    }
    if let Some(h) = &common.h {
        config.elements = elements_for_width("h", parse_number("h", h)?)?;
    }
    if let Some(d) = &common.delta {
        config.delta = parse_number("delta", d)?;
    }
    if let Some(t) = common.horizon {
        config.horizon = t;
    }
    if let Some(tol) = common.tol {
        config.tolerance = tol;
    }
    if let Some(mi) = common.max_iter {
        config.max_iterations = mi;
    }
    if let Some(o) = &common.output {
        config.output = Some(o.clone());
    }
    if let Some(f) = &common.format {
        config.format = f.parse::<OutputFormat>()?;
    }
    if common.allow_unstable {
        config.allow_unstable = true;
    }
    Ok(config)
}

fn parse_sweep_numbers(key: &str, values: &[String]) -> Result<Vec<f64>> {
    values.iter().map(|v| parse_number(key, v)).collect()
}

fn execute() -> Result<RunSummary> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(common) => {
            let config = build_config(common)?;
            cli::run(&config)
        }
        Command::ConvergeH { common, h_list } => {
            let mut config = build_config(common)?;
            if !h_list.is_empty() {
                let hs = parse_sweep_numbers("h_list", h_list)?;
                config.element_sweep = Some(
                    hs.iter()
                        .map(|&h| elements_for_width("h_list", h))
                        .collect::<Result<_>>()?,
                );
            }
            if config.element_sweep.is_none() {
                return Err(mbfem::Error::Config {
                    key: "h_list".to_string(),
                    message: "converge-h needs a mesh width list".to_string(),
                });
            }
            cli::run(&config)
        }
        Command::ConvergeDt { common, delta_list } => {
            let mut config = build_config(common)?;
            if !delta_list.is_empty() {
                config.delta_sweep = Some(parse_sweep_numbers("delta_list", delta_list)?);
            }
            if config.delta_sweep.is_none() {
                return Err(mbfem::Error::Config {
                    key: "delta_list".to_string(),
                    message: "converge-dt needs a step size list".to_string(),
                });
            }
            cli::run(&config)
        }
        Command::CompareIntegrators(common) => {
            let config = build_config(common)?;
            cli::run_compare(&config)
        }
    }
}

fn main() -> ExitCode {
    match execute() {
        Ok(summary) => {
            for warning in &summary.warnings {
                eprintln!("{warning}");
            }
            print!("{}", summary.printed);
            if summary.success() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} row(s) failed", summary.failed_rows);
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
