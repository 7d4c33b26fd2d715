use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "volterra", version, about = "Solve first-kind Volterra systems with jump-discontinuous kernels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and report errors and the iteration history.
    Run(RunArgs),
    /// Sweep the mesh size or degree and tabulate the errors.
    Study(StudyArgs),
    /// List the built-in problems.
    List(ListArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Piecewise-constant steps on a uniform mesh.
    Pc,
    /// Polynomial collocation.
    Collocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[group(id = "problem", required = true, multiple = false)]
pub struct ProblemArgs {
    /// Name of a built-in problem (see `volterra list`).
    #[arg(long, group = "problem")]
    pub builtin: Option<String>,
    /// TOML file describing the system.
    #[arg(long, group = "problem")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Method::Collocation)]
    pub method: Method,
    /// Newton iteration cap.
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    /// Stop once the correction sup-norm is at most this.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Midpoint panels per band segment (default: 200 for pc, 8000 for collocation).
    #[arg(long)]
    pub panels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Mesh cells for `--method pc`.
    #[arg(long, conflicts_with = "degree")]
    pub nodes: Option<usize>,
    /// Polynomial degree for `--method collocation`.
    #[arg(long)]
    pub degree: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated mesh sizes for `--method pc`.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "degree")]
    pub nodes: Option<Vec<usize>>,
    /// Comma-separated degrees for `--method collocation`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub degree: Option<Vec<usize>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}
