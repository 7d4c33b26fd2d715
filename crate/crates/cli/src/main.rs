mod args;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use rayon::prelude::*;
use volterra::{builtin, load_config, solve, Error, NewtonOptions, VolterraSystem, BUILTINS};

use args::{Cli, Command, Format, ListArgs, Method, OutputArgs, ProblemArgs, RunArgs, SolverArgs, StudyArgs};
use report::{rows_csv, run_table, study_table, Row, SolveReport};

const DEFAULT_NODES: usize = 64;
const DEFAULT_DEGREE: usize = 5;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{failed} of {total} sweep points failed")]
    PartialStudy { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Solver(e) => match e {
                Error::Validation(_)
                | Error::Config { .. }
                | Error::InvalidSystem(_)
                | Error::UnknownBuiltin(_)
                | Error::InvalidArgument(_)
                | Error::Expr(_) => 2,
                _ => 3,
            },
            CliError::Csv(_) | CliError::Json(_) | CliError::PartialStudy { .. } => 3,
        }
    }
}

fn load(problem: &ProblemArgs) -> Result<VolterraSystem, CliError> {
    let system = match (&problem.builtin, &problem.config) {
        (Some(name), None) => builtin(name)?,
        (None, Some(path)) => load_config(path)?,
        _ => return Err(CliError::Usage("exactly one of --builtin or --config is required".into())),
    };
    system.ensure_valid()?;
    Ok(system)
}

fn options(solver: &SolverArgs, parameter: usize) -> Result<NewtonOptions, CliError> {
    if !(solver.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", solver.tol)));
    }
    if solver.iters == 0 {
        return Err(CliError::Usage("--iters must be at least 1".into()));
    }
    let mut opts = NewtonOptions::new(solver.method.inner(parameter)).max_iters(solver.iters).tol(solver.tol);
    if let Some(panels) = solver.panels {
        if panels == 0 {
            return Err(CliError::Usage("--panels must be at least 1".into()));
        }
        opts = opts.panels(panels);
    }
    Ok(opts)
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: Path::new("<stdout>").into(), source })
        }
    }
}

fn method_parameter(method: Method, nodes: Option<usize>, degree: Option<usize>) -> Result<usize, CliError> {
    match (method, nodes, degree) {
        (Method::Pc, Some(n), None) => Ok(n),
        (Method::Pc, None, None) => Ok(DEFAULT_NODES),
        (Method::Collocation, None, Some(m)) => Ok(m),
        (Method::Collocation, None, None) => Ok(DEFAULT_DEGREE),
        (Method::Pc, _, Some(_)) => Err(CliError::Usage("--degree applies to --method collocation; use --nodes".into())),
        (Method::Collocation, Some(_), _) => Err(CliError::Usage("--nodes applies to --method pc; use --degree".into())),
    }
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let system = load(&args.problem)?;
    let parameter = method_parameter(args.solver.method, args.nodes, args.degree)?;
    let opts = options(&args.solver, parameter)?;
    let start = Instant::now();
    let outcome = solve(&system, &opts)?;
    let elapsed = start.elapsed().as_secs_f64();
    let row = Row::from_outcome(&system, args.solver.method, parameter, opts.panels, &outcome);
    let report = SolveReport::new(row, outcome, elapsed);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let text = match args.output.format {
        Format::Table => run_table(&report, system.description()),
        Format::Csv => rows_csv(std::slice::from_ref(&report.row), system.unknowns())?,
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    emit(&args.output, &text)
}

fn study(args: &StudyArgs) -> Result<(), CliError> {
    let method = args.solver.method;
    let sweep = match (method, &args.nodes, &args.degree) {
        (Method::Pc, Some(n), None) => n.clone(),
        (Method::Collocation, None, Some(m)) => m.clone(),
        (Method::Pc, _, _) => return Err(CliError::Usage("--method pc sweeps --nodes N1,N2,...".into())),
        (Method::Collocation, _, _) => return Err(CliError::Usage("--method collocation sweeps --degree M1,M2,...".into())),
    };
    if sweep.is_empty() {
        return Err(CliError::Usage("the sweep list is empty".into()));
    }
    if sweep.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(format!("sweep values must be strictly increasing, got {sweep:?}")));
    }
    let system = load(&args.problem)?;
    let points = sweep.iter().map(|&p| options(&args.solver, p).map(|o| (p, o))).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Row> = points
        .par_iter()
        .map(|(p, opts)| match solve(&system, opts) {
            Ok(outcome) => {
                for w in &outcome.warnings {
                    eprintln!("warning: {}={p}: {w}", method.parameter_name());
                }
                Row::from_outcome(&system, method, *p, opts.panels, &outcome)
            }
            Err(e) => {
                eprintln!("error: {}={p}: {e}", method.parameter_name());
                Row::failed(system.name(), method, *p, opts.panels, e.to_string())
            }
        })
        .collect();
    let text = match args.output.format {
        Format::Table => study_table(&rows, method, system.unknowns()),
        Format::Csv => rows_csv(&rows, system.unknowns())?,
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    emit(&args.output, &text)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        return Err(CliError::PartialStudy { failed, total: rows.len() });
    }
    Ok(())
}

fn list(args: &ListArgs) -> Result<(), CliError> {
    let text = match args.format {
        Format::Table => {
            let width = BUILTINS.iter().map(|b| b.name.len()).max().unwrap_or(0);
            BUILTINS.iter().map(|b| format!("{:width$}  {}\n", b.name, b.summary)).collect()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "summary"])?;
            for b in BUILTINS {
                w.write_record([b.name, b.summary])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8")
        }
        Format::Json => {
            let entries: Vec<_> =
                BUILTINS.iter().map(|b| serde_json::json!({ "name": b.name, "summary": b.summary })).collect();
            serde_json::to_string_pretty(&entries)? + "\n"
        }
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Study(args) => study(args),
        Command::List(args) => list(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Solver(Error::Validation(diags)) = &e {
                eprintln!("error: system failed validation");
                for d in diags {
                    eprintln!("  {d}");
                }
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
