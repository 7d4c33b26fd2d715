use serde::Serialize;
use volterra::{ComponentError, InnerSolver, NewtonOutcome, Solution, StopReason, VolterraSystem};

use crate::args::Method;

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pc => "pc",
            Method::Collocation => "collocation",
        }
    }

    pub fn inner(self, parameter: usize) -> InnerSolver {
        match self {
            Method::Pc => InnerSolver::PiecewiseConstant { cells: parameter },
            Method::Collocation => InnerSolver::Collocation { degree: parameter },
        }
    }

    pub fn parameter_name(self) -> &'static str {
        match self {
            Method::Pc => "N",
            Method::Collocation => "m",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub component: usize,
    pub error: f64,
    pub t_max: f64,
}

/// One solve, as a flat row. Failed solves keep the identifying fields and
/// the message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub problem: String,
    pub method: &'static str,
    pub parameter: usize,
    pub panels: usize,
    pub status: &'static str,
    pub iterations: Option<usize>,
    pub stop: Option<StopReason>,
    pub components: Vec<ComponentReport>,
    pub aggregate: Option<f64>,
    pub correction: Option<f64>,
    pub message: Option<String>,
}

impl Row {
    pub fn from_outcome(system: &VolterraSystem, method: Method, parameter: usize, panels: usize, outcome: &NewtonOutcome) -> Self {
        let last = outcome.report.last();
        let errors = last.and_then(|r| r.errors.as_ref());
        Row {
            problem: system.name().to_string(),
            method: method.name(),
            parameter,
            panels,
            status: "ok",
            iterations: Some(outcome.report.iterations()),
            stop: Some(outcome.report.stop),
            components: errors.map_or_else(Vec::new, |e| components(&e.components)),
            aggregate: errors.map(|e| e.aggregate),
            correction: last.map(|r| r.correction),
            message: None,
        }
    }

    pub fn failed(problem: &str, method: Method, parameter: usize, panels: usize, message: String) -> Self {
        Row {
            problem: problem.to_string(),
            method: method.name(),
            parameter,
            panels,
            status: "error",
            iterations: None,
            stop: None,
            components: Vec::new(),
            aggregate: None,
            correction: None,
            message: Some(message),
        }
    }
}

fn components(errors: &[ComponentError]) -> Vec<ComponentReport> {
    errors
        .iter()
        .enumerate()
        .map(|(i, c)| ComponentReport { component: i + 1, error: c.error, t_max: c.t_max })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub correction: f64,
    pub aggregate: Option<f64>,
}

/// Full report of a single solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub row: Row,
    pub history: Vec<HistoryEntry>,
    pub ratios: Vec<f64>,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
    pub solution: Solution,
}

impl SolveReport {
    pub fn new(row: Row, outcome: NewtonOutcome, wall_time_s: f64) -> Self {
        let history = outcome
            .report
            .records
            .iter()
            .map(|r| HistoryEntry {
                iteration: r.iteration,
                correction: r.correction,
                aggregate: r.errors.as_ref().map(|e| e.aggregate),
            })
            .collect();
        SolveReport {
            row,
            history,
            ratios: outcome.report.ratios(),
            warnings: outcome.warnings,
            wall_time_s,
            solution: outcome.solution,
        }
    }
}

/// Six significant digits.
pub fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

fn opt6(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), sig6)
}

/// Plain text table with right-aligned columns.
pub fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Study table in the layout `param | eps_i.. | t_max_i.. | eps | its`.
pub fn study_table(rows: &[Row], method: Method, components: usize) -> String {
    let mut header = vec![method.parameter_name().to_string()];
    header.extend((1..=components).map(|i| format!("eps_{i}")));
    header.extend((1..=components).map(|i| format!("t_max_{i}")));
    header.extend(["eps".to_string(), "its".to_string()]);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.parameter.to_string()];
            if r.status != "ok" {
                cells.push(format!("error: {}", r.message.as_deref().unwrap_or("")));
                return cells;
            }
            cells.extend((0..components).map(|i| opt6(r.components.get(i).map(|c| c.error))));
            cells.extend((0..components).map(|i| r.components.get(i).map_or("-".into(), |c| format!("{:.4}", c.t_max))));
            cells.push(opt6(r.aggregate));
            cells.push(r.iterations.map_or("-".into(), |n| n.to_string()));
            cells
        })
        .collect();
    render_table(&header, &body)
}

pub fn run_table(report: &SolveReport, description: &str) -> String {
    let r = &report.row;
    let mut out = format!("problem    {} ({description})\n", r.problem);
    out.push_str(&format!("method     {} {}={} panels={}\n", r.method, parameter_label(r.method), r.parameter, r.panels));
    out.push_str(&format!(
        "iterations {} ({})\n",
        r.iterations.unwrap_or(0),
        r.stop.map_or("-", stop_name)
    ));
    out.push_str(&format!("wall time  {:.3}s\n", report.wall_time_s));
    for w in &report.warnings {
        out.push_str(&format!("warning    {w}\n"));
    }
    out.push('\n');
    if r.components.is_empty() {
        out.push_str("no exact solution: errors not available\n");
    } else {
        let rows: Vec<Vec<String>> = r
            .components
            .iter()
            .map(|c| vec![c.component.to_string(), sig6(c.error), format!("{:.4}", c.t_max)])
            .collect();
        out.push_str(&render_table(&["i".into(), "eps_i".into(), "t_max_i".into()], &rows));
        out.push_str(&format!("eps = {}\n", opt6(r.aggregate)));
    }
    out.push('\n');
    let rows: Vec<Vec<String>> = report
        .history
        .iter()
        .map(|h| vec![h.iteration.to_string(), sig6(h.correction), opt6(h.aggregate)])
        .collect();
    out.push_str(&render_table(&["it".into(), "correction".into(), "eps".into()], &rows));
    out
}

fn parameter_label(method: &str) -> &'static str {
    if method == "pc" {
        "N"
    } else {
        "m"
    }
}

pub fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Converged => "converged",
        StopReason::MaxIterations => "max-iterations",
        StopReason::Diverged => "diverged",
    }
}

/// CSV with one row per solve; numbers at full precision, no timings.
pub fn rows_csv(rows: &[Row], components: usize) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> =
        ["problem", "method", "parameter", "panels", "status", "iterations", "stop"].map(String::from).to_vec();
    header.extend((1..=components).map(|i| format!("eps_{i}")));
    header.extend((1..=components).map(|i| format!("t_max_{i}")));
    header.extend(["eps", "correction", "message"].map(String::from));
    w.write_record(&header)?;
    let num = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for r in rows {
        let mut rec = vec![
            r.problem.clone(),
            r.method.to_string(),
            r.parameter.to_string(),
            r.panels.to_string(),
            r.status.to_string(),
            r.iterations.map_or_else(String::new, |n| n.to_string()),
            r.stop.map_or_else(String::new, |s| stop_name(s).to_string()),
        ];
        rec.extend((0..components).map(|i| num(r.components.get(i).map(|c| c.error))));
        rec.extend((0..components).map(|i| num(r.components.get(i).map(|c| c.t_max))));
        rec.push(num(r.aggregate));
        rec.push(num(r.correction));
        rec.push(r.message.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
