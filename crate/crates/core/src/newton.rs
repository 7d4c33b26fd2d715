//! Modified Newton-Kantorovich iteration.
//!
//! The kernels are frozen once along the initial guess `X0`, so the inner
//! scheme (step matrices or collocation matrix) is assembled and factorised
//! once. Each iteration only rebuilds the right-hand side `Psi` from the
//! current iterate and re-solves:
//!
//! `sum_j int K_ij G_x(s, x0) x^{m+1} ds = f_i + sum_j int K_ij [G_x(s, x0) x^m - G(s, x^m)] ds`.
//!
//! For a linear system the right-hand side is `f` every time, so the second
//! iterate repeats the first and the loop stops there.

use serde::Serialize;

use crate::collocation::{CollocationScheme, COLLOCATION_PANELS};
use crate::error::{Error, Result};
use crate::pc::{Mesh, PcScheme};
use crate::problem::{LinearizedSystem, RightHandSide, VolterraSystem};
use crate::quadrature::DEFAULT_PANELS;
use crate::report::{error_summary, sup_distance, ErrorSummary, SAMPLES};
use crate::solution::{Approximation, ExprFunctions, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum InnerSolver {
    /// Piecewise-constant steps on a uniform mesh of `cells` cells.
    PiecewiseConstant { cells: usize },
    /// Polynomials of degree `degree`.
    Collocation { degree: usize },
}

impl InnerSolver {
    /// Midpoint panels per band segment used unless overridden.
    pub fn default_panels(&self) -> usize {
        match self {
            InnerSolver::PiecewiseConstant { .. } => DEFAULT_PANELS,
            InnerSolver::Collocation { .. } => COLLOCATION_PANELS,
        }
    }

    pub fn parameter(&self) -> usize {
        match *self {
            InnerSolver::PiecewiseConstant { cells } => cells,
            InnerSolver::Collocation { degree } => degree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub inner: InnerSolver,
    pub max_iters: usize,
    /// Stop once the sup-norm of the correction drops to this value.
    pub tol: f64,
    /// Midpoint panels per band segment.
    pub panels: usize,
    /// Growth of the correction over three consecutive iterations that
    /// counts as divergence.
    pub divergence_factor: f64,
    pub samples: usize,
}

impl NewtonOptions {
    pub fn new(inner: InnerSolver) -> Self {
        NewtonOptions { inner, max_iters: 20, tol: 1e-12, panels: inner.default_panels(), divergence_factor: 1e3, samples: SAMPLES }
    }

    pub fn max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    /// `sup |X^m - X^{m-1}|` over the component domains.
    pub correction: f64,
    pub errors: Option<ErrorSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The correction fell below the tolerance.
    Converged,
    /// The iteration budget ran out first.
    MaxIterations,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl IterationReport {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn corrections(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.correction).collect()
    }

    /// `correction_{m+1} / correction_m`.
    pub fn ratios(&self) -> Vec<f64> {
        self.records.windows(2).map(|w| w[1].correction / w[0].correction).collect()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub solution: Solution,
    pub report: IterationReport,
    pub warnings: Vec<String>,
}

enum Scheme {
    Pc(PcScheme),
    Collocation(CollocationScheme),
}

impl Scheme {
    fn assemble(lin: &LinearizedSystem<'_>, inner: InnerSolver) -> Result<Self> {
        Ok(match inner {
            InnerSolver::PiecewiseConstant { cells } => {
                if cells < 2 {
                    return Err(Error::InvalidArgument("at least 2 cells are required".into()));
                }
                Scheme::Pc(PcScheme::assemble(lin, Mesh::uniform(lin.system().horizon(), cells)?)?)
            }
            InnerSolver::Collocation { degree } => Scheme::Collocation(CollocationScheme::assemble(lin, degree)?),
        })
    }

    fn solve(&self, rhs: &dyn RightHandSide) -> Result<Solution> {
        match self {
            Scheme::Pc(s) => s.solve(rhs).map(Solution::PiecewiseConstant),
            Scheme::Collocation(s) => s.solve(rhs).map(Solution::Polynomial),
        }
    }

    fn warnings(&self) -> Vec<String> {
        match self {
            Scheme::Pc(_) => Vec::new(),
            Scheme::Collocation(s) => s.warnings(),
        }
    }
}

fn diverging(records: &[IterationRecord], factor: f64) -> bool {
    let Some(last) = records.last() else {
        return false;
    };
    if !last.correction.is_finite() {
        return true;
    }
    let n = records.len();
    n >= 4
        && records[n - 4..].windows(2).all(|w| w[1].correction > w[0].correction)
        && last.correction > factor * records[n - 4].correction
}

/// Runs the iteration from the system's own initial guess.
pub fn solve(system: &VolterraSystem, options: &NewtonOptions) -> Result<NewtonOutcome> {
    solve_from(system, system.guess(), options)
}

/// Runs the iteration from `guess`, which also fixes the frozen kernels.
pub fn solve_from(system: &VolterraSystem, guess: &ExprFunctions, options: &NewtonOptions) -> Result<NewtonOutcome> {
    if options.max_iters == 0 {
        return Err(Error::InvalidArgument("at least one iteration is required".into()));
    }
    if !(options.tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be non-negative", options.tol)));
    }
    let lin = LinearizedSystem::new(system, guess, options.panels)?;
    let scheme = Scheme::assemble(&lin, options.inner)?;
    let warnings = scheme.warnings();
    let domains = system.component_domains()?;
    let samples = options.samples;

    let mut records = Vec::new();
    let mut previous: Option<Solution> = None;
    for iteration in 1..=options.max_iters {
        let current: &dyn Approximation = match &previous {
            Some(s) => s,
            None => guess,
        };
        let next = match scheme.solve(&lin.psi(current)) {
            Err(Error::NonFiniteIntegrand { .. }) if previous.is_some() => {
                return Err(Error::Diverged(Box::new(IterationReport { records, stop: StopReason::Diverged })));
            }
            other => other?,
        };
        let correction = sup_distance(&next, current, &domains, samples)?;
        let errors = error_summary(system, &next, samples)?;
        records.push(IterationRecord { iteration, correction, errors });
        previous = Some(next);
        if correction <= options.tol {
            let report = IterationReport { records, stop: StopReason::Converged };
            return Ok(NewtonOutcome { solution: previous.unwrap(), report, warnings });
        }
        if diverging(&records, options.divergence_factor) {
            return Err(Error::Diverged(Box::new(IterationReport { records, stop: StopReason::Diverged })));
        }
    }
    let report = IterationReport { records, stop: StopReason::MaxIterations };
    Ok(NewtonOutcome { solution: previous.unwrap(), report, warnings })
}
