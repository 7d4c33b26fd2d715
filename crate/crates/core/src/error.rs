use thiserror::Error;

use crate::expr::ExprError;
use crate::linalg::LinalgError;
use crate::newton::IterationReport;
use crate::problem::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("integrand is not finite at s = {abscissa}")]
    NonFiniteIntegrand { abscissa: f64 },
    #[error("invalid integration request: [{lo}, {hi}] with {panels} panels")]
    InvalidInterval { lo: f64, hi: f64, panels: usize },
    #[error("discontinuity curves out of order at t = {t}: alpha_{band}(t) = {lower} > alpha_{}(t) = {upper}", band + 1)]
    CurveOrder { t: f64, band: usize, lower: f64, upper: f64 },
    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("unknown builtin problem `{0}`")]
    UnknownBuiltin(String),
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("system failed validation with {} diagnostic(s); first: {}", .0.len(), .0[0])]
    Validation(Vec<Diagnostic>),
    #[error("the t = 0 start-value system is singular (unique solvability is assumed): {0}")]
    StartSystem(#[source] LinalgError),
    #[error("step {step}: singular step system: {source}")]
    StepSingular { step: usize, source: LinalgError },
    #[error("step {step}: step system is {equations}x{unknowns} with band map {band_map:?}")]
    StepNotSquare { step: usize, equations: usize, unknowns: usize, band_map: Vec<usize> },
    #[error("step {step}: history refers to unassigned cell {cell} of component {component}")]
    UnassignedHistory { step: usize, component: usize, cell: usize },
    #[error("collocation matrix of degree {degree} is singular: {source}")]
    CollocationSingular { degree: usize, source: LinalgError },
    #[error("iteration diverged after {} iterations", .0.records.len())]
    Diverged(Box<IterationReport>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
