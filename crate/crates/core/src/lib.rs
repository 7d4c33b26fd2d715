//! Solvers for nonlinear first-kind Volterra systems
//!
//! `sum_j int_{alpha_{j-1}(t)}^{alpha_j(t)} K_ij(t,s) G_ij(s, x_{u(j)}(s)) ds = f_i(t)`,
//! `0 <= t <= T`, `alpha_0 = 0`, `alpha_n = t`,
//!
//! whose kernels jump across the curves `alpha_j`. A modified
//! Newton-Kantorovich iteration reduces each step to a linear system with
//! kernels frozen along the initial guess, which is solved either by
//! piecewise-constant steps or by polynomial collocation.
//!
//! ```
//! use volterra::{builtin, solve, InnerSolver, NewtonOptions};
//!
//! let system = builtin("model01").unwrap();
//! let outcome = solve(&system, &NewtonOptions::new(InnerSolver::Collocation { degree: 5 })).unwrap();
//! let errors = outcome.report.last().unwrap().errors.as_ref().unwrap();
//! assert!(errors.aggregate < 1e-3);
//! ```

pub mod collocation;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod newton;
pub mod pc;
pub mod problem;
pub mod quadrature;
pub mod report;
pub mod solution;

pub use collocation::{solve_linear_collocation, CollocationScheme, PolynomialSolution};
pub use error::{Error, Result};
pub use expr::{Expr, ExprError};
pub use newton::{solve, solve_from, InnerSolver, IterationRecord, IterationReport, NewtonOptions, NewtonOutcome, StopReason};
pub use pc::{solve_linear_pc, Mesh, PcScheme, PiecewiseConstantSolution};
pub use problem::{builtin, builtin_names, load_config, BUILTINS, Diagnostic, LinearizedSystem, SourceTerm, SystemSpec, VolterraSystem};
pub use report::{ComponentError, ErrorSummary};
pub use solution::{Approximation, ExprFunctions, Solution};
