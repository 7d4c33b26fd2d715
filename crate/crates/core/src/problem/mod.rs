//! Systems of first-kind Volterra equations
//!
//! ```text
//! sum_j  integral_{alpha_{j-1}(t)}^{alpha_j(t)} K_ij(t,s) G_ij(s, x_{u(j)}(s)) ds = f_i(t)
//! ```
//!
//! where `alpha_0 = 0`, `alpha_n = t` and `u` maps each band to the unknown
//! component living there.

mod builtin;
mod config;
mod linearize;

pub use builtin::{builtin, builtin_names, BUILTINS};
pub use config::{load_config, SystemSpec};
pub use linearize::{LinearizedSystem, Psi, RightHandSide, SourceTerm};
pub(crate) use linearize::solve_start;

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::expr::{Expr, ExprError, Var, Vars};
use crate::solution::ExprFunctions;

/// Points per interval used by [`VolterraSystem::validate`].
pub const VALIDATION_SAMPLES: usize = 1000;
const ZERO_TOLERANCE: f64 = 1e-12;
const DIAGONAL_TOLERANCE: f64 = 1e-10;
const FD_STEP: f64 = 1e-6;
const FD_TOLERANCE: f64 = 1e-6;

/// A formula together with its symbolic derivative in one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Differentiated {
    pub expr: Expr,
    pub derivative: Expr,
}

impl Differentiated {
    pub fn new(expr: Expr, wrt: Var) -> Self {
        let derivative = expr.differentiate(wrt);
        Differentiated { expr, derivative }
    }
}

/// The interior discontinuity curves `alpha_1 .. alpha_{n-1}` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFamily {
    horizon: f64,
    curves: Vec<Differentiated>,
}

impl CurveFamily {
    pub fn new(horizon: f64, curves: Vec<Expr>) -> Self {
        let curves = curves.into_iter().map(|e| Differentiated::new(e, Var::T)).collect();
        CurveFamily { horizon, curves }
    }

    pub fn parse(horizon: f64, curves: &[&str]) -> Result<Self> {
        let exprs = curves.iter().map(|c| Expr::parse(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(horizon, exprs))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn bands(&self) -> usize {
        self.curves.len() + 1
    }

    pub fn interior(&self) -> &[Differentiated] {
        &self.curves
    }

    /// `alpha_j(t)` for `j` in `0..=bands`.
    pub fn alpha(&self, j: usize, t: f64) -> Result<f64, ExprError> {
        if j == 0 {
            Ok(0.0)
        } else if j == self.bands() {
            Ok(t)
        } else {
            self.curves[j - 1].expr.eval(&Vars::t(t))
        }
    }

    pub fn alpha_prime(&self, j: usize, t: f64) -> Result<f64, ExprError> {
        if j == 0 {
            Ok(0.0)
        } else if j == self.bands() {
            Ok(1.0)
        } else {
            self.curves[j - 1].derivative.eval(&Vars::t(t))
        }
    }
}

/// `G_ij(s, x)` with its partial derivative in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    g: Differentiated,
    identity: bool,
}

impl Nonlinearity {
    pub fn new(expr: Expr) -> Self {
        let identity = expr == Expr::Var(Var::X);
        Nonlinearity { g: Differentiated::new(expr, Var::X), identity }
    }

    pub fn expr(&self) -> &Expr {
        &self.g.expr
    }

    pub fn eval(&self, s: f64, x: f64) -> Result<f64, ExprError> {
        self.g.expr.eval(&Vars::sx(s, x))
    }

    pub fn eval_dx(&self, s: f64, x: f64) -> Result<f64, ExprError> {
        self.g.derivative.eval(&Vars::sx(s, x))
    }

    /// `G(s, x) = x`, for which the Newton bracket vanishes identically.
    pub fn is_identity(&self) -> bool {
        self.identity
    }
}

/// A validated-shape system of equations, see the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSystem {
    name: String,
    description: String,
    curves: CurveFamily,
    kernels: Vec<Vec<Expr>>,
    nonlinearities: Vec<Vec<Nonlinearity>>,
    rhs: Vec<Differentiated>,
    unknown_of_band: Vec<usize>,
    exact: Option<ExprFunctions>,
    guess: ExprFunctions,
}

/// One failed condition found by [`VolterraSystem::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub condition: &'static str,
    pub t: Option<f64>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.t {
            Some(t) => write!(f, "[{}] {} (at t = {t})", self.condition, self.message),
            None => write!(f, "[{}] {}", self.condition, self.message),
        }
    }
}

impl VolterraSystem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn horizon(&self) -> f64 {
        self.curves.horizon
    }

    pub fn curves(&self) -> &CurveFamily {
        &self.curves
    }

    pub fn bands(&self) -> usize {
        self.curves.bands()
    }

    pub fn equations(&self) -> usize {
        self.rhs.len()
    }

    /// Number of unknown components; equal to the number of equations.
    pub fn unknowns(&self) -> usize {
        self.rhs.len()
    }

    /// Zero-based component carried by each band.
    pub fn unknown_of_band(&self) -> &[usize] {
        &self.unknown_of_band
    }

    pub fn kernel(&self, i: usize, j: usize) -> &Expr {
        &self.kernels[i][j]
    }

    pub fn nonlinearity(&self, i: usize, j: usize) -> &Nonlinearity {
        &self.nonlinearities[i][j]
    }

    pub fn source(&self, i: usize) -> &Differentiated {
        &self.rhs[i]
    }

    pub fn exact(&self) -> Option<&ExprFunctions> {
        self.exact.as_ref()
    }

    pub fn guess(&self) -> &ExprFunctions {
        &self.guess
    }

    /// True when every `G_ij(s, x) = x`.
    pub fn is_linear(&self) -> bool {
        self.nonlinearities.iter().flatten().all(Nonlinearity::is_identity)
    }

    pub fn with_guess(mut self, guess: ExprFunctions) -> Self {
        self.guess = guess;
        self
    }

    pub fn eval_kernel(&self, i: usize, j: usize, t: f64, s: f64) -> Result<f64, ExprError> {
        self.kernels[i][j].eval(&Vars::ts(t, s))
    }

    /// Right end of the interval on which component `u` is defined: the
    /// furthest curve bounding one of its bands at `T`.
    pub fn component_domain(&self, u: usize) -> Result<f64, ExprError> {
        let mut end = 0.0f64;
        for (j, &owner) in self.unknown_of_band.iter().enumerate() {
            if owner == u {
                end = end.max(self.curves.alpha(j + 1, self.horizon())?);
            }
        }
        Ok(end)
    }

    pub fn component_domains(&self) -> Result<Vec<f64>, ExprError> {
        (0..self.unknowns()).map(|u| self.component_domain(u)).collect()
    }

    /// Checks the standing assumptions on a sampling grid. Returns every
    /// violation found; an empty list means the system is admissible.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let horizon = self.horizon();
        let grid: Vec<f64> =
            (0..VALIDATION_SAMPLES).map(|k| horizon * k as f64 / (VALIDATION_SAMPLES - 1) as f64).collect();
        let bands = self.bands();

        let mut push = |condition, t, message: String| out.push(Diagnostic { condition, t, message });

        // curves
        for j in 1..bands {
            match self.curves.alpha(j, 0.0) {
                Ok(v) if v.abs() <= ZERO_TOLERANCE => {}
                Ok(v) => push("curve-origin", Some(0.0), format!("alpha_{j}(0) \u{2260} 0, value {v}")),
                Err(e) => push("evaluation", Some(0.0), format!("alpha_{j}: {e}")),
            }
        }
        let mut previous: Vec<Option<f64>> = vec![None; bands + 1];
        'grid: for &t in &grid {
            let mut values = Vec::with_capacity(bands + 1);
            for j in 0..=bands {
                match self.curves.alpha(j, t) {
                    Ok(v) => values.push(v),
                    Err(e) => {
                        push("evaluation", Some(t), format!("alpha_{j}: {e}"));
                        break 'grid;
                    }
                }
            }
            for j in 1..=bands {
                if values[j] < values[j - 1] - ZERO_TOLERANCE {
                    push(
                        "curve-order",
                        Some(t),
                        format!("alpha_{}(t) = {} > alpha_{j}(t) = {}", j - 1, values[j - 1], values[j]),
                    );
                    break 'grid;
                }
            }
            for j in 1..bands {
                if let Some(prev) = previous[j] {
                    if values[j] < prev - ZERO_TOLERANCE {
                        push("curve-monotone", Some(t), format!("alpha_{j} decreases to {}", values[j]));
                        break 'grid;
                    }
                }
                previous[j] = Some(values[j]);
            }
        }
        let slopes: Vec<f64> = (0..=bands)
            .map(|j| self.curves.alpha_prime(j, 0.0).unwrap_or(f64::NAN))
            .collect();
        for j in 2..bands {
            if !(slopes[j - 1] <= slopes[j]) {
                push(
                    "curve-slope-order",
                    Some(0.0),
                    format!("alpha'_{}(0) = {} > alpha'_{j}(0) = {}", j - 1, slopes[j - 1], slopes[j]),
                );
            }
        }
        if bands > 1 && !(slopes[bands - 1] < 1.0) {
            push(
                "curve-slope-bound",
                Some(0.0),
                format!("alpha'_{}(0) = {} is not below 1", bands - 1, slopes[bands - 1]),
            );
        }

        // right-hand sides
        for (i, f) in self.rhs.iter().enumerate() {
            match f.expr.eval(&Vars::t(0.0)) {
                Ok(v) if v.abs() <= ZERO_TOLERANCE => {}
                Ok(v) => push("rhs-origin", Some(0.0), format!("f_{}(0) \u{2260} 0, value {v}", i + 1)),
                Err(e) => push("evaluation", Some(0.0), format!("f_{}: {e}", i + 1)),
            }
        }

        // diagonal kernel of the last band
        for i in 0..self.equations() {
            for &t in &grid {
                match self.eval_kernel(i, bands - 1, t, t) {
                    Ok(v) if v.abs() > DIAGONAL_TOLERANCE => {}
                    Ok(v) => {
                        push("kernel-diagonal", Some(t), format!("K_{}{}(t,t) = {v}", i + 1, bands));
                        break;
                    }
                    Err(e) => {
                        push("evaluation", Some(t), format!("K_{}{}: {e}", i + 1, bands));
                        break;
                    }
                }
            }
        }

        // band map
        for u in 0..self.unknowns() {
            if !self.unknown_of_band.contains(&u) {
                push("band-map", None, format!("component {} is not carried by any band", u + 1));
            }
        }

        // symbolic derivatives against central differences
        let fd_points: Vec<f64> = (1..=50).map(|k| horizon * k as f64 / 51.0).collect();
        let mut check = |label: String, f: &dyn Fn(f64) -> Result<f64, ExprError>, d: &dyn Fn(f64) -> Result<f64, ExprError>, at: f64| {
            let (Ok(p), Ok(m), Ok(exact)) = (f(at + FD_STEP), f(at - FD_STEP), d(at)) else {
                return;
            };
            let fd = (p - m) / (2.0 * FD_STEP);
            if (fd - exact).abs() > FD_TOLERANCE * exact.abs().max(1.0) {
                out.push(Diagnostic {
                    condition: "derivative",
                    t: Some(at),
                    message: format!("{label}: symbolic {exact} vs finite difference {fd}"),
                });
            }
        };
        for &t in &fd_points {
            for (i, f) in self.rhs.iter().enumerate() {
                check(
                    format!("f'_{}", i + 1),
                    &|v| f.expr.eval(&Vars::t(v)),
                    &|v| f.derivative.eval(&Vars::t(v)),
                    t,
                );
            }
            for (j, c) in self.curves.curves.iter().enumerate() {
                check(
                    format!("alpha'_{}", j + 1),
                    &|v| c.expr.eval(&Vars::t(v)),
                    &|v| c.derivative.eval(&Vars::t(v)),
                    t,
                );
            }
            for i in 0..self.equations() {
                for j in 0..bands {
                    let u = self.unknown_of_band[j];
                    let mut xs = vec![0.5];
                    if let Ok(x) = crate::solution::Approximation::value(&self.guess, u, t) {
                        xs.push(x);
                    }
                    if let Some(Ok(x)) = self.exact.as_ref().map(|e| crate::solution::Approximation::value(e, u, t)) {
                        xs.push(x);
                    }
                    let g = &self.nonlinearities[i][j];
                    for x in xs {
                        check(
                            format!("G_{}{}_x at x = {x}", i + 1, j + 1),
                            &|v| g.eval(t, v),
                            &|v| g.eval_dx(t, v),
                            x,
                        );
                    }
                }
            }
        }
        out
    }

    /// [`validate`](Self::validate), turned into an error when anything fails.
    pub fn ensure_valid(&self) -> Result<()> {
        let diagnostics = self.validate();
        if diagnostics.is_empty() {
            Ok(())
        } else {
            Err(crate::Error::Validation(diagnostics))
        }
    }
}
