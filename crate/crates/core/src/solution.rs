use serde::Serialize;

use crate::collocation::PolynomialSolution;
use crate::error::Result;
use crate::expr::{Expr, Vars};
use crate::pc::PiecewiseConstantSolution;

/// A vector of functions of `t`, one per unknown component.
pub trait Approximation: Sync {
    fn components(&self) -> usize;

    fn value(&self, component: usize, t: f64) -> Result<f64>;

    /// Points where the functions may jump. Quadrature splits there.
    fn breakpoints(&self) -> &[f64] {
        &[]
    }
}

/// Component functions given as formulas in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprFunctions {
    exprs: Vec<Expr>,
}

impl ExprFunctions {
    pub fn new(exprs: Vec<Expr>) -> Self {
        ExprFunctions { exprs }
    }

    pub fn zeros(components: usize) -> Self {
        ExprFunctions { exprs: vec![Expr::Const(0.0); components] }
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }
}

impl Approximation for ExprFunctions {
    fn components(&self) -> usize {
        self.exprs.len()
    }

    fn value(&self, component: usize, t: f64) -> Result<f64> {
        Ok(self.exprs[component].eval(&Vars::t(t))?)
    }
}

/// Output of either inner solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Solution {
    PiecewiseConstant(PiecewiseConstantSolution),
    Polynomial(PolynomialSolution),
}

impl Approximation for Solution {
    fn components(&self) -> usize {
        match self {
            Solution::PiecewiseConstant(s) => s.components(),
            Solution::Polynomial(p) => p.components(),
        }
    }

    fn value(&self, component: usize, t: f64) -> Result<f64> {
        match self {
            Solution::PiecewiseConstant(s) => s.value(component, t),
            Solution::Polynomial(p) => p.value(component, t),
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            Solution::PiecewiseConstant(s) => s.breakpoints(),
            Solution::Polynomial(p) => p.breakpoints(),
        }
    }
}
