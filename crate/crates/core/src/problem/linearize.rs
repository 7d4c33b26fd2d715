use super::VolterraSystem;
use crate::error::{Error, Result};
use crate::expr::Vars;
use crate::linalg::{DenseMatrix, LuFactors};
use crate::quadrature::{decompose, split_nodes};
use crate::solution::Approximation;

/// Right-hand side of a linear system: values on `[0, T]` and the slope at
/// the origin, which fixes the start values.
pub trait RightHandSide: Sync {
    fn value(&self, equation: usize, t: f64) -> Result<f64>;

    fn slope_at_zero(&self, equation: usize) -> Result<f64>;

    fn values(&self, t: f64, equations: usize) -> Result<Vec<f64>> {
        (0..equations).map(|i| self.value(i, t)).collect()
    }
}

/// The system's own `f`.
#[derive(Debug, Clone, Copy)]
pub struct SourceTerm<'a> {
    system: &'a VolterraSystem,
}

impl<'a> SourceTerm<'a> {
    pub fn new(system: &'a VolterraSystem) -> Self {
        SourceTerm { system }
    }
}

impl RightHandSide for SourceTerm<'_> {
    fn value(&self, equation: usize, t: f64) -> Result<f64> {
        Ok(self.system.source(equation).expr.eval(&Vars::t(t))?)
    }

    fn slope_at_zero(&self, equation: usize) -> Result<f64> {
        Ok(self.system.source(equation).derivative.eval(&Vars::t(0.0))?)
    }
}

/// The system with its kernels frozen along an initial guess `X0`:
/// `K~_ij(t,s) = K_ij(t,s) * dG_ij/dx(s, x0_{u(j)}(s))`.
///
/// Only `X0` enters the frozen kernels, never the current iterate.
#[derive(Clone, Copy)]
pub struct LinearizedSystem<'a> {
    system: &'a VolterraSystem,
    guess: &'a dyn Approximation,
    panels: usize,
}

impl<'a> LinearizedSystem<'a> {
    pub fn new(system: &'a VolterraSystem, guess: &'a dyn Approximation, panels: usize) -> Result<Self> {
        if guess.components() != system.unknowns() {
            return Err(Error::InvalidArgument(format!(
                "initial guess has {} components, system has {} unknowns",
                guess.components(),
                system.unknowns()
            )));
        }
        if panels == 0 {
            return Err(Error::InvalidArgument("panel count must be positive".into()));
        }
        Ok(LinearizedSystem { system, guess, panels })
    }

    pub fn system(&self) -> &'a VolterraSystem {
        self.system
    }

    pub fn guess(&self) -> &'a dyn Approximation {
        self.guess
    }

    /// Midpoint panels per band segment.
    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn frozen_kernel(&self, i: usize, j: usize, t: f64, s: f64) -> Result<f64> {
        let k = self.system.eval_kernel(i, j, t, s)?;
        let g = self.system.nonlinearity(i, j);
        if g.is_identity() {
            return Ok(k);
        }
        let x0 = self.guess.value(self.system.unknown_of_band()[j], s)?;
        Ok(k * g.eval_dx(s, x0)?)
    }

    /// Coefficients of the start-value system obtained by differentiating
    /// each equation at `t = 0`:
    /// `sum_j K~_ij(0,0) (alpha'_j(0) - alpha'_{j-1}(0)) x_{u(j)}(0) = rhs'_i(0)`.
    /// Bands sharing a component add into the same column.
    pub fn start_matrix(&self) -> Result<DenseMatrix> {
        let sys = self.system;
        let curves = sys.curves();
        let mut a = DenseMatrix::zeros(sys.equations(), sys.unknowns());
        for j in 0..sys.bands() {
            let width = curves.alpha_prime(j + 1, 0.0)? - curves.alpha_prime(j, 0.0)?;
            let u = sys.unknown_of_band()[j];
            for i in 0..sys.equations() {
                a[(i, u)] += self.frozen_kernel(i, j, 0.0, 0.0)? * width;
            }
        }
        Ok(a)
    }

    pub fn start_factors(&self) -> Result<LuFactors> {
        LuFactors::new(self.start_matrix()?).map_err(Error::StartSystem)
    }

    /// Solves the start-value system for `x(0)`.
    pub fn initial_values(&self, rhs: &dyn RightHandSide) -> Result<Vec<f64>> {
        solve_start(&self.start_factors()?, rhs, self.system.equations())
    }

    /// Right-hand side of the frozen system for the iterate `Xm`.
    pub fn psi(&self, iterate: &'a dyn Approximation) -> Psi<'a> {
        Psi::new(*self, iterate)
    }
}

pub(crate) fn solve_start(factors: &LuFactors, rhs: &dyn RightHandSide, equations: usize) -> Result<Vec<f64>> {
    let b = (0..equations).map(|i| rhs.slope_at_zero(i)).collect::<Result<Vec<_>>>()?;
    factors.solve(&b).map_err(Error::StartSystem)
}

/// `Psi_i(t) = f_i(t) + sum_j int_band_j K_ij(t,s) [G_x(s, x0(s)) xm(s) - G(s, xm(s))] ds`,
/// the right-hand side of `P'(X0) X^{m+1} = P'(X0) X^m - P(X^m)`.
///
/// For `G(s,x) = x` the bracket vanishes and the band is skipped.
pub struct Psi<'a> {
    lin: LinearizedSystem<'a>,
    iterate: &'a dyn Approximation,
    breakpoints: Vec<f64>,
}

impl<'a> Psi<'a> {
    pub fn new(lin: LinearizedSystem<'a>, iterate: &'a dyn Approximation) -> Self {
        let mut breakpoints: Vec<f64> =
            iterate.breakpoints().iter().chain(lin.guess.breakpoints()).copied().collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Psi { lin, iterate, breakpoints }
    }

    fn bracket(&self, i: usize, j: usize, s: f64) -> Result<f64> {
        let sys = self.lin.system;
        let u = sys.unknown_of_band()[j];
        let g = sys.nonlinearity(i, j);
        let x0 = self.lin.guess.value(u, s)?;
        let xm = self.iterate.value(u, s)?;
        Ok(g.eval_dx(s, x0)? * xm - g.eval(s, xm)?)
    }
}

impl RightHandSide for Psi<'_> {
    fn value(&self, i: usize, t: f64) -> Result<f64> {
        let sys = self.lin.system;
        let mut value = sys.source(i).expr.eval(&Vars::t(t))?;
        if t == 0.0 {
            return Ok(value);
        }
        let bands = decompose(t, sys.curves())?;
        for seg in &bands.segments {
            let j = seg.band;
            if seg.is_empty() || sys.nonlinearity(i, j).is_identity() {
                continue;
            }
            let mut integral = 0.0;
            for (s, w) in split_nodes(seg.lo, seg.hi, self.lin.panels, &self.breakpoints)? {
                let v = sys.eval_kernel(i, j, t, s)? * self.bracket(i, j, s)?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand { abscissa: s });
                }
                integral += v * w;
            }
            value += integral;
        }
        Ok(value)
    }

    fn slope_at_zero(&self, i: usize) -> Result<f64> {
        let sys = self.lin.system;
        let curves = sys.curves();
        let mut slope = sys.source(i).derivative.eval(&Vars::t(0.0))?;
        for j in 0..sys.bands() {
            if sys.nonlinearity(i, j).is_identity() {
                continue;
            }
            let width = curves.alpha_prime(j + 1, 0.0)? - curves.alpha_prime(j, 0.0)?;
            slope += sys.eval_kernel(i, j, 0.0, 0.0)? * self.bracket(i, j, 0.0)? * width;
        }
        Ok(slope)
    }
}
