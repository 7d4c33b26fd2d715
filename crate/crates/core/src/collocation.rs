//! Polynomial collocation.
//!
//! Each component is sought as `x_u(t) = sum_{l=0..m} A_ul t^l`. The
//! constant terms come from the start-value system at `t = 0`; the rest are
//! fixed by imposing every equation at the nodes `t_k = kT/m`, `k = 1..m`,
//! which gives a square system of size `n*m` in the moments
//! `C_ikjl = int_{alpha_{j-1}(t_k)}^{alpha_j(t_k)} K~_ij(t_k, s) s^l ds`.
//!
//! Internally the basis is `(t/T)^l`, which keeps the moments of order `m`
//! bounded for `T > 1`; coefficients are converted back on output.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::problem::{LinearizedSystem, RightHandSide};
use crate::quadrature::{decompose, split_nodes};
use crate::solution::Approximation;

/// Default midpoint panels per band segment for the moments. The
/// collocation error falls below the quadrature error well before `m = 8`.
pub const COLLOCATION_PANELS: usize = 8000;

/// Degrees from which the monomial system is flagged as ill-conditioned.
pub const CONDITION_WARNING_DEGREE: usize = 12;

/// Coefficients `A_ul` of one polynomial per component, in powers of `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialSolution {
    degree: usize,
    coefficients: Vec<Vec<f64>>,
}

impl PolynomialSolution {
    pub fn new(coefficients: Vec<Vec<f64>>) -> Self {
        let degree = coefficients.first().map_or(0, |c| c.len().saturating_sub(1));
        PolynomialSolution { degree, coefficients }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self, component: usize) -> &[f64] {
        &self.coefficients[component]
    }

    pub fn eval(&self, component: usize, t: f64) -> f64 {
        self.coefficients[component].iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }
}

impl Approximation for PolynomialSolution {
    fn components(&self) -> usize {
        self.coefficients.len()
    }

    fn value(&self, component: usize, t: f64) -> Result<f64> {
        Ok(self.eval(component, t))
    }
}

pub fn eval_poly(solution: &PolynomialSolution, i: usize, t: f64) -> f64 {
    solution.eval(i, t)
}

/// Position of `C_ikjl` in the flattened matrix; `i`, `j` are zero-based
/// component indices, `k`, `l` run over `1..=m`.
pub fn flatten(i: usize, k: usize, j: usize, l: usize, m: usize) -> (usize, usize) {
    (i * m + (k - 1), j * m + (l - 1))
}

pub fn unflatten(row: usize, col: usize, m: usize) -> (usize, usize, usize, usize) {
    (row / m, row % m + 1, col / m, col % m + 1)
}

/// `t_k = kT/m`, `k = 1..=m`.
pub fn collocation_nodes(horizon: f64, m: usize) -> Vec<f64> {
    (1..=m).map(|k| horizon * k as f64 / m as f64).collect()
}

/// The flattened block system `C A = F`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
}

/// All moments `int_band K~_ij(t, s) w(s)^l ds` for `l = 0..=m` in one pass.
fn band_moments(
    lin: &LinearizedSystem<'_>,
    i: usize,
    j: usize,
    t: f64,
    lo: f64,
    hi: f64,
    m: usize,
    scale: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; m + 1];
    for (s, w) in split_nodes(lo, hi, lin.panels(), lin.guess().breakpoints())? {
        let k = lin.frozen_kernel(i, j, t, s)?;
        if !k.is_finite() {
            return Err(Error::NonFiniteIntegrand { abscissa: s });
        }
        let base = s / scale;
        let mut power = k * w;
        for slot in out.iter_mut() {
            *slot += power;
            power *= base;
        }
    }
    Ok(out)
}

/// `C_ikjl` in the plain monomial basis, at `t = nodes[k - 1]`.
pub fn moment(lin: &LinearizedSystem<'_>, i: usize, k: usize, j: usize, l: usize, nodes: &[f64]) -> Result<f64> {
    let t = nodes[k - 1];
    let bands = decompose(t, lin.system().curves())?;
    let seg = bands.segments[j];
    Ok(band_moments(lin, i, j, t, seg.lo, seg.hi, l, 1.0)?[l])
}

/// `F_ik = rhs_i(t_k) - sum_j A_{u(j)0} int_band_j K~_ij(t_k, s) ds`.
pub fn rhs_entry(
    lin: &LinearizedSystem<'_>,
    rhs: &dyn RightHandSide,
    i: usize,
    k: usize,
    nodes: &[f64],
    start: &[f64],
) -> Result<f64> {
    let t = nodes[k - 1];
    let sys = lin.system();
    let mut value = rhs.value(i, t)?;
    for seg in decompose(t, sys.curves())?.segments {
        let m0 = band_moments(lin, i, seg.band, t, seg.lo, seg.hi, 0, 1.0)?[0];
        value -= start[sys.unknown_of_band()[seg.band]] * m0;
    }
    Ok(value)
}

/// Moments, factorised collocation matrix and start-value system for one
/// frozen system and degree.
#[derive(Debug, Clone)]
pub struct CollocationScheme {
    degree: usize,
    horizon: f64,
    nodes: Vec<f64>,
    equations: usize,
    band_map: Vec<usize>,
    /// `[i][k][j][l]`, `l = 0..=m`, in the scaled basis.
    moments: Vec<f64>,
    start: LuFactors,
    factors: LuFactors,
}

impl CollocationScheme {
    pub fn assemble(lin: &LinearizedSystem<'_>, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("collocation degree must be at least 1".into()));
        }
        let sys = lin.system();
        let m = degree;
        let (equations, unknowns, bands) = (sys.equations(), sys.unknowns(), sys.bands());
        let horizon = sys.horizon();
        let nodes = collocation_nodes(horizon, m);
        let band_map = sys.unknown_of_band().to_vec();

        let stride_j = m + 1;
        let stride_k = bands * stride_j;
        let stride_i = m * stride_k;
        let mut moments = vec![0.0; equations * stride_i];
        for (k, &t) in nodes.iter().enumerate() {
            let segments = decompose(t, sys.curves())?.segments;
            for i in 0..equations {
                for seg in &segments {
                    let values = band_moments(lin, i, seg.band, t, seg.lo, seg.hi, m, horizon)?;
                    let at = i * stride_i + k * stride_k + seg.band * stride_j;
                    moments[at..at + stride_j].copy_from_slice(&values);
                }
            }
        }

        let mut c = DenseMatrix::zeros(equations * m, unknowns * m);
        for i in 0..equations {
            for k in 1..=m {
                for j in 0..bands {
                    let u = band_map[j];
                    for l in 1..=m {
                        let (row, col) = flatten(i, k, u, l, m);
                        c[(row, col)] += moments[i * stride_i + (k - 1) * stride_k + j * stride_j + l];
                    }
                }
            }
        }
        let start = lin.start_factors()?;
        let factors = LuFactors::new(c).map_err(|source| Error::CollocationSingular { degree, source })?;
        Ok(CollocationScheme { degree, horizon, nodes, equations, band_map, moments, start, factors })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The collocation matrix in the scaled basis `(t/T)^l`.
    pub fn matrix(&self) -> &DenseMatrix {
        self.factors.matrix()
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.factors.pivot_ratio()
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.degree >= CONDITION_WARNING_DEGREE {
            vec![format!(
                "degree {} monomial collocation matrix is ill-conditioned (pivot ratio {:.3e})",
                self.degree,
                self.pivot_ratio()
            )]
        } else {
            Vec::new()
        }
    }

    fn moment_scaled(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        let m = self.degree;
        let bands = self.band_map.len();
        self.moments[((i * m + (k - 1)) * bands + j) * (m + 1) + l]
    }

    fn system_with_start(&self, rhs: &dyn RightHandSide, start: &[f64]) -> Result<CollocationSystem> {
        let m = self.degree;
        let mut f = vec![0.0; self.equations * m];
        for i in 0..self.equations {
            for k in 1..=m {
                let mut value = rhs.value(i, self.nodes[k - 1])?;
                for (j, &u) in self.band_map.iter().enumerate() {
                    value -= start[u] * self.moment_scaled(i, k, j, 0);
                }
                f[flatten(i, k, 0, 1, m).0] = value;
            }
        }
        Ok(CollocationSystem { matrix: self.matrix().clone(), rhs: f })
    }

    /// The flattened system in the scaled basis, with start values taken
    /// from the start-value system.
    pub fn system(&self, rhs: &dyn RightHandSide) -> Result<CollocationSystem> {
        let start = crate::problem::solve_start(&self.start, rhs, self.equations)?;
        self.system_with_start(rhs, &start)
    }

    pub fn solve(&self, rhs: &dyn RightHandSide) -> Result<PolynomialSolution> {
        let m = self.degree;
        let start = crate::problem::solve_start(&self.start, rhs, self.equations)?;
        let system = self.system_with_start(rhs, &start)?;
        let scaled = self
            .factors
            .solve(&system.rhs)
            .map_err(|source| Error::CollocationSingular { degree: m, source })?;
        let coefficients = start
            .iter()
            .enumerate()
            .map(|(u, &a0)| {
                let mut row = Vec::with_capacity(m + 1);
                row.push(a0);
                let mut scale = 1.0;
                for l in 1..=m {
                    scale *= self.horizon;
                    row.push(scaled[flatten(0, 1, u, l, m).1] / scale);
                }
                row
            })
            .collect();
        Ok(PolynomialSolution { degree: m, coefficients })
    }
}

/// Assembles and solves the collocation system of degree `m`.
pub fn solve_linear_collocation(
    lin: &LinearizedSystem<'_>,
    rhs: &dyn RightHandSide,
    m: usize,
) -> Result<PolynomialSolution> {
    CollocationScheme::assemble(lin, m)?.solve(rhs)
}
