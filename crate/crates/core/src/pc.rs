//! Direct discretisation with piecewise-constant unknowns.
//!
//! The solution is sought as a step function on a node grid
//! `0 = t_0 < t_1 < ... < t_N = T`, constant on each cell
//! `(t_{l-1}, t_l]`. The start values `x(0)` come from differentiating the
//! equations at the origin. At `t_1` each band is collapsed to a single
//! midpoint, and at each later node `t_k` every equation is imposed with the
//! cells that the curves `alpha_j(t_k)` currently cut as unknowns and all
//! cells below them moved to the right-hand side as history.
//!
//! Every matrix and history weight depends only on the frozen kernels and
//! the mesh, so a [`PcScheme`] is assembled once and then solved for any
//! number of right-hand sides.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::problem::{LinearizedSystem, RightHandSide};
use crate::quadrature::{decompose, midpoint_nodes};
use crate::solution::Approximation;

/// Relative tolerance for snapping a point onto a mesh node.
const NODE_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    nodes: Vec<f64>,
}

impl Mesh {
    pub fn uniform(horizon: f64, cells: usize) -> Result<Self> {
        if cells == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "uniform mesh needs a positive horizon and at least one cell (got T = {horizon}, N = {cells})"
            )));
        }
        let nodes = (0..=cells).map(|k| horizon * k as f64 / cells as f64).collect();
        Ok(Mesh { nodes })
    }

    /// A mesh from explicit nodes; they must start at 0 and increase strictly.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(Error::InvalidArgument("mesh must start at 0 and have at least one cell".into()));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!("mesh nodes not increasing at {}", w[1])));
        }
        Ok(Mesh { nodes })
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    pub fn horizon(&self) -> f64 {
        self.nodes[self.cells()]
    }

    /// Largest cell width.
    pub fn step(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    fn snap(&self) -> f64 {
        NODE_SNAP * self.horizon().max(1.0)
    }

    /// 1-based index of the cell `(t_{l-1}, t_l]` containing `v`: the
    /// smallest `l >= 1` with `v <= t_l`. Points within rounding of a node
    /// count as lying on it.
    pub fn segment_index(&self, v: f64) -> Result<usize> {
        let snap = self.snap();
        if !(v >= -snap && v <= self.horizon() + snap) {
            return Err(Error::OutOfRange { what: "mesh point", value: v, lo: 0.0, hi: self.horizon() });
        }
        let l = self.nodes.partition_point(|&node| node + snap < v);
        Ok(l.clamp(1, self.cells()))
    }
}

/// `segment_index` as a free function.
pub fn segment_index(mesh: &Mesh, v: f64) -> Result<usize> {
    mesh.segment_index(v)
}

/// Step-function approximation: start values plus one value per cell and
/// component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseConstantSolution {
    mesh: Mesh,
    start: Vec<f64>,
    /// `steps[u][l - 1]` is the value of component `u` on cell `l`.
    steps: Vec<Vec<f64>>,
    /// Cells actually determined per component; later cells repeat the
    /// last determined value.
    reach: Vec<usize>,
}

impl PiecewiseConstantSolution {
    pub fn new(mesh: Mesh, start: Vec<f64>, steps: Vec<Vec<f64>>) -> Self {
        let reach = steps.iter().map(Vec::len).collect();
        PiecewiseConstantSolution { mesh, start, steps, reach }
    }

    /// Number of leading cells of component `u` fixed by the equations.
    /// Cells beyond it lie outside the component's domain.
    pub fn reach(&self, u: usize) -> usize {
        self.reach[u]
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn start_values(&self) -> &[f64] {
        &self.start
    }

    pub fn step_values(&self, component: usize) -> &[f64] {
        &self.steps[component]
    }

    /// Value of component `u` on cell `l` (1-based).
    pub fn cell_value(&self, u: usize, l: usize) -> f64 {
        self.steps[u][l - 1]
    }
}

impl Approximation for PiecewiseConstantSolution {
    fn components(&self) -> usize {
        self.start.len()
    }

    fn value(&self, component: usize, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.start[component]);
        }
        let l = self.mesh.segment_index(t)?;
        Ok(self.steps[component][l - 1])
    }

    fn breakpoints(&self) -> &[f64] {
        &self.mesh.nodes
    }
}

/// Evaluates component `i` of a step-function solution at `t`.
pub fn eval_pc(solution: &PiecewiseConstantSolution, i: usize, t: f64) -> Result<f64> {
    solution.value(i, t)
}

#[derive(Debug, Clone, PartialEq)]
struct HistoryTerm {
    equation: usize,
    component: usize,
    cell: usize,
    weight: f64,
}

#[derive(Debug, Clone)]
struct StepPlan {
    t: f64,
    /// Per component, the 1-based cell solved for at this step.
    frontier: Vec<usize>,
    factors: LuFactors,
    history: Vec<HistoryTerm>,
}

/// Assembled step systems for one frozen system and mesh.
#[derive(Debug, Clone)]
pub struct PcScheme {
    mesh: Mesh,
    start: LuFactors,
    steps: Vec<StepPlan>,
    equations: usize,
}

impl PcScheme {
    pub fn assemble(lin: &LinearizedSystem<'_>, mesh: Mesh) -> Result<Self> {
        let sys = lin.system();
        let (equations, unknowns) = (sys.equations(), sys.unknowns());
        let band_map = sys.unknown_of_band();
        if mesh.horizon() < sys.horizon() * (1.0 - NODE_SNAP) {
            return Err(Error::InvalidArgument(format!(
                "mesh ends at {} before the horizon {}",
                mesh.horizon(),
                sys.horizon()
            )));
        }
        let start = lin.start_factors()?;
        let panels = lin.panels();
        let mut assigned = vec![0usize; unknowns];
        let mut steps = Vec::with_capacity(mesh.cells());

        for k in 1..=mesh.cells() {
            let t = mesh.node(k);
            let bands = decompose(t.min(sys.horizon()), sys.curves())?;
            let mut frontier = vec![0usize; unknowns];
            for seg in &bands.segments {
                let u = band_map[seg.band];
                frontier[u] = frontier[u].max(mesh.segment_index(seg.hi)?);
            }
            if equations != unknowns || frontier.contains(&0) {
                return Err(Error::StepNotSquare {
                    step: k,
                    equations,
                    unknowns: frontier.iter().filter(|&&f| f > 0).count(),
                    band_map: band_map.iter().map(|u| u + 1).collect(),
                });
            }

            let mut a = DenseMatrix::zeros(equations, unknowns);
            let mut history = Vec::new();
            for seg in bands.segments.iter().filter(|s| !s.is_empty()) {
                let (j, u) = (seg.band, band_map[seg.band]);
                if k == 1 {
                    // single midpoint per band
                    let mid = 0.5 * (seg.lo + seg.hi);
                    for i in 0..equations {
                        a[(i, u)] += seg.len() * lin.frozen_kernel(i, j, t, mid)?;
                    }
                    continue;
                }
                let first = mesh.segment_index(seg.lo)?;
                let last = mesh.segment_index(seg.hi)?;
                for cell in first..=last {
                    let lo = seg.lo.max(mesh.node(cell - 1));
                    let hi = seg.hi.min(mesh.node(cell));
                    if !(hi > lo) {
                        continue;
                    }
                    let on_frontier = cell == frontier[u];
                    if !on_frontier && cell > assigned[u] {
                        return Err(Error::UnassignedHistory { step: k, component: u + 1, cell });
                    }
                    let share = if on_frontier {
                        panels
                    } else {
                        ((panels as f64) * (hi - lo) / seg.len()).ceil().max(1.0) as usize
                    };
                    for i in 0..equations {
                        let mut weight = 0.0;
                        for (s, w) in midpoint_nodes(lo, hi, share) {
                            let v = lin.frozen_kernel(i, j, t, s)?;
                            if !v.is_finite() {
                                return Err(Error::NonFiniteIntegrand { abscissa: s });
                            }
                            weight += v * w;
                        }
                        if on_frontier {
                            a[(i, u)] += weight;
                        } else {
                            history.push(HistoryTerm { equation: i, component: u, cell, weight });
                        }
                    }
                }
            }
            let factors = LuFactors::new(a).map_err(|source| Error::StepSingular { step: k, source })?;
            for (u, &f) in frontier.iter().enumerate() {
                assigned[u] = assigned[u].max(f);
            }
            steps.push(StepPlan { t, frontier, factors, history });
        }
        Ok(PcScheme { mesh, start, steps, equations })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Coefficient matrix of step `k` (1-based).
    pub fn step_matrix(&self, k: usize) -> &DenseMatrix {
        self.steps[k - 1].factors.matrix()
    }

    /// Cells solved for at step `k`, one per component.
    pub fn step_unknowns(&self, k: usize) -> &[usize] {
        &self.steps[k - 1].frontier
    }

    pub fn solve(&self, rhs: &dyn RightHandSide) -> Result<PiecewiseConstantSolution> {
        let start = crate::problem::solve_start(&self.start, rhs, self.equations)?;
        let unknowns = start.len();
        let mut values = vec![vec![f64::NAN; self.mesh.cells()]; unknowns];
        for (index, step) in self.steps.iter().enumerate() {
            let mut b = rhs.values(step.t, self.equations)?;
            for term in &step.history {
                b[term.equation] -= term.weight * values[term.component][term.cell - 1];
            }
            let x = step
                .factors
                .solve(&b)
                .map_err(|source| Error::StepSingular { step: index + 1, source })?;
            for (u, &cell) in step.frontier.iter().enumerate() {
                values[u][cell - 1] = x[u];
            }
        }
        let reach: Vec<usize> =
            (0..unknowns).map(|u| self.steps.iter().map(|s| s.frontier[u]).max().unwrap_or(0)).collect();
        for (row, &r) in values.iter_mut().zip(&reach) {
            let last = row[r - 1];
            row[r..].fill(last);
        }
        Ok(PiecewiseConstantSolution { mesh: self.mesh.clone(), start, steps: values, reach })
    }
}

/// Solves a frozen system on a uniform mesh of `cells` cells.
pub fn solve_linear_pc(
    lin: &LinearizedSystem<'_>,
    rhs: &dyn RightHandSide,
    cells: usize,
) -> Result<PiecewiseConstantSolution> {
    if cells < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 mesh cells, got {cells}")));
    }
    let mesh = Mesh::uniform(lin.system().horizon(), cells)?;
    PcScheme::assemble(lin, mesh)?.solve(rhs)
}
