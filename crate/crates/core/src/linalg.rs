//! Dense LU factorisation with partial pivoting for the small square systems
//! produced by the solvers (t = 0 start values, per-step systems, and the
//! collocation block system).

use std::fmt;

use thiserror::Error;

/// Pivots below this fraction of the column's largest initial entry are
/// treated as zero.
pub const SINGULAR_RELATIVE_PIVOT: f64 = 1e-13;

/// Residual above which a refinement sweep is applied.
const REFINE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix numerically singular at pivot step {step} (pivot {pivot:e}, column scale {scale:e})")]
    Singular { step: usize, pivot: f64, scale: f64 },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.as_ref().len(), ncols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        DenseMatrix { rows: nrows, cols: ncols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// `max_i |(A x - b)_i|`
pub fn residual(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
    a.mul_vec(x)
        .iter()
        .zip(b)
        .map(|(ax, bi)| (ax - bi).abs())
        .fold(0.0, f64::max)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// A factorisation `PA = LU` that keeps the original matrix around for
/// residual-driven refinement. Factor once, solve for many right-hand sides.
#[derive(Debug, Clone)]
pub struct LuFactors {
    original: DenseMatrix,
    lu: DenseMatrix,
    perm: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl LuFactors {
    pub fn new(a: DenseMatrix) -> Result<Self, LinalgError> {
        if a.rows != a.cols {
            return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
        }
        let n = a.rows;
        for r in 0..n {
            for c in 0..n {
                if !a[(r, c)].is_finite() {
                    return Err(LinalgError::NonFinite { row: r, col: c });
                }
            }
        }
        let scales: Vec<f64> =
            (0..n).map(|c| (0..n).fold(0.0, |m: f64, r| m.max(a[(r, c)].abs()))).collect();

        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|r| (r, lu[(r, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= SINGULAR_RELATIVE_PIVOT * scales[k] || pivot == 0.0 {
                return Err(LinalgError::Singular { step: k + 1, pivot, scale: scales[k] });
            }
            min_pivot = min_pivot.min(pivot);
            max_pivot = max_pivot.max(pivot);
            lu.swap_rows(k, p);
            perm.swap(k, p);
            let diag = lu[(k, k)];
            for r in k + 1..n {
                let factor = lu[(r, k)] / diag;
                lu[(r, k)] = factor;
                if factor != 0.0 {
                    for c in k + 1..n {
                        lu[(r, c)] -= factor * lu[(k, c)];
                    }
                }
            }
        }
        Ok(LuFactors { original: a, lu, perm, min_pivot, max_pivot })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.original
    }

    /// Ratio of the largest to the smallest pivot; a cheap lower bound on
    /// the condition number.
    pub fn pivot_ratio(&self) -> f64 {
        if self.dim() == 0 {
            1.0
        } else {
            self.max_pivot / self.min_pivot
        }
    }

    fn substitute(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = y[r];
            for c in 0..r {
                acc -= self.lu[(r, c)] * y[c];
            }
            y[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = y[r];
            for c in r + 1..n {
                acc -= self.lu[(r, c)] * y[c];
            }
            y[r] = acc / self.lu[(r, r)];
        }
        y
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.dim() {
            return Err(LinalgError::Dimension { expected: self.dim(), got: b.len() });
        }
        let mut x = self.substitute(b);
        let scale = inf_norm(b).max(1.0);
        let r = residual(&self.original, &x, b);
        if r > REFINE_THRESHOLD * scale {
            let ax = self.original.mul_vec(&x);
            let defect: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let dx = self.substitute(&defect);
            let refined: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            if residual(&self.original, &refined, b) < r {
                x = refined;
            }
        }
        Ok(x)
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != a.rows {
        return Err(LinalgError::Dimension { expected: a.rows, got: b.len() });
    }
    LuFactors::new(a.clone())?.solve(b)
}
