#![allow(dead_code)]

use volterra::expr::Vars;
use volterra::{Approximation, VolterraSystem};

pub const ORACLE_PANELS: usize = 2000;

fn midpoint(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    (0..panels).map(|k| f(lo + (k as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Left-hand side of equation `i` at `t`, integrated with a plain
/// 2000-panel midpoint rule per band.
pub fn apply_operator(sys: &VolterraSystem, x: &dyn Approximation, i: usize, t: f64) -> f64 {
    let curves = sys.curves();
    (0..sys.bands())
        .map(|j| {
            let lo = curves.alpha(j, t).unwrap();
            let hi = curves.alpha(j + 1, t).unwrap();
            let u = sys.unknown_of_band()[j];
            let kernel = sys.kernel(i, j);
            let g = sys.nonlinearity(i, j).expr();
            midpoint(
                |s| {
                    let xs = x.value(u, s).unwrap();
                    kernel.eval(&Vars::ts(t, s)).unwrap() * g.eval(&Vars::sx(s, xs)).unwrap()
                },
                lo,
                hi,
                ORACLE_PANELS,
            )
        })
        .sum()
}

/// `sup_t max_i |sum_j int K G(x) - f_i(t)|` over `samples` points of `(0, T]`.
pub fn residual_sup(sys: &VolterraSystem, x: &dyn Approximation, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 1..=samples {
        let t = sys.horizon() * k as f64 / samples as f64;
        for i in 0..sys.equations() {
            let f = sys.source(i).expr.eval(&Vars::t(t)).unwrap();
            worst = worst.max((apply_operator(sys, x, i, t) - f).abs());
        }
    }
    worst
}

/// Sampled `sum_j max |K_ij(t,s) G_x(s, x*(s))|` maximised over `i`: bounds
/// how much a sup-norm error `eps` can move the left-hand side, per unit
/// length of integration.
pub fn operator_bound(sys: &VolterraSystem) -> f64 {
    let exact = sys.exact().expect("exact solution");
    let grid: Vec<f64> = (0..=50).map(|k| sys.horizon() * k as f64 / 50.0).collect();
    (0..sys.equations())
        .map(|i| {
            (0..sys.bands())
                .map(|j| {
                    let u = sys.unknown_of_band()[j];
                    let mut m: f64 = 0.0;
                    for &t in &grid {
                        for &s in grid.iter().filter(|&&s| s <= t) {
                            let k = sys.kernel(i, j).eval(&Vars::ts(t, s)).unwrap();
                            let x = exact.value(u, s).unwrap();
                            let d = sys.nonlinearity(i, j).eval_dx(s, x).unwrap();
                            m = m.max((k * d).abs());
                        }
                    }
                    m
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `lo/10 <= value <= 10 hi`.
pub fn within_factor(value: f64, target: f64, factor: f64) -> bool {
    value.is_finite() && value >= target / factor && value <= target * factor
}
