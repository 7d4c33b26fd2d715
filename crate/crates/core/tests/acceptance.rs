//! Reproduction of the published error tables plus the property suite.
//! Prints one PASS/FAIL line per criterion and exits non-zero on failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use volterra::collocation::{flatten, unflatten};
use volterra::linalg::{lu_solve, residual, DenseMatrix};
use volterra::quadrature::composite_midpoint;
use volterra::{
    builtin, builtin_names, solve, Approximation, Error, InnerSolver, LinearizedSystem, NewtonOptions,
    NewtonOutcome, SourceTerm, SystemSpec,
};

use common::{operator_bound, residual_sup, within_factor};

const FACTOR: f64 = 10.0;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, detail: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        if ok {
            self.detail.push_str(&what);
        } else {
            self.pass = false;
            self.detail.push_str("FAILED ");
            self.detail.push_str(&what);
        }
    }
}

fn run(name: &str, inner: InnerSolver, iters: usize) -> Result<NewtonOutcome, Error> {
    let sys = builtin(name)?;
    solve(&sys, &NewtonOptions::new(inner).max_iters(iters).tol(0.0))
}

fn aggregate(out: &NewtonOutcome, iteration: usize) -> f64 {
    out.report.records[iteration - 1].errors.as_ref().map_or(f64::NAN, |e| e.aggregate)
}

fn final_aggregate(out: &NewtonOutcome) -> f64 {
    aggregate(out, out.report.iterations())
}

fn collocation_table(out: &mut Outcome, name: &str, degrees: &[usize], targets: &[f64], report_points: bool) {
    let mut previous = f64::INFINITY;
    for (&m, &target) in degrees.iter().zip(targets) {
        match run(name, InnerSolver::Collocation { degree: m }, 1) {
            Ok(o) => {
                let e = final_aggregate(&o);
                out.check(within_factor(e, target, FACTOR), format!("m={m} eps={e:.5e} (reference {target:.5e})"));
                if report_points {
                    let errors = o.report.records[0].errors.as_ref().unwrap();
                    let points: Vec<String> = errors
                        .components
                        .iter()
                        .enumerate()
                        .map(|(i, c)| format!("eps{}={:.3e}@t={:.4}", i + 1, c.error, c.t_max))
                        .collect();
                    out.check(errors.components.iter().all(|c| c.t_max.is_finite()), format!("[{}]", points.join(" ")));
                }
                out.check(e < previous, format!("decreasing at m={m}"));
                previous = e;
            }
            Err(e) => out.check(false, format!("m={m}: {e}")),
        }
    }
}

fn table1() -> Outcome {
    let mut out = Outcome::new();
    collocation_table(&mut out, "model01", &[2, 3, 5, 8], &[6.80072e-2, 2.36222e-2, 3.95400e-4, 1.80994e-7], false);
    out
}

fn table2() -> Outcome {
    let mut out = Outcome::new();
    collocation_table(&mut out, "model02", &[2, 5, 8], &[3.44752e-2, 9.59747e-5, 4.21286e-8], true);
    out
}

fn table3() -> Outcome {
    let mut out = Outcome::new();
    for (cells, target) in [(32, 0.0286877), (128, 0.00730057), (512, 0.00386043)] {
        let sys = builtin("nonlinear-scalar").unwrap();
        match solve(&sys, &NewtonOptions::new(InnerSolver::PiecewiseConstant { cells }).max_iters(10)) {
            Ok(o) => {
                let e = final_aggregate(&o);
                let its = o.report.iterations();
                out.check(within_factor(e, target, FACTOR), format!("h=1/{cells} eps={e:.5e} (reference {target:.5e})"));
                out.check(its <= 10, format!("{its} its"));
            }
            Err(e) => out.check(false, format!("h=1/{cells}: {e}")),
        }
    }
    let errors: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&cells| run("nonlinear-scalar", InnerSolver::PiecewiseConstant { cells }, 10).map_or(f64::NAN, |o| final_aggregate(&o)))
        .collect();
    for (w, n) in errors.windows(2).zip([64, 128, 256]) {
        let ratio = w[0] / w[1];
        out.check((1.4..=3.0).contains(&ratio), format!("err({n})/err({})={ratio:.3}", 2 * n));
    }
    out
}

fn table4() -> Outcome {
    let mut out = Outcome::new();
    match run("nonlinear-sys1", InnerSolver::Collocation { degree: 3 }, 20) {
        Ok(o) => {
            let first = aggregate(&o, 1);
            let last = aggregate(&o, 20);
            out.check(within_factor(first, 0.446955, FACTOR), format!("1 it eps={first:.5e} (reference 4.46955e-1)"));
            out.check(last <= 1e-7, format!("20 its eps={last:.5e} <= 1e-7 (reference 2.98137e-9)"));
        }
        Err(e) => out.check(false, e.to_string()),
    }
    out
}

fn tables5_6() -> Outcome {
    let mut out = Outcome::new();
    for (m, bound, reference) in [(5, 1e-4, 4.18562e-6), (10, 1e-7, 4.07657e-9)] {
        match run("nonlinear-sys2", InnerSolver::Collocation { degree: m }, 20) {
            Ok(o) => {
                let e = aggregate(&o, 20);
                out.check(e <= bound, format!("m={m} 20 its eps={e:.5e} <= {bound:e} (reference {reference:.5e})"));
            }
            Err(e) => out.check(false, format!("m={m}: {e}")),
        }
    }
    out
}

fn midpoint_affine(out: &mut Outcome, rng: &mut StdRng) {
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let (a, b) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let lo: f64 = rng.gen_range(-5.0..5.0);
        let hi = lo + rng.gen_range(0.0..5.0);
        let panels = rng.gen_range(1..300);
        let got = composite_midpoint(|s| a + b * s, lo, hi, panels).unwrap();
        let exact = a * (hi - lo) + b * (hi * hi - lo * lo) / 2.0;
        worst = worst.max((got - exact).abs() / exact.abs().max(1.0));
    }
    out.check(worst <= 1e-12, format!("affine midpoint rel err {worst:.1e}"));
}

fn flattening(out: &mut Outcome) {
    let mut ok = true;
    for n in 1..=4 {
        for m in 1..=15 {
            let mut seen = vec![false; n * m * n * m];
            for i in 0..n {
                for k in 1..=m {
                    for j in 0..n {
                        for l in 1..=m {
                            let (r, c) = flatten(i, k, j, l, m);
                            ok &= unflatten(r, c, m) == (i, k, j, l) && !seen[r * n * m + c];
                            seen[r * n * m + c] = true;
                        }
                    }
                }
            }
            ok &= seen.iter().all(|&s| s);
        }
    }
    out.check(ok, "flattening bijection n<=4 m<=15");
}

fn lu_residuals(out: &mut Outcome, rng: &mut StdRng) {
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=60);
        let mut rows = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            let mut sum = 0.0;
            for (j, v) in row.iter_mut().enumerate() {
                if i != j {
                    *v = rng.gen_range(-1.0..1.0);
                    sum += f64::abs(*v);
                }
            }
            row[i] = (sum + rng.gen_range(0.1..2.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
        let a = DenseMatrix::from_rows(&rows);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let x = lu_solve(&a, &b).unwrap();
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(residual(&a, &x, &b) / scale);
    }
    out.check(worst <= 1e-10, format!("LU residual/max(1,|b|) {worst:.1e} over 500 systems"));
}

fn derivatives(out: &mut Outcome) {
    let bad: usize = builtin_names()
        .map(|n| builtin(n).unwrap().validate().iter().filter(|d| d.condition == "derivative").count())
        .sum();
    out.check(bad == 0, format!("{bad} derivative mismatches over builtins"));
}

fn linear_one_step(out: &mut Outcome) {
    for (name, inner) in [
        ("model01", InnerSolver::Collocation { degree: 5 }),
        ("model02", InnerSolver::Collocation { degree: 3 }),
        ("model01", InnerSolver::PiecewiseConstant { cells: 64 }),
    ] {
        let sys = builtin(name).unwrap();
        let o = solve(&sys, &NewtonOptions::new(inner).max_iters(2).tol(0.0)).unwrap();
        let c = o.report.records[1].correction;
        out.check(c <= 1e-10, format!("{name} {}: 2nd correction {c:.1e}", inner.parameter()));
    }
}

fn start_values(out: &mut Outcome) {
    let mut worst: f64 = 0.0;
    for name in builtin_names() {
        let sys = builtin(name).unwrap();
        let exact = sys.exact().unwrap().clone();
        let lin = LinearizedSystem::new(&sys, &exact, 200).unwrap();
        let x0 = if sys.is_linear() {
            lin.initial_values(&SourceTerm::new(&sys)).unwrap()
        } else {
            lin.initial_values(&lin.psi(&exact)).unwrap()
        };
        for (u, v) in x0.iter().enumerate() {
            worst = worst.max((v - exact.value(u, 0.0).unwrap()).abs());
        }
    }
    out.check(worst <= 1e-10, format!("t=0 start values max err {worst:.1e}"));
}

fn polynomial_reproduction(out: &mut Outcome) {
    let spec = SystemSpec::from_toml(
        r#"
        n = 2
        T = 1.0
        alpha = ["t/2"]
        K = [["1+t+s", "1"], ["1+t-s", "-1"]]
        f = ["t^3/3 + 11*t^4/192", "-t^3/4 + 5*t^4/192"]
        exact = ["t^2", "t^2"]
    "#,
    )
    .unwrap();
    let sys = spec.build().unwrap();
    match solve(&sys, &NewtonOptions::new(InnerSolver::Collocation { degree: 3 })) {
        Ok(o) => {
            let volterra::Solution::Polynomial(p) = &o.solution else { unreachable!() };
            let mut worst: f64 = 0.0;
            for u in 0..2 {
                for (a, e) in p.coefficients(u).iter().zip([0.0, 0.0, 1.0, 0.0]) {
                    worst = worst.max((a - e).abs());
                }
            }
            out.check(worst <= 1e-8, format!("t^2 recovered at m=3, coefficient err {worst:.1e}"));
        }
        Err(e) => out.check(false, e.to_string()),
    }
}

fn residual_oracle(out: &mut Outcome) {
    for (name, inner, iters) in [
        ("model01", InnerSolver::Collocation { degree: 8 }, 1),
        ("model02", InnerSolver::Collocation { degree: 5 }, 1),
        ("nonlinear-scalar", InnerSolver::PiecewiseConstant { cells: 128 }, 10),
        ("nonlinear-sys1", InnerSolver::Collocation { degree: 3 }, 20),
        ("nonlinear-sys2", InnerSolver::Collocation { degree: 10 }, 20),
    ] {
        let sys = builtin(name).unwrap();
        let o = run(name, inner, iters).unwrap();
        let eps = o.report.records.last().unwrap().errors.as_ref().unwrap().max();
        let r = residual_sup(&sys, &o.solution, 40);
        let bound = FACTOR * operator_bound(&sys) * sys.horizon() * eps + 1e-7;
        out.check(r <= bound, format!("{name} residual {r:.1e} <= {bound:.1e}"));
    }
}

fn properties() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    midpoint_affine(&mut out, &mut rng);
    flattening(&mut out);
    lu_residuals(&mut out, &mut rng);
    derivatives(&mut out);
    linear_one_step(&mut out);
    start_values(&mut out);
    polynomial_reproduction(&mut out);
    residual_oracle(&mut out);
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 6] = [
        ("1 model01 collocation table", table1, Some(Duration::from_secs(5))),
        ("2 model02 collocation table", table2, Some(Duration::from_secs(10))),
        ("3 scalar Newton + piecewise-constant table", table3, Some(Duration::from_secs(30))),
        ("4 nonlinear-sys1 far guess, collocation m=3", table4, Some(Duration::from_secs(30))),
        ("5 nonlinear-sys2 near guess, collocation m=5,10", tables5_6, Some(Duration::from_secs(60))),
        ("6 property suite", properties, None),
    ];
    let mut failed = 0;
    for (label, criterion, limit) in criteria {
        let start = Instant::now();
        let mut outcome = criterion();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            outcome.check(elapsed < limit, format!("{:.2}s < {}s", elapsed.as_secs_f64(), limit.as_secs()));
        }
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {label}: {}", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    if failed == 0 {
        println!("acceptance: all 6 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 6 criteria failed");
        ExitCode::FAILURE
    }
}
