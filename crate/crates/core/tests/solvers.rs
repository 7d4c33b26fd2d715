mod common;

use volterra::report::{sup_distance, SAMPLES};
use volterra::{
    builtin, solve, solve_from, solve_linear_collocation, solve_linear_pc, Approximation, Error, Expr,
    ExprFunctions, InnerSolver, LinearizedSystem, NewtonOptions, Solution, SourceTerm, StopReason,
};

fn funcs(texts: &[&str]) -> ExprFunctions {
    ExprFunctions::new(texts.iter().map(|t| Expr::parse(t).unwrap()).collect())
}

#[test]
fn model01_collocation_component_errors() {
    let sys = builtin("model01").unwrap();
    let out = solve(&sys, &NewtonOptions::new(InnerSolver::Collocation { degree: 5 })).unwrap();
    let e = out.report.records[0].errors.clone().unwrap();
    assert!(common::within_factor(e.components[0].error, 6.67315e-6, 10.0), "{e:?}");
    assert!(common::within_factor(e.components[1].error, 3.95344e-4, 10.0), "{e:?}");
}

#[test]
fn collocation_error_falls_with_degree() {
    for name in ["model01", "model02"] {
        let sys = builtin(name).unwrap();
        let errors: Vec<f64> = [2, 3, 5, 8]
            .iter()
            .map(|&m| {
                let out = solve(&sys, &NewtonOptions::new(InnerSolver::Collocation { degree: m })).unwrap();
                out.report.records[0].errors.as_ref().unwrap().aggregate
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{name}: {errors:?}");
    }
}

#[test]
fn manufactured_polynomial_is_recovered() {
    let spec = volterra::SystemSpec::from_toml(
        r#"
        n = 2
        T = 1.0
        alpha = ["t/2"]
        K = [["1+t+s", "1"], ["1+t-s", "-1"]]
        f = ["t^3/3 + 11*t^4/192", "-t^3/4 + 5*t^4/192"]
    "#,
    )
    .unwrap();
    let sys = spec.build().unwrap();
    let zero = ExprFunctions::zeros(2);
    let lin = LinearizedSystem::new(&sys, &zero, 8000).unwrap();
    let p = solve_linear_collocation(&lin, &SourceTerm::new(&sys), 3).unwrap();
    for u in 0..2 {
        for (a, e) in p.coefficients(u).iter().zip([0.0, 0.0, 1.0, 0.0]) {
            assert!((a - e).abs() <= 1e-8, "{:?}", p.coefficients(u));
        }
        assert!((p.eval(u, 0.5) - 0.25).abs() <= 1e-8);
    }
}

#[test]
fn pc_converges_at_first_order_on_model01() {
    let sys = builtin("model01").unwrap();
    let zero = ExprFunctions::zeros(2);
    let lin = LinearizedSystem::new(&sys, &zero, 200).unwrap();
    let domains = sys.component_domains().unwrap();
    let exact = sys.exact().unwrap();
    let errors: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let sol = solve_linear_pc(&lin, &SourceTerm::new(&sys), n).unwrap();
            sup_distance(exact, &sol, &domains, SAMPLES).unwrap()
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.4..=3.0).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn scalar_newton_with_pc_matches_table_at_coarse_step() {
    let sys = builtin("nonlinear-scalar").unwrap();
    let out = solve(&sys, &NewtonOptions::new(InnerSolver::PiecewiseConstant { cells: 32 })).unwrap();
    assert_eq!(out.report.stop, StopReason::Converged);
    assert!(out.report.iterations() <= 10);
    let e = out.report.last().unwrap().errors.as_ref().unwrap().aggregate;
    assert!(common::within_factor(e, 0.0286877, 10.0), "{e}");
    assert!(matches!(out.solution, Solution::PiecewiseConstant(_)));
}

#[test]
fn far_guess_errors_fall_over_iterations() {
    let sys = builtin("nonlinear-sys1").unwrap();
    let opts = NewtonOptions::new(InnerSolver::Collocation { degree: 3 }).max_iters(20).tol(0.0);
    let out = solve(&sys, &opts).unwrap();
    let eps = |m: usize| out.report.records[m - 1].errors.as_ref().unwrap().aggregate;
    assert!(eps(20) < eps(10) && eps(10) < eps(1), "{} {} {}", eps(1), eps(10), eps(20));
    assert_eq!(out.report.ratios().len(), 19);
    for (k, r) in out.report.records.iter().enumerate() {
        assert_eq!(r.iteration, k + 1);
    }
}

#[test]
fn correction_norm_examples() {
    let a = funcs(&["cos(t)"]);
    let b = funcs(&["0.9*cos(t)"]);
    assert!((sup_distance(&a, &b, &[2.0], SAMPLES).unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(sup_distance(&a, &a, &[2.0], SAMPLES).unwrap(), 0.0);
    let shifted = funcs(&["cos(t) - 0.25"]);
    assert!((sup_distance(&a, &shifted, &[2.0], SAMPLES).unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn divergence_is_reported_with_history() {
    // frozen derivative 1 + cos(x0) is nearly zero, so each step overshoots ~1000x
    let spec = volterra::SystemSpec::from_toml(
        r#"
        n = 1
        T = 1.0
        K = [["1"]]
        G = [["x + sin(x)"]]
        f = ["t^2/2 + 1 - cos(t)"]
        exact = ["t"]
        guess = ["3.09"]
    "#,
    )
    .unwrap();
    let sys = spec.build().unwrap();
    let opts = NewtonOptions::new(InnerSolver::Collocation { degree: 4 }).max_iters(30);
    match solve(&sys, &opts) {
        Err(Error::Diverged(report)) => {
            assert_eq!(report.stop, StopReason::Diverged);
            assert!(report.records.len() >= 4, "{report:?}");
        }
        other => panic!("{:?}", other.map(|o| o.report)),
    }
}

#[test]
fn singular_start_system_is_reported() {
    let spec = volterra::SystemSpec::from_toml(
        r#"
        n = 2
        T = 1.0
        alpha = ["t/2"]
        K = [["1", "1"], ["2", "2"]]
        f = ["t", "2*t"]
    "#,
    )
    .unwrap();
    let sys = spec.build().unwrap();
    let opts = NewtonOptions::new(InnerSolver::PiecewiseConstant { cells: 8 });
    assert!(matches!(solve(&sys, &opts), Err(Error::StartSystem(_))));
}

#[test]
fn explicit_guess_overrides_the_system_guess() {
    let sys = builtin("nonlinear-sys2").unwrap();
    let exact = sys.exact().unwrap().clone();
    let opts = NewtonOptions::new(InnerSolver::Collocation { degree: 6 }).max_iters(2);
    let out = solve_from(&sys, &exact, &opts).unwrap();
    assert!(out.report.records[0].errors.as_ref().unwrap().aggregate < 1e-5);
    assert!(out.solution.value(0, 0.0).unwrap() - 1.0 < 1e-10);
}
