mod common;

use common::*;
use proptest::prelude::*;
use tripm::barrier::barrier_value;
use tripm::problem::{builtin_problem, central_gradient, fd_step, ProblemParams, BUILTIN_NAMES};
use tripm::{barrier_eval, fj_residuals, Matrix, ProblemOracle, Vector};

fn build(name: &str) -> Box<dyn ProblemOracle> {
    builtin_problem(name, &ProblemParams::new()).unwrap()
}

const FEASIBLE: [&str; 4] = ["lp1d", "box_qp_nonconvex", "annulus", "circle_lp_convex"];

#[test]
fn gradient_matches_differences_at_random_points() {
    let mut rng = rng(11);
    for name in FEASIBLE {
        let p = build(name);
        for _ in 0..100 {
            let x = feasible_point(name, &mut rng, p.as_ref(), 5e-2);
            let be = barrier_eval(p.as_ref(), 0.3, &x).unwrap();
            let fd = central_gradient(
                |z| barrier_value(p.as_ref(), 0.3, z).unwrap(),
                &x,
                fd_step(&x),
            );
            let err = (&be.grad - fd).norm() / be.grad.norm().max(1.0);
            assert!(err < 1e-5, "{name} at {x}: relative error {err}");
        }
    }
}

#[test]
fn hessian_is_lagrangian_plus_barrier_term() {
    let mut rng = rng(12);
    for name in FEASIBLE {
        let p = build(name);
        for _ in 0..100 {
            let x = feasible_point(name, &mut rng, p.as_ref(), 1e-3);
            let mu = 0.2;
            let be = barrier_eval(p.as_ref(), mu, &x).unwrap();
            // Assemble term by term.
            let s = p.a(&x);
            let j = p.jac_a(&x);
            let mut h = p.hess_f(&x);
            for i in 0..p.m() {
                let yi = mu / s[i];
                h -= p.hess_a(&x, i) * yi;
                let row = j.row(i).transpose();
                h += &row * row.transpose() * (mu / (s[i] * s[i]));
            }
            let scale = h.amax().max(1.0);
            assert!((&be.hess - &h).amax() <= 1e-10 * scale, "{name}");
            assert!((&be.hess - be.hess.transpose()).amax() <= 1e-12 * scale);
        }
    }
}

#[test]
fn lp1d_stationary_point_matches_root_oracle() {
    let p = build("lp1d");
    for mu in [0.5, 0.1, 0.01] {
        let x = Vector::from_element(1, lp1d_center(mu));
        let be = barrier_eval(p.as_ref(), mu, &x).unwrap();
        assert!(be.grad[0].abs() < 1e-12, "mu {mu}: {}", be.grad[0]);
    }
}

#[test]
fn registry_names_are_all_buildable() {
    for name in BUILTIN_NAMES {
        let p = build(name);
        assert!(p.n() >= 1 && p.m() >= 1);
    }
}

proptest! {
    #[test]
    fn complementarity_by_construction(x0 in -0.99f64..0.99, x1 in -0.99f64..0.99, mu in 1e-4f64..10.0) {
        let p = build("box_qp_nonconvex");
        let be = barrier_eval(p.as_ref(), mu, &Vector::from_vec(vec![x0, x1])).unwrap();
        for (s, y) in be.slack.iter().zip(be.dual.iter()) {
            prop_assert!(*s > 0.0 && *y > 0.0);
            prop_assert!((s * y - mu).abs() <= mu * f64::EPSILON);
        }
    }

    #[test]
    fn fj1_monotone_in_tolerances(
        x in 0.05f64..1.95,
        y0 in 0.01f64..2.0,
        y1 in 0.01f64..2.0,
        mu in 0.01f64..1.0,
        tl in 0.1f64..5.0,
        tc in 0.05f64..0.9,
        grow_l in 1.0f64..4.0,
        grow_c in 1.0f64..1.1,
    ) {
        let p = build("lp1d");
        let xv = Vector::from_element(1, x);
        let yv = Vector::from_vec(vec![y0, y1]);
        let base = fj_residuals(p.as_ref(), mu, tl, tc, &xv, &yv).unwrap();
        let tc2 = (tc * grow_c).min(1.0);
        let loose = fj_residuals(p.as_ref(), mu, tl * grow_l, tc2, &xv, &yv).unwrap();
        if base.fj1 {
            prop_assert!(loose.fj1);
        }
    }

    #[test]
    fn model_is_quadratic_form(u0 in -1.0f64..1.0, u1 in -1.0f64..1.0) {
        let p = build("annulus");
        let be = barrier_eval(p.as_ref(), 0.1, &Vector::from_vec(vec![1.2, 0.9])).unwrap();
        let u = Vector::from_vec(vec![u0, u1]);
        let m = tripm::model_value(&be, &u);
        let h: &Matrix = &be.hess;
        let expected = 0.5 * (h[(0, 0)] * u0 * u0 + 2.0 * h[(0, 1)] * u0 * u1 + h[(1, 1)] * u1 * u1)
            + be.grad[0] * u0 + be.grad[1] * u1;
        prop_assert!((m - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }
}
