use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use swipt_maxmin::cone::{
    hyperbolic_to_soc, read_problem, solve, svec, write_problem, ConeSpec, ConicProblem, LinExpr, ProblemBuilder,
    Settings, Status,
};

fn settings() -> Settings {
    Settings::default()
}

#[test]
fn scalar_lower_bound() {
    let mut b = ProblemBuilder::new();
    let x = b.add_nonneg(1);
    b.add_ge(x.at(0), LinExpr::constant(1.0));
    b.minimize(x.at(0));
    let sol = solve(&b.build().unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_obj - 1.0).abs() < 1e-7);
}

#[test]
fn norm_of_three_four() {
    let mut b = ProblemBuilder::new();
    let t = b.add_soc(3);
    b.add_eq(t.at(1), LinExpr::constant(3.0));
    b.add_eq(t.at(2), LinExpr::constant(4.0));
    b.minimize(t.at(0));
    let sol = solve(&b.build().unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_obj - 5.0).abs() < 1e-6);
}

#[test]
fn trace_minimization_gives_smallest_eigenvalue() {
    let c = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, -1.0, 3.0, 0.25, 0.5, 0.25, -0.5]);
    let oracle = SymmetricEigen::new(c.clone()).eigenvalues.min();
    let mut b = ProblemBuilder::new();
    let x = b.add_psd(3);
    b.add_eq(x.trace(), LinExpr::constant(1.0));
    b.minimize(x.inner(&c));
    let sol = solve(&b.build().unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_obj - oracle).abs() < 1e-6, "{} vs {oracle}", sol.primal_obj);
}

#[test]
fn hyperbolic_constraint_is_tight_at_optimum() {
    // min u + 2 v  s.t.  u v >= 4  ->  u = 2 sqrt 2, v = sqrt 2
    let mut b = ProblemBuilder::new();
    let uv = b.add_nonneg(2);
    hyperbolic_to_soc(&mut b, 4.0, uv.at(0), uv.at(1)).unwrap();
    b.minimize(uv.at(0) + uv.at(1) * 2.0);
    let sol = solve(&b.build().unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    let v = uv.values(&sol.x);
    assert!((sol.primal_obj - 4.0 * 2f64.sqrt()).abs() < 1e-6);
    assert!((v[0] * v[1] - 4.0).abs() < 1e-5);
}

#[test]
fn detects_infeasibility() {
    let mut b = ProblemBuilder::new();
    let x = b.add_nonneg(2);
    b.add_eq(x.at(0) + x.at(1), LinExpr::constant(-1.0));
    b.minimize(x.at(0));
    let sol = solve(&b.build().unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
}

#[test]
fn detects_unboundedness() {
    let mut b = ProblemBuilder::new();
    let x = b.add_nonneg(2);
    b.add_eq(x.at(0) - x.at(1), LinExpr::zero());
    b.minimize(-x.at(0));
    let sol = solve(&b.build().unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, Status::Unbounded);
}

#[test]
fn contradictory_duplicate_rows_are_infeasible() {
    let mut b = ProblemBuilder::new();
    let x = b.add_nonneg(2);
    b.add_eq(x.at(0) + x.at(1), LinExpr::constant(1.0));
    b.add_eq(x.at(0) * 2.0 + x.at(1) * 2.0, LinExpr::constant(3.0));
    b.minimize(x.at(0));
    assert_eq!(solve(&b.build().unwrap(), &settings()).unwrap().status, Status::Infeasible);
}

#[test]
fn duplicate_rows_do_not_break_the_solve() {
    let mut b = ProblemBuilder::new();
    let x = b.add_nonneg(2);
    b.add_eq(x.at(0) + x.at(1), LinExpr::constant(1.0));
    b.add_eq(x.at(0) * -3.0 - x.at(1) * 3.0, LinExpr::constant(-3.0));
    b.minimize(x.at(0) * 2.0 + x.at(1));
    let sol = solve(&b.build().unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_obj - 1.0).abs() < 1e-7);
    assert_eq!(sol.y.len(), 2);
}

#[test]
fn dump_roundtrip_solves_identically() {
    let mut b = ProblemBuilder::new();
    let x = b.add_psd(2);
    let t = b.add_soc(3);
    b.add_eq(x.trace(), LinExpr::constant(2.0));
    b.add_eq(t.at(1), x.inner(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])));
    b.add_eq(t.at(2), LinExpr::constant(1.0));
    b.minimize(t.at(0));
    let p = b.build().unwrap();
    let q = read_problem(&write_problem(&p)).unwrap();
    let s1 = solve(&p, &settings()).unwrap();
    let s2 = solve(&q, &settings()).unwrap();
    assert_eq!(s1.primal_obj, s2.primal_obj);
    assert!((s1.primal_obj - 1.0).abs() < 1e-6);
}

/// Builds a problem with a known strictly feasible primal point `x0` and dual
/// point `(y0, s0)`, so it is solvable and bounded.
fn feasible_problem(cones: &[ConeSpec], m: usize, seed: &[f64]) -> (ConicProblem, DVector<f64>) {
    let mut it = seed.iter().copied().cycle();
    let mut next = move || it.next().unwrap();
    let n: usize = cones.iter().map(ConeSpec::len).sum();
    let interior = |next: &mut dyn FnMut() -> f64| {
        let mut v = DVector::zeros(n);
        let mut off = 0;
        for cone in cones {
            match *cone {
                ConeSpec::NonNeg(k) => {
                    for i in 0..k {
                        v[off + i] = 0.1 + next().abs();
                    }
                }
                ConeSpec::Soc(k) => {
                    let tail = DVector::from_fn(k - 1, |_, _| next());
                    v[off] = tail.norm() + 0.1 + next().abs();
                    v.rows_mut(off + 1, k - 1).copy_from(&tail);
                }
                ConeSpec::Psd(order) => {
                    let g = DMatrix::from_fn(order, order, |_, _| next());
                    let mat = &g * g.transpose() + DMatrix::identity(order, order) * 0.1;
                    v.rows_mut(off, cone.len()).copy_from(&svec(&mat));
                }
            }
            off += cone.len();
        }
        v
    };
    let x0 = interior(&mut next);
    let s0 = interior(&mut next);
    let a = DMatrix::from_fn(m, n, |_, _| next());
    let y0 = DVector::from_fn(m, |_, _| next());
    let b = &a * &x0;
    let c = a.tr_mul(&y0) + &s0;
    (ConicProblem::new(c, a, b, cones.to_vec()).unwrap(), x0)
}

fn in_cone(cones: &[ConeSpec], v: &DVector<f64>, tol: f64) -> bool {
    let mut off = 0;
    for cone in cones {
        let ok = match *cone {
            ConeSpec::NonNeg(k) => (0..k).all(|i| v[off + i] >= -tol),
            ConeSpec::Soc(k) => v[off] + tol >= v.rows(off + 1, k - 1).norm(),
            ConeSpec::Psd(order) => {
                let m = swipt_maxmin::cone::smat(v.rows(off, cone.len()).as_slice(), order);
                SymmetricEigen::new(m).eigenvalues.min() >= -tol
            }
        };
        if !ok {
            return false;
        }
        off += cone.len();
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_feasible_problems_satisfy_kkt(
        seed in proptest::collection::vec(-1.0f64..1.0, 40..80),
        m in 1usize..5,
        order in 1usize..4,
    ) {
        let cones = [ConeSpec::NonNeg(3), ConeSpec::Soc(3), ConeSpec::Psd(order)];
        let (p, x0) = feasible_problem(&cones, m, &seed);
        let sol = solve(&p, &settings()).unwrap();
        prop_assert_eq!(sol.status, Status::Optimal, "{:?}", sol.diagnostics);
        prop_assert!(sol.primal_res <= 1e-7 && sol.dual_res <= 1e-7 && sol.rel_gap <= 1e-7);
        let scale = 1.0 + sol.x.amax() + sol.s.amax();
        prop_assert!(in_cone(&cones, &sol.x, 1e-9 * scale));
        prop_assert!(in_cone(&cones, &sol.s, 1e-9 * scale));
        // x0 is feasible, so the optimum is no worse
        prop_assert!(sol.primal_obj <= p.c.dot(&x0) + 1e-6 * (1.0 + sol.primal_obj.abs()));
        // complementary slackness
        prop_assert!(sol.x.dot(&sol.s).abs() <= 1e-6 * (1.0 + sol.primal_obj.abs()));
    }
}
