use swipt_maxmin::linalg::{CVector, C64};
use swipt_maxmin::model::{generate_channels, received_rf_power, sinr, ChannelSet, EhCurve, Scenario};
use swipt_maxmin::optimal::{
    compute_bounds, goa, iteration_bound, solve_op2, solve_op3, solve_op4, GoaOptions, Op4Status,
};
use swipt_maxmin::Error;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn single_user(h: CVector, gamma: f64, sa: f64, sd: f64) -> (Scenario, ChannelSet) {
    let mut sc = Scenario::reference(h.len(), 1);
    sc.gamma_bar = vec![gamma];
    sc.sigma_a_sq = vec![sa];
    sc.sigma_d_sq = vec![sd];
    (sc, ChannelSet::from_vectors(vec![h]).unwrap())
}

#[test]
fn op2_single_user_matches_closed_form() {
    let h = CVector::new(vec![c(0.3, -0.2), c(0.1, 0.4), c(-0.5, 0.05)]).unwrap();
    let (sc, ch) = single_user(h.clone(), 10.0, 1e-10, 1e-8);
    let sol = solve_op2(&ch, &sc).unwrap();
    let expected = 10.0 * (1e-10 + 1e-8) / h.norm_sqr();
    assert!(rel(sol.total_power, expected) < 1e-6, "{} vs {expected}", sol.total_power);
    let dir = sol.f[0].normalized().unwrap();
    assert!(dir.phase_distance(&h.normalized().unwrap()) < 1e-6);
    assert!(sol.feasible);
}

#[test]
fn op2_orthogonal_users_decouple() {
    let h1 = CVector::new(vec![c(0.8, 0.1), c(0.0, 0.0)]).unwrap();
    let h2 = CVector::new(vec![c(0.0, 0.0), c(-0.2, 0.3)]).unwrap();
    let mut sc = Scenario::reference(2, 2);
    sc.gamma_bar = vec![10.0, 3.0];
    let ch = ChannelSet::from_vectors(vec![h1.clone(), h2.clone()]).unwrap();
    let sol = solve_op2(&ch, &sc).unwrap();
    for (k, h) in [h1, h2].iter().enumerate() {
        let alone = sc.gamma_bar[k] * (sc.sigma_a_sq[k] + sc.sigma_d_sq[k]) / h.norm_sqr();
        assert!(rel(sol.f[k].norm_sqr(), alone) < 1e-6);
    }
}

#[test]
fn op2_optimum_makes_every_sinr_tight() {
    let sc = Scenario::reference(4, 4);
    for r in 0..5 {
        let ch = generate_channels(&sc, r).unwrap();
        let sol = solve_op2(&ch, &sc).unwrap();
        for k in 0..sc.k {
            let s = ch.h[k].gain(&sol.f[k]);
            let i: f64 = (0..sc.k).filter(|&j| j != k).map(|j| ch.h[k].gain(&sol.f[j])).sum();
            let achieved = s / (i + sc.sigma_a_sq[k] + sc.sigma_d_sq[k]);
            assert!(rel(achieved, sc.gamma_bar[k]) < 1e-6, "user {k}: {achieved}");
        }
        assert!(sol.rank1_residual.iter().all(|&r| r < 1e-5));
    }
}

#[test]
fn op2_reports_identical_channels_as_infeasible() {
    let h = CVector::new(vec![c(0.5, 0.0), c(0.0, 0.5)]).unwrap();
    let sc = Scenario::reference(2, 2);
    let ch = ChannelSet::from_vectors(vec![h.clone(), h]).unwrap();
    let sol = solve_op2(&ch, &sc).unwrap();
    assert!(!sol.feasible);
    assert!(sol.total_power.is_infinite());
    assert!(matches!(compute_bounds(&ch, &sc), Err(Error::Infeasible)));
}

#[test]
fn op3_single_user_is_maximum_ratio() {
    let h = CVector::new(vec![c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
    let (sc, ch) = single_user(h.clone(), 10.0, 1e-7, 1e-5);
    let sol = solve_op3(&ch, &sc).unwrap();
    assert!(rel(sol.p_e, sc.p_t * h.norm_sqr() + 1e-7) < 1e-7);
    let expected = h.outer().scale(sc.p_t / h.norm_sqr());
    assert!(sol.f_matrices[0].sub(&expected).frobenius_norm() < 1e-6 * sc.p_t);
}

#[test]
fn op3_identical_channels_reduce_to_one_user() {
    let h = CVector::new(vec![c(0.3, -0.2), c(0.1, 0.4), c(0.2, 0.2)]).unwrap();
    let mut sc = Scenario::reference(3, 3);
    sc.sigma_a_sq = vec![1e-7; 3];
    let ch = ChannelSet::from_vectors(vec![h.clone(); 3]).unwrap();
    let sol = solve_op3(&ch, &sc).unwrap();
    assert!(rel(sol.p_e, sc.p_t * h.norm_sqr() + 1e-7) < 1e-7);
}

/// max over rank-two aggregates `P_T (t u u^H + (1 - t) v v^H)`, `v` orthogonal
/// to `u`, of the smaller of the two received powers; `u` swept on a grid of
/// `1e-2` rad and `t` chosen exactly.
fn op3_grid_oracle(h: &[CVector; 2], sc: &Scenario) -> f64 {
    let step = 1e-2;
    let mut best = 0.0_f64;
    let mut a = 0.0;
    while a <= std::f64::consts::FRAC_PI_2 {
        let mut phi = 0.0;
        while phi < 2.0 * std::f64::consts::PI {
            let u = CVector::new(vec![c(a.cos(), 0.0), C64::from_polar(a.sin(), phi)]).unwrap();
            let v = CVector::new(vec![C64::from_polar(-a.sin(), -phi), c(a.cos(), 0.0)]).unwrap();
            // received power of user k: P_T (t g_u + (1-t) g_v) + sigma_a
            let line = |k: usize| {
                let (gu, gv) = (h[k].gain(&u), h[k].gain(&v));
                (sc.p_t * (gu - gv), sc.p_t * gv + sc.sigma_a_sq[k])
            };
            let (s0, c0) = line(0);
            let (s1, c1) = line(1);
            let mut cand = vec![0.0, 1.0];
            if (s0 - s1).abs() > 0.0 {
                let t = (c1 - c0) / (s0 - s1);
                if (0.0..=1.0).contains(&t) {
                    cand.push(t);
                }
            }
            for t in cand {
                best = best.max((s0 * t + c0).min(s1 * t + c1));
            }
            phi += step;
        }
        a += step;
    }
    best
}

#[test]
fn op3_matches_grid_search_on_two_by_two() {
    let sc = Scenario::reference(2, 2);
    for r in 0..4 {
        let ch = generate_channels(&sc, r).unwrap();
        let sol = solve_op3(&ch, &sc).unwrap();
        let grid = op3_grid_oracle(&[ch.h[0].clone(), ch.h[1].clone()], &sc);
        assert!(rel(sol.p_e, grid) < 1e-3, "realization {r}: {} vs grid {grid}", sol.p_e);
        assert!(sol.p_e >= grid * (1.0 - 1e-9));
    }
}

#[test]
fn op3_and_op4_covariances_are_rank_one() {
    for (n, k) in [(4, 4), (6, 3), (8, 8)] {
        let sc = Scenario::reference(n, k);
        for r in 0..3 {
            let ch = generate_channels(&sc, r).unwrap();
            let o3 = solve_op3(&ch, &sc).unwrap();
            for m in &o3.f_matrices {
                if m.trace() > 1e-9 * sc.p_t {
                    let (_, res) = swipt_maxmin::linalg::rank1_extract(m, 1e-9).unwrap();
                    assert!(res < 1e-5, "OP3 residual {res}");
                }
            }
            let o4 = solve_op4(&ch, &sc, 0.5 * o3.p_e).unwrap();
            assert!(o4.rank1_residual.iter().all(|&r| r < 1e-5), "{:?}", o4.rank1_residual);
        }
    }
}

#[test]
fn op4_power_is_nondecreasing_in_target() {
    let sc = Scenario::reference(4, 4);
    let ch = generate_channels(&sc, 3).unwrap();
    let p_e = solve_op3(&ch, &sc).unwrap().p_e;
    let mut prev = 0.0;
    for i in 1..=12 {
        let p_hat = p_e * i as f64 / 10.0;
        let t = solve_op4(&ch, &sc, p_hat).unwrap().min_power;
        let t_up = solve_op4(&ch, &sc, 1.1 * p_hat).unwrap().min_power;
        assert!(t >= prev * (1.0 - 1e-7));
        assert!(t_up >= t * (1.0 - 1e-7));
        prev = t;
    }
}

/// Least power reaching `p_hat` for one user with both constraints active:
/// `(1 - gamma sd / (p g - gamma sa)) (p g + sa) = p_hat`, solved by Newton
/// from the right, where the left side is increasing and concave.
fn single_user_power(g: f64, gamma: f64, sa: f64, sd: f64, p_hat: f64) -> f64 {
    let f = |p: f64| (1.0 - gamma * sd / (p * g - gamma * sa)) * (p * g + sa) - p_hat;
    let df = |p: f64| {
        let m = p * g - gamma * sa;
        g * (1.0 - gamma * sd / m) + (p * g + sa) * gamma * sd * g / (m * m)
    };
    let mut p = (p_hat + gamma * (sa + sd)) * 4.0 / g + 1.0;
    for _ in 0..200 {
        let step = f(p) / df(p);
        p -= step;
        if step.abs() < 1e-16 * p {
            break;
        }
    }
    p
}

#[test]
fn op4_single_user_matches_newton_oracle() {
    let h = CVector::new(vec![c(0.05, 0.02), c(-0.03, 0.04), c(0.01, -0.06)]).unwrap();
    let (sc, ch) = single_user(h.clone(), 10.0, 1e-10, 1e-8);
    let g = h.norm_sqr();
    for p_hat in [1e-6, 1e-4, 1e-2] {
        let sol = solve_op4(&ch, &sc, p_hat).unwrap();
        let oracle = single_user_power(g, 10.0, 1e-10, 1e-8, p_hat);
        assert!(rel(sol.min_power, oracle) < 1e-6, "P_hat {p_hat}: {} vs {oracle}", sol.min_power);
    }
}

#[test]
fn op4_approaches_op2_as_target_vanishes() {
    let sc = Scenario::reference(4, 4);
    for r in 0..3 {
        let ch = generate_channels(&sc, r).unwrap();
        let t2 = solve_op2(&ch, &sc).unwrap().total_power;
        let t4 = solve_op4(&ch, &sc, 1e-12).unwrap().min_power;
        assert!(rel(t4, t2) < 1e-4, "{t4} vs {t2}");
    }
}

#[test]
fn op4_rejects_nonpositive_target() {
    let sc = Scenario::reference(2, 2);
    let ch = generate_channels(&sc, 0).unwrap();
    assert!(matches!(solve_op4(&ch, &sc, 0.0), Err(Error::InvalidInput(_))));
    assert!(matches!(solve_op4(&ch, &sc, f64::NAN), Err(Error::InvalidInput(_))));
}

#[test]
fn op4_unreachable_sinr_is_infeasible() {
    let h = CVector::new(vec![c(0.5, 0.0), c(0.0, 0.5)]).unwrap();
    let sc = Scenario::reference(2, 2);
    let ch = ChannelSet::from_vectors(vec![h.clone(), h]).unwrap();
    let sol = solve_op4(&ch, &sc, 1e-3).unwrap();
    assert_eq!(sol.status, Op4Status::Infeasible);
    assert!(sol.min_power.is_infinite());
}

#[test]
fn bounds_are_ordered_and_sandwich_the_optimum() {
    let sc = Scenario::reference(4, 4);
    let curve = EhCurve::demo(sc.s_e);
    for r in 0..6 {
        let ch = generate_channels(&sc, r).unwrap();
        let out = goa(&ch, &sc, &curve, &GoaOptions::default()).unwrap();
        let b = &out.bounds;
        assert!(b.is_ordered(1e-9), "{b:?}");
        assert!(b.p_i_unscaled < b.p_i);
        let p = out.solution.p_star;
        assert!(b.p_lb <= p * (1.0 + 1e-6) && p <= b.p_ub * (1.0 + 1e-6), "{} {p} {}", b.p_lb, b.p_ub);
    }
}

#[test]
fn lower_bound_degrades_smoothly_as_sinr_vanishes() {
    let base = Scenario::reference(4, 4);
    let ch = generate_channels(&base, 1).unwrap();
    let mut prev = f64::INFINITY;
    for gamma in [1.0, 1e-1, 1e-2, 1e-3] {
        let mut sc = base.clone();
        sc.gamma_bar = vec![gamma; 4];
        let b = compute_bounds(&ch, &sc).unwrap();
        assert!(b.p_i.is_finite() && b.p_i > 0.0);
        assert!(b.min_power_id > 0.0 && b.min_power_id < prev);
        prev = b.min_power_id;
    }
}

fn single_user_optimum(g: f64, sc: &Scenario) -> f64 {
    let (gm, sa, sd) = (sc.gamma_bar[0], sc.sigma_a_sq[0], sc.sigma_d_sq[0]);
    let rho = gm * sd / (sc.p_t * g - gm * sa);
    (1.0 - rho) * (sc.p_t * g + sa)
}

#[test]
fn goa_single_user_matches_closed_form() {
    let h = CVector::new(vec![c(1.0, 0.0)]).unwrap();
    let (sc, ch) = single_user(h, 10.0, 1e-10, 1e-8);
    let curve = EhCurve::linear(1.0, 0.0).unwrap();
    let out = goa(&ch, &sc, &curve, &GoaOptions::default()).unwrap();
    let exact = single_user_optimum(1.0, &sc);
    assert!((out.solution.p_star - exact).abs() < 1e-4, "{} vs {exact}", out.solution.p_star);

    let sc = Scenario::reference(4, 1);
    let curve = EhCurve::demo(sc.s_e);
    for r in 0..5 {
        let ch = generate_channels(&sc, r).unwrap();
        let out = goa(&ch, &sc, &curve, &GoaOptions::default()).unwrap();
        let exact = single_user_optimum(ch.h[0].norm_sqr(), &sc);
        assert!((out.solution.p_star - exact).abs() < 1e-4);
    }
}

#[test]
fn goa_optimum_is_tight_and_self_consistent() {
    let sc = Scenario::reference(4, 4);
    let curve = EhCurve::demo(sc.s_e);
    let xi = 1e-4;
    for r in 0..3 {
        let ch = generate_channels(&sc, r).unwrap();
        let out = goa(&ch, &sc, &curve, &GoaOptions::default()).unwrap();
        let sol = &out.solution;
        assert!((sol.design.total_power() - sc.p_t).abs() <= 1e-5 * sc.p_t);
        assert!(sol.sinr_violation(&sc) < 1e-5);
        for k in 0..sc.k {
            assert!(rel(sinr(&sc, &ch, &sol.design, k), sc.gamma_bar[k]) < 1e-5);
            assert!(received_rf_power(&sc, &ch, &sol.design, k) >= sol.p_star);
        }
        let at = solve_op4(&ch, &sc, sol.p_star).unwrap().min_power;
        assert!((at - sc.p_t).abs() < xi, "{at}");
        let above = solve_op4(&ch, &sc, sol.p_star * (1.0 + 10.0 * xi / sc.p_t)).unwrap().min_power;
        assert!(above > sc.p_t);
        assert!(out.rank1_residual.iter().all(|&r| r < 1e-5));
    }
}

#[test]
fn goa_is_insensitive_to_the_initial_bracket() {
    let sc = Scenario::reference(4, 4);
    let curve = EhCurve::demo(sc.s_e);
    let ch = generate_channels(&sc, 7).unwrap();
    let a = goa(&ch, &sc, &curve, &GoaOptions::default()).unwrap();
    let wide = GoaOptions {
        bracket: Some((0.99 * a.bounds.p_lb, 1.01 * a.bounds.p_ub)),
        ..GoaOptions::default()
    };
    let b = goa(&ch, &sc, &curve, &wide).unwrap();
    assert!((a.solution.p_star - b.solution.p_star).abs() <= 2e-4);
}

#[test]
fn goa_trace_is_json_lines() {
    let sc = Scenario::reference(3, 2);
    let curve = EhCurve::demo(sc.s_e);
    let ch = generate_channels(&sc, 0).unwrap();
    let out = goa(&ch, &sc, &curve, &GoaOptions::default()).unwrap();
    let text = out.trace.to_json_lines();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), out.trace.c + 1);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["p_p", "p_q", "p_tp", "p_tq", "delta"] {
            assert!(v.get(key).is_some());
        }
    }
    assert_eq!(out.trace.c_star_bound, iteration_bound(1e-4, out.trace.p_ub - out.trace.p_lb));
}

#[test]
fn goa_gives_up_on_a_bracket_without_the_optimum() {
    let sc = Scenario::reference(3, 2);
    let curve = EhCurve::demo(sc.s_e);
    let ch = generate_channels(&sc, 0).unwrap();
    let b = compute_bounds(&ch, &sc).unwrap();
    let opts = GoaOptions { bracket: Some((2.0 * b.p_e, 3.0 * b.p_e)), ..GoaOptions::default() };
    match goa(&ch, &sc, &curve, &opts) {
        Err(Error::AlgorithmFailure { limit, bound, trace }) => {
            assert_eq!(limit as i64, (4 * bound).max(64));
            assert_eq!(trace.lines().count(), limit + 1);
        }
        other => panic!("expected a failure, got {other:?}"),
    }
}

#[test]
fn iteration_bound_formula() {
    assert_eq!(iteration_bound(1e-4, 1e-4), 1);
    // ln(1e-2) / ln(0.618) = 9.57
    assert_eq!(iteration_bound(1e-4, 1e-2), 11);
}
