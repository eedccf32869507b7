mod common;

use common::{check_relax_trial, random_box, relax_cases, sample_in};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use validom::relax::*;

#[test]
fn every_primitive_is_valid_on_random_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in relax_cases() {
        for _ in 0..2000 {
            if let Err(msg) = check_relax_trial(&case, &mut rng, 5) {
                panic!("{msg}");
            }
        }
    }
}

#[test]
fn rbf_envelope_dominates_naive_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let k = Kernel {
        vars: vec![0, 1],
        center: vec![0.4, -0.9],
        weights: vec![0.7, 1.3],
        offset: 0.25,
    };
    let mut e = Expr::new(2);
    e.rbf(k.clone());
    let mut strictly_tighter = 0;
    for _ in 0..10_000 {
        let (bx, x) = random_box(&mut rng);
        let r = e.relax(&bx, &x);
        let r = r.last().unwrap();
        let (cv, cc) = rbf_naive(&k, &bx, &x);
        assert!(
            r.cv >= cv - 1e-15 && r.cc <= cc + 1e-15,
            "{:?} vs ({cv}, {cc})",
            r
        );
        if r.cc < cc - 1e-6 {
            strictly_tighter += 1;
        }
    }
    assert!(strictly_tighter > 1000, "{strictly_tighter}");
}

#[test]
fn affine_objective_bound_is_exact() {
    let mut e = Expr::new(2);
    let (a, b) = (e.var(0), e.var(1));
    e.affine(&[(a, 2.0), (b, -1.0)], 0.5);
    let bx = vec![Interval::new(-1.0, 3.0), Interval::new(0.0, 2.0)];
    let lb = lower_bound_objective(&e, &bx, DEFAULT_BOUND_STEPS);
    assert!((lb - (-2.0 - 2.0 + 0.5)).abs() < 1e-9, "{lb}");
}

#[test]
fn square_bound_between_interval_and_true_minimum() {
    let mut e = Expr::new(1);
    let x = e.var(0);
    e.sqr(x);
    let bx = vec![Interval::new(-1.0, 2.0)];
    let lb = lower_bound_objective(&e, &bx, DEFAULT_BOUND_STEPS);
    assert!(lb <= 0.0 && lb >= e.intervals(&bx).last().unwrap().lo);
}

#[test]
fn peaks_bound_on_full_domain_is_below_grid_minimum() {
    let mut e = Expr::new(2);
    peaks_expr(&mut e, 0, 1);
    let bx = vec![Interval::new(-3.0, 3.0); 2];
    let lb = lower_bound_objective(&e, &bx, DEFAULT_BOUND_STEPS);
    let (_, fmin) = common::grid_oracle_2d(
        &|x| common::peaks_reference(x[0], x[1]),
        &|_| true,
        [-3.0, -3.0],
        [3.0, 3.0],
        401,
    )
    .unwrap();
    assert!(lb <= fmin, "lb {lb} oracle {fmin}");
}

#[test]
fn cuts_only_remove_infeasible_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let cases = relax_cases();
    let peaks = &cases.iter().find(|c| c.name == "peaks").unwrap().expr;
    let circle = |x: &[f64]| 1.5 - x[0] * x[0] - x[1] * x[1];
    for _ in 0..300 {
        let (bx, _) = random_box(&mut rng);
        let mut g = Expr::new(2);
        let (a, b) = (g.var(0), g.var(1));
        let (a2, b2) = (g.sqr(a), g.sqr(b));
        g.affine(&[(a2, -1.0), (b2, -1.0)], 1.5);
        let mid: Vec<f64> = bx.iter().map(|i| i.mid()).collect();
        let cut = cc_cut(&g, &bx, &mid, 0.0);
        let lb = lower_bound_with_cuts(peaks, &bx, 5, &[cut]);
        let mut best = f64::INFINITY;
        for _ in 0..200 {
            let y = sample_in(&bx, &mut rng);
            if circle(&y) >= 0.0 {
                best = best.min(common::peaks_reference(y[0], y[1]));
            }
        }
        match lb {
            None => assert!(
                best.is_infinite(),
                "pruned a box with feasible value {best}"
            ),
            Some(lb) => assert!(lb <= best + 1e-9),
        }
    }
}

#[test]
fn propagation_never_removes_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for case in relax_cases() {
        for _ in 0..300 {
            let (bx, _) = random_box(&mut rng);
            let mut dom = case.expr.intervals(&bx);
            let out = dom.len() - 1;
            let y = sample_in(&bx, &mut rng);
            let fy = (case.f)(&y);
            dom[out] = dom[out].meet(Interval::new(fy - 0.3, fy + 0.3));
            assert!(
                case.expr.propagate(&mut dom),
                "{}: feasible box reported empty",
                case.name
            );
            for (v, &yv) in y.iter().enumerate() {
                let id = case.expr.var_node(v).unwrap();
                assert!(
                    dom[id].contains(yv)
                        || (dom[id].lo - yv).abs() < 1e-9
                        || (dom[id].hi - yv).abs() < 1e-9
                );
            }
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for case in relax_cases() {
        for _ in 0..50 {
            let (bx, x) = random_box(&mut rng);
            let _ = bx;
            let (v, g) = case.expr.gradient(&x, case.expr.output());
            assert!((v - (case.f)(&x)).abs() < 1e-9 * (1.0 + v.abs()));
            if case.name == "abs" && (x[0] - x[1]).abs() < 1e-4 {
                continue;
            }
            for j in 0..2 {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = ((case.f)(&xp) - (case.f)(&xm)) / (2.0 * h);
                assert!(
                    (fd - g[j]).abs() < 1e-4 * (1.0 + fd.abs()),
                    "{}: {fd} vs {}",
                    case.name,
                    g[j]
                );
            }
        }
    }
}

fn boxed(c: (f64, f64), w: (f64, f64)) -> Vec<Interval> {
    vec![
        Interval::new(c.0 - w.0, c.0 + w.0),
        Interval::new(c.1 - w.1, c.1 + w.1),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn interval_bounds_shrink_with_the_box(
        cx in -2.5f64..2.5, cy in -2.5f64..2.5,
        wx in 0.0f64..1.5, wy in 0.0f64..1.5,
        fx in 0.0f64..1.0, fy in 0.0f64..1.0,
        sx in 0.0f64..1.0, sy in 0.0f64..1.0,
    ) {
        let outer = boxed((cx, cy), (wx, wy));
        let inner = vec![
            Interval::new(outer[0].lo + fx * sx * 2.0 * wx * 0.5, outer[0].hi - (1.0 - fx) * sx * 2.0 * wx * 0.5),
            Interval::new(outer[1].lo + fy * sy * 2.0 * wy * 0.5, outer[1].hi - (1.0 - fy) * sy * 2.0 * wy * 0.5),
        ];
        for case in relax_cases() {
            let a = *case.expr.intervals(&outer).last().unwrap();
            let b = *case.expr.intervals(&inner).last().unwrap();
            let slack = 1e-9 * (1.0 + a.lo.abs().max(a.hi.abs()));
            prop_assert!(b.lo >= a.lo - slack && b.hi <= a.hi + slack, "{}: {:?} not inside {:?}", case.name, b, a);
        }
    }

    #[test]
    fn underestimator_is_convex_along_segments(
        cx in -2.5f64..2.5, cy in -2.5f64..2.5,
        wx in 0.01f64..1.5, wy in 0.01f64..1.5,
        t1 in 0.0f64..1.0, t2 in 0.0f64..1.0, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0,
        lam in 0.0f64..1.0,
    ) {
        let bx = boxed((cx, cy), (wx, wy));
        let p = |a: f64, b: f64| vec![bx[0].lo + a * bx[0].width(), bx[1].lo + b * bx[1].width()];
        let (x1, x2) = (p(t1, u1), p(t2, u2));
        let xm: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
        for case in relax_cases() {
            let cv = |x: &[f64]| case.expr.relax(&bx, x).last().unwrap().cv;
            let cc = |x: &[f64]| case.expr.relax(&bx, x).last().unwrap().cc;
            let tol = 1e-9 * (1.0 + cv(&x1).abs() + cv(&x2).abs() + cc(&x1).abs() + cc(&x2).abs());
            prop_assert!(cv(&xm) <= lam * cv(&x1) + (1.0 - lam) * cv(&x2) + tol, "{} cv not convex", case.name);
            prop_assert!(cc(&xm) >= lam * cc(&x1) + (1.0 - lam) * cc(&x2) - tol, "{} cc not concave", case.name);
        }
    }
}
