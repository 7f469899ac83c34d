use khess_core::bifurcation::a_grid;
use khess_core::classify::{check_inward_invariance, g_value};
use khess_core::exponents::{eigenvalues, jacobian, p4_coords, q_star, stationary_points, PointLabel};
use khess_core::solver::{solve_orbit, MaximalIteration};
use khess_core::transform::{c_nk, forward, inverse, lv_rhs, LVField, PhasePoint};
use khess_core::{IntegratorConfig, ProblemParams, WeightSpec};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = WeightSpec> {
    prop_oneof![
        (0.1f64..10.0).prop_map(|c| WeightSpec::constant(c).unwrap()),
        (0.1f64..10.0, -1.5f64..3.0).prop_map(|(c, s)| WeightSpec::power(c, s).unwrap()),
        (0.5f64..3.0, 0.5f64..3.0, 0.0f64..2.0, 1.0f64..4.0)
            .prop_map(|(a, at, b, g)| WeightSpec::rational(a, at, b, g).unwrap()),
        (1.0f64..4.0).prop_map(|mu| WeightSpec::matukuma(mu).unwrap()),
    ]
}

/// (n, k) with n > 2k.
fn dims() -> impl Strategy<Value = (u32, u32)> {
    (1u32..4).prop_flat_map(|k| (2 * k + 1..2 * k + 9).prop_map(move |n| (n, k)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn transform_round_trip(
        (n, k) in dims(),
        q in 1.5f64..12.0,
        lambda in 0.01f64..100.0,
        wt in weights(),
        w in -50.0f64..-1e-3,
        wp in 1e-4f64..50.0,
        r in 1e-4f64..1e4,
    ) {
        prop_assume!(q > k as f64);
        let p = ProblemParams::new(n, k, q, lambda).unwrap();
        let pt = forward(w, wp, r, &p, &wt).unwrap();
        prop_assert!(pt.x > 0.0 && pt.y > 0.0);
        let back = inverse(&pt, &p, &wt).unwrap();
        prop_assert!(rel(back.r, r) < 1e-12);
        prop_assert!(rel(back.w, w) < 1e-10, "w {} vs {}", back.w, w);
        prop_assert!(rel(back.wprime, wp) < 1e-10, "w' {} vs {}", back.wprime, wp);
    }

    #[test]
    fn lambda_rescaling_leaves_orbit(
        (n, k) in dims(),
        q in 1.5f64..8.0,
        mu in 0.1f64..10.0,
        w in -5.0f64..-0.1,
        wp in 0.01f64..5.0,
        r in 0.01f64..100.0,
    ) {
        // (λ, w) -> (λ μ^{k-q}, μ w) maps solutions to solutions and fixes (x, y)
        prop_assume!(q > k as f64);
        let wt = WeightSpec::constant(1.0).unwrap();
        let p = ProblemParams::new(n, k, q, 1.0).unwrap();
        let ps = p.with_lambda(mu.powf(k as f64 - q)).unwrap();
        let a = forward(w, wp, r, &p, &wt).unwrap();
        let b = forward(mu * w, mu * wp, r, &ps, &wt).unwrap();
        prop_assert!(rel(b.x, a.x) < 1e-11 && rel(b.y, a.y) < 1e-11);
    }

    #[test]
    fn eigenvalues_match_trace_and_det(
        a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0, d in -10.0f64..10.0,
    ) {
        let m = [[a, b], [c, d]];
        let ev = eigenvalues(&m);
        let tr = ev[0] + ev[1];
        let det = ev[0] * ev[1];
        let scale = 1.0 + a.abs() + b.abs() + c.abs() + d.abs();
        prop_assert!((tr.re - (a + d)).abs() < 1e-12 * scale && tr.im.abs() < 1e-12 * scale);
        prop_assert!((det.re - (a * d - b * c)).abs() < 1e-10 * scale * scale && det.im.abs() < 1e-10 * scale * scale);
    }

    #[test]
    fn stationary_points_are_zeros((n, k) in dims(), q in 1.5f64..12.0, l in -1.9f64..3.0) {
        prop_assume!(q > k as f64);
        let p = ProblemParams::new(n, k, q, 1.0).unwrap();
        let l = l * k as f64;
        let field = LVField::new(p, WeightSpec::power(1.0, l).unwrap());
        for sp in stationary_points(&p, l) {
            let (dx, dy) = lv_rhs(0.0, sp.x, sp.y, &field);
            let s = 1.0 + sp.x.abs() + sp.y.abs();
            prop_assert!(dx.abs() < 1e-10 * s * s && dy.abs() < 1e-10 * s * s, "{:?}: {dx} {dy}", sp.label);
            let j = jacobian(&p, field.nu(0.0), sp.x, sp.y);
            prop_assert_eq!(j, sp.jacobian);
        }
    }

    #[test]
    fn p4_in_g_minus_beyond_critical((n, k) in dims(), l in -1.9f64..4.0, excess in 0.01f64..5.0) {
        // above q*(k, l), P4 sits in the open quadrant and inside G-
        let kf = k as f64;
        let l = l * kf;
        let qs = q_star(k, l, n).unwrap();
        let q = qs + excess;
        let p = ProblemParams::new(n, k, q, 1.0).unwrap();
        let (x, y) = p4_coords(&p, l);
        prop_assert!(x > 0.0 && y > 0.0, "P4 = ({x}, {y}) for q = {q}, q* = {qs}");
        prop_assert!(g_value(&p, x, y) < 0.0);
        let kinds: Vec<_> = stationary_points(&p, l).into_iter().filter(|s| s.label == PointLabel::P4).collect();
        prop_assert_eq!(kinds.len(), 1);
    }

    #[test]
    fn c_nk_is_binomial_over_n((n, k) in dims()) {
        let mut b = 1.0f64;
        for i in 0..k {
            b = b * (n - i) as f64 / (i + 1) as f64;
        }
        prop_assert!(rel(c_nk(n, k).unwrap() * n as f64, b) < 1e-14);
    }

    #[test]
    fn a_grid_is_log_spaced(a0 in 1e-3f64..10.0, span in 1.0f64..1e6, count in 16usize..300) {
        let g = a_grid(a0, a0 * span, count).unwrap();
        prop_assert_eq!(g.len(), count);
        prop_assert_eq!(g[0], a0);
        prop_assert_eq!(g[count - 1], a0 * span);
        let ratio = g[1] / g[0];
        for w in g.windows(2) {
            prop_assert!(w[1] > w[0]);
            prop_assert!(rel(w[1] / w[0], ratio) < 1e-9);
        }
    }

    #[test]
    fn tabulated_power_law_is_exact(c in 0.1f64..10.0, sigma in -1.0f64..3.0, r in 1e-3f64..1e3) {
        let pts: Vec<(f64, f64)> = (-40..=40).map(|i| {
            let r = 10f64.powf(i as f64 / 10.0);
            (r, c * r.powf(sigma))
        }).collect();
        let wt = WeightSpec::tabulated(&pts).unwrap();
        prop_assert!(rel(wt.rho(r), c * r.powf(sigma)) < 1e-10);
        prop_assert!((wt.l0() - sigma).abs() < 1e-8 && (wt.l_inf() - sigma).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn orbits_stay_in_quadrant(
        (n, k) in dims(),
        excess in 0.0f64..4.0,
        x0 in 0.0f64..8.0,
        y0 in 0.0f64..3.0,
        t0 in -5.0f64..5.0,
    ) {
        // under the growth assumption G- is forward invariant; the quadrant always is
        let wt = WeightSpec::constant(1.0).unwrap();
        let q = q_star(k, 0.0, n).unwrap() + excess;
        let p = ProblemParams::new(n, k, q, 1.0).unwrap();
        let field = LVField::new(p, wt);
        let cfg = IntegratorConfig::default();
        let orb = solve_orbit(&field, PhasePoint { t: t0, x: x0, y: y0 }, t0 + 15.0, &cfg).unwrap();
        prop_assert!(orb.samples.iter().all(|s| s.x >= 0.0 && s.y >= 0.0));
        prop_assert!(check_inward_invariance(&orb));
    }

    #[test]
    fn maximal_iterates_decrease(q in 1.5f64..5.0, frac in 0.05f64..0.9) {
        let p = ProblemParams::new(3, 1, q, 1.0).unwrap();
        let wt = WeightSpec::constant(1.0).unwrap();
        let lo = khess_core::solver::lambda_star_lower_bound(&p, &wt).unwrap();
        let p = p.with_lambda(frac * lo).unwrap();
        let mut it = MaximalIteration::new(&p, &wt).unwrap();
        let mut prev = it.current().to_vec();
        for _ in 0..30 {
            it.step();
            for (u, v) in it.current().iter().zip(&prev) {
                prop_assert!(*u <= v + 1e-12);
            }
            prev = it.current().to_vec();
        }
    }
}
