use logistic_steady::functional::{check_gradient, Functional, Reaction};
use logistic_steady::grid::DomainKind;
use logistic_steady::instanton::build_instanton;
use logistic_steady::minimize::{minimize_constrained, MinimizeOptions};
use logistic_steady::nonlinearity::{truncation_exponent, Nonlinearity, TruncatedNonlinearity};
use logistic_steady::obstacle::ObstacleSet;
use logistic_steady::oracles::verify_potential_decay;
use logistic_steady::spectral::check_lambda_window;
use logistic_steady::{BoundaryCondition, LaplaceOperator, RadialGrid};
use proptest::prelude::*;

struct Data {
    grid: RadialGrid,
    op: LaplaceOperator,
    a: Vec<f64>,
    b: Vec<f64>,
    h: Vec<f64>,
    ld: Vec<f64>,
}

fn data(dim: usize, intervals: usize) -> Data {
    let grid = RadialGrid::build(dim, DomainKind::WholeSpace { r_infinity: 60.0 }, intervals, 1.02).unwrap();
    let op = LaplaceOperator::new(&grid, BoundaryCondition::natural(&grid));
    let d = build_instanton(&grid);
    Data {
        a: d.iter().map(|v| v.powi(3)).collect(),
        b: grid.nodes().iter().map(|&r| if r > 2.0 { 5.0 } else { 0.0 }).collect(),
        h: grid.sample_fn(|r| (-r * r).exp()),
        ld: d.iter().map(|v| 0.7 * v).collect(),
        grid,
        op,
    }
}

fn comparison<'a>(s: &'a Data, lambda: f64, mu: f64) -> Functional<'a> {
    Functional { op: &s.op, lambda, mu, a: &s.a, h: &s.h, reaction: Reaction::Comparison { ld: &s.ld, beta: 3.0 } }
}

fn truncated<'a>(s: &'a Data, lambda: f64, mu: f64, m: f64) -> Functional<'a> {
    Functional {
        op: &s.op,
        lambda,
        mu,
        a: &s.a,
        h: &s.h,
        reaction: Reaction::Truncated { b: &s.b, j: TruncatedNonlinearity::new(Nonlinearity::power(4.0), m, truncation_exponent(s.grid.dim())) },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn analytic_gradient_matches_differences(seed in any::<u64>(), lambda in 2.0..20.0f64, mu in 0.0..1.0f64, m in 0.1..2.0f64) {
        let s = data(3, 120);
        let base: Vec<f64> = s.ld.iter().map(|v| 0.6 * v).collect();
        for f in [comparison(&s, lambda, mu), truncated(&s, lambda, mu, m)] {
            for sample in check_gradient(&f, &base, 4, seed) {
                prop_assert!(sample.relative_error <= 1e-6, "{:?}", sample);
            }
        }
    }

    #[test]
    fn minimizer_descends_monotonically_and_stays_feasible(lambda in 5.0..20.0f64, mu in 0.0..0.5f64, scale in 0.1..1.0f64) {
        let s = data(3, 100);
        let f = comparison(&s, lambda, mu);
        let start: Vec<f64> = s.ld.iter().map(|v| scale * v).collect();
        let obstacle = ObstacleSet::upper_only(s.ld.clone());
        let opts = MinimizeOptions { record_trace: true, max_iter: 400, ..Default::default() };
        let out = minimize_constrained(&f, &start, &obstacle, &opts).unwrap();
        prop_assert!(obstacle.contains(&out.u, 0.0));
        let mut prev = 0.0f64;
        for row in &out.trace {
            prop_assert!(row.energy_change <= prev + 1e-14 * prev.abs().max(1e-12));
            prev = row.energy_change;
        }
        prop_assert!(out.energy.total <= f.energy(&start).total + 1e-14);
    }

    #[test]
    fn ordered_obstacle_is_respected(lambda in 5.0..20.0f64, lo in 0.05..0.5f64) {
        let s = data(3, 80);
        let f = truncated(&s, lambda, 0.2, 1.0);
        let lower: Vec<f64> = s.ld.iter().map(|v| lo * v).collect();
        let obstacle = ObstacleSet::ordered(lower.clone(), s.ld.clone()).unwrap();
        let out = minimize_constrained(&f, &lower, &obstacle, &MinimizeOptions { max_iter: 300, ..Default::default() }).unwrap();
        prop_assert!(obstacle.contains(&out.u, 0.0));
    }

    #[test]
    fn truncation_is_continuous_and_agrees_below_level(m in 0.05..20.0f64, s in 0.0..40.0f64, dim in 3usize..6) {
        let g = Nonlinearity::power(4.0);
        let j = TruncatedNonlinearity::new(g.clone(), m, truncation_exponent(dim));
        let eps = 1e-9 * m;
        prop_assert!((j.eval(m + eps) - j.eval(m - eps)).abs() <= 1e-6 * g.eval(m).max(1e-300) + 1e-12);
        prop_assert!((j.primitive(m + eps) - j.primitive(m - eps)).abs() <= 3.0 * eps * g.eval(m) + 1e-15);
        if s <= m {
            prop_assert_eq!(j.eval(s), g.eval(s));
            prop_assert_eq!(j.primitive(s), g.primitive(s));
        }
    }

    #[test]
    fn comparison_energy_of_nonpositive_field_is_dirichlet_energy(lambda in 1.0..30.0f64, amp in 0.0..3.0f64, k in 0.5..5.0f64) {
        let s = data(3, 80);
        let f = comparison(&s, lambda, 0.0);
        let mut u: Vec<f64> = s.grid.nodes().iter().map(|&r| -amp * (1.0 + (k * r).sin().powi(2)) / (1.0 + r)).collect();
        s.op.enforce(&mut u);
        let e = f.energy(&u);
        prop_assert!(e.total >= 0.0);
        prop_assert!((e.total - 0.5 * s.op.energy_sq(&u)).abs() <= 1e-12 * e.total.max(1.0));
    }

    #[test]
    fn window_membership_matches_margins(l1 in 0.1..10.0f64, gap in 0.0..10.0f64, t in -0.5..1.5f64) {
        let ls = l1 + gap;
        let lambda = l1 + t * gap;
        let w = check_lambda_window(lambda, l1, ls);
        prop_assert_eq!(w.inside, lambda > l1 && lambda < ls);
        prop_assert!(!check_lambda_window(l1, l1, ls).inside);
        prop_assert!(check_lambda_window(l1 + 1.0, l1, f64::INFINITY).inside);
    }

    #[test]
    fn potential_is_linear_in_the_source(c in 0.1..10.0f64) {
        let g = RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 50.0 }, 200, 1.02).unwrap();
        let h = g.sample_fn(|r| (-r * r).exp());
        let hc: Vec<f64> = h.iter().map(|v| c * v).collect();
        let p = verify_potential_decay(&h, &g, 2.0).unwrap();
        let q = verify_potential_decay(&hc, &g, 2.0).unwrap();
        prop_assert!((q.c_ao - c * p.c_ao).abs() <= 1e-10 * q.c_ao);
        for (a, b) in p.w.iter().zip(&q.w) {
            prop_assert!((b - c * a).abs() <= 1e-10 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn quadrature_weights_sum_to_ball_volume(dim in 3usize..7, radius in 0.5..5.0f64, intervals in 20usize..200) {
        let g = RadialGrid::build(dim, DomainKind::Ball { radius }, intervals, 1.0).unwrap();
        let total: f64 = g.weights().iter().sum();
        prop_assert!((total - g.domain_volume()).abs() <= 1e-10 * total);
        let f = g.refined();
        prop_assert_eq!(f.intervals(), 2 * g.intervals());
        for (k, r) in g.nodes().iter().enumerate() {
            prop_assert!((f.nodes()[2 * k] - r).abs() <= 1e-14 * radius);
        }
    }
}
