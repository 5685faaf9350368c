use bosegas::first_order::{envelope_at, lower_hull};
use bosegas::thermo::{
    biconjugate_at, biconjugate_tolerance, ensembles_gap, legendre_transform, slope_mu_grid, trivial_upper_holds,
    GridFunction,
};
use proptest::prelude::*;

fn grid_function() -> impl Strategy<Value = GridFunction> {
    (4usize..30)
        .prop_flat_map(|k| (prop::collection::vec(0.05f64..0.5, k), prop::collection::vec(-3.0f64..3.0, k + 1)))
        .prop_map(|(steps, ys)| {
            let mut xs = vec![0.0];
            for s in steps {
                xs.push(xs.last().unwrap() + s);
            }
            GridFunction::new(xs, ys).unwrap()
        })
}

fn convex_function() -> impl Strategy<Value = GridFunction> {
    (4usize..30)
        .prop_flat_map(|k| (prop::collection::vec(0.05f64..0.5, k), prop::collection::vec(-3.0f64..3.0, k), -1.0f64..1.0))
        .prop_map(|(steps, mut slopes, y0)| {
            slopes.sort_by(f64::total_cmp);
            let mut xs = vec![0.0];
            let mut ys = vec![y0];
            for (s, m) in steps.iter().zip(&slopes) {
                xs.push(xs.last().unwrap() + s);
                ys.push(ys.last().unwrap() + m * s);
            }
            GridFunction::new(xs, ys).unwrap()
        })
}

proptest! {
    #[test]
    fn transform_reverses_order(g in grid_function(), bumps in prop::collection::vec(0.0f64..1.0, 31)) {
        let ys: Vec<f64> = g.ys().iter().zip(&bumps).map(|(y, b)| y + b).collect();
        let h = GridFunction::new(g.xs().to_vec(), ys).unwrap();
        let mus: Vec<f64> = (0..81).map(|i| -8.0 + 0.2 * i as f64).collect();
        let (cg, ch) = (legendre_transform(&g, &mus).unwrap(), legendre_transform(&h, &mus).unwrap());
        for (a, b) in cg.points.iter().zip(&ch.points) {
            prop_assert!(a.value >= b.value);
        }
    }

    #[test]
    fn biconjugate_never_exceeds(g in grid_function()) {
        let (mus, _) = slope_mu_grid(&g, 300);
        let conj = legendre_transform(&g, &mus).unwrap();
        for (&x, &y) in g.xs().iter().zip(g.ys()) {
            prop_assert!(biconjugate_at(&conj, x).unwrap() <= y + 1e-12);
        }
    }

    #[test]
    fn biconjugate_recovers_convex(g in convex_function()) {
        let (mus, dmu) = slope_mu_grid(&g, 400);
        let conj = legendre_transform(&g, &mus).unwrap();
        let tol = biconjugate_tolerance(&g, dmu) + 1e-12;
        for (&x, &y) in g.xs().iter().zip(g.ys()) {
            prop_assert!(y - biconjugate_at(&conj, x).unwrap() <= tol);
        }
    }

    // On the hull slopes the biconjugate equals the convex envelope, so every
    // vertex shows a gap equal to its distance from the envelope. A steep final
    // segment keeps the linear extension past the grid from lowering the envelope.
    #[test]
    fn gap_is_envelope_distance(g in grid_function()) {
        let mut xs = g.xs().to_vec();
        let mut ys = g.ys().to_vec();
        xs.push(xs[xs.len() - 1] + 0.1);
        ys.push(100.0);
        let g = GridFunction::new(xs, ys).unwrap();
        let (xs, ys) = (g.xs(), g.ys());
        let mus: Vec<f64> = lower_hull(xs, ys).windows(2).map(|w| (ys[w[1]] - ys[w[0]]) / (xs[w[1]] - xs[w[0]])).collect();
        for (&x, &y) in g.xs().iter().zip(g.ys()) {
            let gap = ensembles_gap(&g, x, &mus).unwrap();
            let env = envelope_at(g.xs(), g.ys(), x).unwrap().value;
            prop_assert!((gap - (y - env)).abs() <= 1e-9 * (1.0 + y.abs()), "x={}: {} vs {}", x, gap, y - env);
        }
        prop_assert_eq!(g.is_convex(), g.xs().iter().all(|&x| ensembles_gap(&g, x, &mus).unwrap() <= 1e-9));
    }
}

#[test]
fn double_well_gap() {
    let xs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
    let g = GridFunction::sample(xs, |r| (r - 0.5).powi(2) * (r - 1.5).powi(2)).unwrap();
    assert!(!g.is_convex());
    let (mus, _) = slope_mu_grid(&g, 4000);
    let gap = ensembles_gap(&g, 1.0, &mus).unwrap();
    assert!((gap - 0.0625).abs() < 1e-3, "{gap}");
    assert!(ensembles_gap(&g, 0.5, &mus).unwrap().abs() < 1e-3);
}

#[test]
fn model_argmax_stays_interior() {
    let g = GridFunction::sample((0..=4000).map(|i| i as f64 * 0.01).collect(), |r| 0.7 * r * r - 1.2 * r).unwrap();
    let mus: Vec<f64> = (0..=40).map(|i| -1.0 + 0.5 * i as f64).collect();
    let conj = legendre_transform(&g, &mus).unwrap();
    for p in &conj.points {
        assert!(!p.unbounded);
        assert!(p.argmax_rho < 40.0, "μ={}", p.mu);
        let want = ((p.mu + 1.2) / 1.4).max(0.0);
        assert!((p.argmax_rho - want).abs() <= 0.01, "μ={}: {} vs {want}", p.mu, p.argmax_rho);
    }
}

#[test]
fn trivial_upper_on_model_energies() {
    let v_hat0 = 3.0;
    for c in [0.1, 0.5, 1.0] {
        let e = GridFunction::sample((0..=100).map(|i| i as f64 * 0.05).collect(), |r| v_hat0 * r / 2.0 * (1.0 - c * (-r).exp())).unwrap();
        assert!(trivial_upper_holds(&e, v_hat0));
    }
    let bad = GridFunction::sample(vec![0.0, 1.0, 2.0], |r| v_hat0 * r).unwrap();
    assert!(!trivial_upper_holds(&bad, v_hat0));
}
