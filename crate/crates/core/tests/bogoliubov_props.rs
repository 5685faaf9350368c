use bosegas::bogoliubov::{phi_fn, quasiparticle, second_order_upper, SecondOrder};
use bosegas::potentials::RadialPotential;
use bosegas::scattering::{solve_zero_energy, ScatterOptions};
use proptest::prelude::*;

fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    f(0.5 * (lo + hi))
}

#[test]
fn phi_below_quadratic_and_increasing() {
    let mut prev = phi_fn(0.0).unwrap();
    for i in 1..=4000 {
        let t = 1e-3 * f64::from(i) * f64::from(i);
        let v = phi_fn(t).unwrap();
        assert!(v <= 2.0 * t * t, "t={t}");
        assert!(v >= prev, "t={t}");
        prev = v;
    }
}

proptest! {
    #[test]
    fn optimal_objective_matches_golden_section(x in 0.0f64..20.0) {
        let qp = quasiparticle(1.0, x).unwrap();
        let f = |e: f64| (e * e + 2.0 * x * e) / (1.0 - 2.0 * e);
        let min = golden_min(-2.0 * x - 2.0, 0.5 - 1e-9, f);
        prop_assert!(qp.m <= 0.0);
        prop_assert!((qp.m - min).abs() <= 1e-9 * (1.0 + min.abs()), "{} vs {}", qp.m, min);
    }

    #[test]
    fn parameter_identities(x in -0.2499f64..50.0) {
        let qp = quasiparticle(1.0, x).unwrap();
        let e = qp.e;
        prop_assert!(e < 0.5);
        prop_assert!(qp.h >= 0.0);
        let scale = 1.0 + x.abs();
        prop_assert!((qp.h - e * e / (1.0 - 2.0 * e)).abs() <= 1e-12 * scale);
        prop_assert!((qp.s - e * (1.0 - e) / (1.0 - 2.0 * e)).abs() <= 1e-12 * scale);
        prop_assert!((qp.s * qp.s - qp.h * (qp.h + 1.0)).abs() <= 1e-12 * scale * scale);
        prop_assert!((-e * e + e + x).abs() <= 1e-12 * scale);
        prop_assert!((qp.m - 0.5 * ((1.0 + 4.0 * x).sqrt() - 1.0 - 2.0 * x)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn e_bounded_by_argument(x in 0.0f64..2.0) {
        let qp = quasiparticle(1.0, x).unwrap();
        prop_assert!(qp.e.abs() <= x);
        prop_assert!((0.5 * (1.0 - (1.0 + 4.0 * x).sqrt())).abs() <= x);
    }
}

#[test]
fn q_integrand_nonnegative_where_argument_is() {
    for n in [3u32, 4, 5] {
        for pot in [RadialPotential::soft_sphere(2.0, 1.0).unwrap(), RadialPotential::gaussian(1.0, 1.0).unwrap()] {
            let sol = solve_zero_energy(&pot, n, ScatterOptions::default()).unwrap();
            let so = SecondOrder::new(&sol);
            let rho = 1e-6 / sol.a().powi(n as i32);
            let s = so.samples(rho).unwrap();
            for qp in s.qp.iter().filter(|qp| qp.t >= 0.0) {
                assert!(phi_fn(qp.t).unwrap() >= 0.0);
            }
        }
    }
}

#[test]
fn report_is_sum_of_parts() {
    let sol = solve_zero_energy(&RadialPotential::soft_sphere(2.0, 1.0).unwrap(), 3, ScatterOptions::default()).unwrap();
    let rho = 1e-6 / sol.a().powi(3);
    let r = second_order_upper(&sol, rho, 3).unwrap();
    let sum = r.leading + r.q + r.q_tilde + r.omega;
    assert!((r.e_total - sum).abs() <= 1e-14 * r.e_total.abs());
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

// Fit two constants on the first and third densities and require the fit to
// predict the last two.
#[test]
fn h_integral_scaling() {
    let pot = RadialPotential::soft_sphere(2.0, 1.0).unwrap();
    let ys = [1e-5, 1e-6, 1e-7, 1e-8, 1e-9];
    for n in [3u32, 4] {
        let sol = solve_zero_energy(&pot, n, ScatterOptions::default()).unwrap();
        let so = SecondOrder::new(&sol);
        let per_rho: Vec<f64> = ys
            .iter()
            .map(|&y| {
                let rho = y / sol.a().powi(n as i32);
                so.h_integral(&so.samples(rho).unwrap()) / rho
            })
            .collect();
        // n = 3: h/(ρ√Y) = A + B√Y; n = 4: h/(ρY) = A|ln Y| + B
        let (g, l): (Vec<f64>, Vec<f64>) = if n == 3 {
            (per_rho.iter().zip(&ys).map(|(h, y)| h / y.sqrt()).collect(), ys.iter().map(|y| y.sqrt()).collect())
        } else {
            (per_rho.iter().zip(&ys).map(|(h, y)| h / y).collect(), ys.iter().map(|y| y.ln().abs()).collect())
        };
        let slope = (g[2] - g[0]) / (l[2] - l[0]);
        let base = g[0] - slope * l[0];
        assert!(if n == 3 { base > 0.0 } else { slope > 0.0 });
        for i in 3..5 {
            let pred = slope * l[i] + base;
            assert!((pred - g[i]).abs() < 0.02 * g[i], "n={n} Y={}: {pred} vs {}", ys[i], g[i]);
        }
    }
}

#[test]
fn higher_dimension_corrections_scale_as_rho_squared() {
    let sol = solve_zero_energy(&RadialPotential::soft_sphere(2.0, 1.0).unwrap(), 5, ScatterOptions::default()).unwrap();
    let so = SecondOrder::new(&sol);
    let mut qt = Vec::new();
    let mut rest = Vec::new();
    for y in [1e-8, 1e-10, 1e-12] {
        let rho = y / sol.a().powi(5);
        let r = so.report(rho).unwrap();
        qt.push(r.q_tilde / (rho * rho));
        rest.push((r.e_total - r.leading) / (rho * rho));
    }
    assert!(spread(&qt) < 1.01, "{qt:?}");
    let rel = (rest[2] - rest[1]).abs() / rest[2].abs();
    assert!(rel < 1e-2, "{rest:?}");
}
