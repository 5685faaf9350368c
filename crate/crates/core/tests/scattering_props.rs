use bosegas::first_order::{cell_envelope, dyson_upper, DysonMode};
use bosegas::potentials::RadialPotential;
use bosegas::scattering::{solve_zero_energy, ScatterOptions, ScatteringSolution};
use proptest::prelude::*;

fn solve(pot: &RadialPotential, n: u32) -> ScatteringSolution {
    solve_zero_energy(pot, n, ScatterOptions::default()).unwrap()
}

fn sample_potential() -> impl Strategy<Value = RadialPotential> {
    prop_oneof![
        (0.1f64..20.0, 0.3f64..2.0).prop_map(|(v, r)| RadialPotential::soft_sphere(v, r).unwrap()),
        (0.1f64..20.0, 0.3f64..2.0).prop_map(|(v, w)| RadialPotential::gaussian(v, w).unwrap()),
    ]
}

/// Composite Simpson on [a, b] with `m` (even) intervals.
fn simpson(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fourier_bounded_by_zero_mode_and_even(pot in sample_potential(), n in 3u32..=5, p in 0.0f64..30.0) {
        let v0 = pot.fourier_radial(0.0, n).unwrap().value;
        let vp = pot.fourier_radial(p, n).unwrap();
        let vm = pot.fourier_radial(-p, n).unwrap();
        prop_assert!(vp.value.abs() <= v0 * (1.0 + 1e-12));
        prop_assert_eq!(vp.value, vm.value);
    }

    #[test]
    fn fourier_lipschitz(v0 in 0.1f64..10.0, r0 in 0.3f64..2.0, n in 3u32..=5) {
        let pot = RadialPotential::soft_sphere(v0, r0).unwrap();
        let lip = pot.moment(n, 1).unwrap();
        let ps: Vec<f64> = (0..=80).map(|i| i as f64 * 0.25).collect();
        let vs: Vec<f64> = ps.iter().map(|&p| pot.fourier_radial(p, n).unwrap().value).collect();
        for i in 1..ps.len() {
            let slope = (vs[i] - vs[i - 1]).abs() / (ps[i] - ps[i - 1]);
            prop_assert!(slope <= lip * (1.0 + 1e-9), "slope {} > {}", slope, lip);
        }
    }

    #[test]
    fn born_bound(pot in sample_potential(), n in 3u32..=5) {
        let sol = solve(&pot, n);
        let born = pot.moment(n, 0).unwrap() / (2.0 * sol.s_n());
        prop_assert!(sol.a_pow() <= born * (1.0 + 1e-10));
    }

    #[test]
    fn monotone_in_strength(v0 in 0.1f64..10.0, extra in 0.01f64..10.0, r0 in 0.3f64..2.0, n in 3u32..=5) {
        let weak = solve(&RadialPotential::soft_sphere(v0, r0).unwrap(), n);
        let strong = solve(&RadialPotential::soft_sphere(v0 + extra, r0).unwrap(), n);
        prop_assert!(weak.a() <= strong.a());
        for (r, u) in weak.grid().iter().map(|&(r, _)| (r, weak.u(r))) {
            prop_assert!(u >= strong.u(r) - 1e-10, "r = {}", r);
        }
    }

    #[test]
    fn solution_shape(pot in sample_potential(), n in 3u32..=5) {
        let sol = solve(&pot, n);
        let a = sol.a();
        let mut prev = -1.0;
        for (r, _) in sol.grid() {
            let u = sol.u(r);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&u));
            prop_assert!(u >= prev - 1e-12);
            if r > a {
                prop_assert!(u >= 1.0 - (a / r).powi(n as i32 - 2) - 1e-9);
            }
            prev = u;
        }
    }
}

#[test]
fn scaling_law() {
    for n in [3u32, 4, 5] {
        for pot in [RadialPotential::soft_sphere(2.0, 1.0).unwrap(), RadialPotential::gaussian(3.0, 0.7).unwrap()] {
            let a = solve(&pot, n).a();
            for lambda in [0.5, 2.0] {
                let scaled = solve(&pot.scaled(lambda).unwrap(), n).a();
                assert!((scaled - lambda * a).abs() <= 1e-8 * lambda * a, "n={n} {pot} λ={lambda}: {scaled} vs {}", lambda * a);
            }
        }
    }
}

#[test]
fn exterior_form_beyond_support() {
    for n in [3u32, 4, 5] {
        let sol = solve(&RadialPotential::soft_sphere(5.0, 1.2).unwrap(), n);
        for r in [1.3f64, 2.0, 4.0] {
            let want = 1.0 - sol.a_pow() / r.powi(n as i32 - 2);
            assert!((sol.u(r) - want).abs() < 1e-9, "n={n} r={r}");
        }
    }
}

// Newton's theorem turns the n-dimensional convolution with |x|^{2-n} into a
// radial integral with max(|x|, r)^{2-n}.
#[test]
fn representation_identity() {
    for n in [3u32, 4, 5] {
        let r0 = 1.0;
        let v0 = 4.0;
        let sol = solve(&RadialPotential::soft_sphere(v0, r0).unwrap(), n);
        let k = 1.0 / (2.0 * f64::from(n - 2));
        let pw = 2 - n as i32;
        for x in [0.1, 0.4, 0.8, 1.0, 2.5] {
            let kernel = |r: f64| v0 * sol.u(r) * r.powi(n as i32 - 1) * r.max(x).powi(pw);
            let integral = if x < r0 {
                simpson(0.0, x, 2000, kernel) + simpson(x, r0, 2000, kernel)
            } else {
                simpson(0.0, r0, 4000, kernel)
            };
            let lhs = 1.0 - sol.u(x);
            assert!((lhs - k * integral).abs() < 1e-9, "n={n} x={x}: {lhs} vs {}", k * integral);
        }
    }
}

#[test]
fn dyson_quadrature_below_closed_form() {
    for n in [3u32, 4, 5] {
        let sol = solve(&RadialPotential::soft_sphere(2.0, 1.0).unwrap(), n);
        for y in [1e-6, 1e-8, 1e-10] {
            let rho = y / sol.a().powi(n as i32);
            let quad = dyson_upper(&sol, rho, DysonMode::Quadrature).unwrap().value;
            let closed = dyson_upper(&sol, rho, DysonMode::ClosedForm).unwrap().value;
            let lead = sol.s_n() * sol.a_pow() * rho;
            assert!(lead <= quad && quad <= closed, "n={n} Y={y}: {lead} {quad} {closed}");
        }
    }
}

#[test]
fn superadditivity_surrogate() {
    let e: Vec<f64> = (0..=50).map(|m| (m * (m.max(1) - 1)) as f64).collect();
    for p in 1..=50usize {
        let ep = cell_envelope(&e, p as f64).unwrap().value;
        for m in p..=50 {
            let em = cell_envelope(&e, m as f64).unwrap().value;
            assert!(em >= m as f64 / (2.0 * p as f64) * ep, "m={m} p={p}");
        }
    }
}

proptest! {
    #[test]
    fn envelope_between_min_and_ceiling(
        tail in prop::collection::vec(0.0f64..5.0, 1..=12),
        t in 0.0f64..1.0,
    ) {
        let mut e = vec![0.0];
        e.extend(tail);
        let k = t * (e.len() - 1) as f64;
        let v = cell_envelope(&e, k).unwrap();
        let min = e.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(v.value <= e[k.ceil() as usize] + 1e-12);
        prop_assert!(v.value >= min - 1e-12);
        prop_assert!(v.weights.len() <= 2);
        let mean: f64 = v.weights.iter().map(|&(i, w)| i as f64 * w).sum();
        prop_assert!((mean - k).abs() < 1e-9);
    }
}
