//! The radial kernel of the n-dimensional Fourier transform.
//!
//! For a radial function `f`, the transform reduces to
//!
//! ```text
//! f̂(p) = |S^{n-1}| ∫₀^∞ f(r) Λ_n(p r) r^{n-1} dr,
//! Λ_n(x) = Γ(ν + 1) (2/x)^ν J_ν(x),   ν = n/2 - 1,
//! ```
//!
//! normalized so that `Λ_n(0) = 1`. Small arguments use the power series.
//! Larger arguments use spherical Bessel recurrences (odd n) or the Hankel
//! asymptotic expansion of J₀, J₁ followed by upward recurrence (even n).

use std::f64::consts::PI;

use super::geometry::sphere_area;
use super::quadrature::GaussRule;

/// Below this argument the even-dimension kernel uses its power series.
const EVEN_SERIES_CUT: f64 = 14.0;

/// Λ_n(x) for n ≥ 2 and any real x (the kernel is even).
pub fn radial_kernel(n: u32, x: f64) -> f64 {
    assert!(n >= 2, "radial kernel needs n >= 2");
    let x = x.abs();
    let nu = f64::from(n) / 2.0 - 1.0;
    if n % 2 == 1 {
        let l = (n - 3) / 2;
        if x < f64::from(l) + 1.0 {
            series(nu, x)
        } else {
            odd_kernel(l, x)
        }
    } else {
        let m = n / 2 - 1;
        if x < EVEN_SERIES_CUT.max(2.0 * nu + 4.0) {
            series(nu, x)
        } else {
            even_kernel(m, x)
        }
    }
}

/// Λ_n(x) − 1 without cancellation at small x.
pub fn radial_kernel_minus_one(n: u32, x: f64) -> f64 {
    let x = x.abs();
    if x >= 1.0 {
        return radial_kernel(n, x) - 1.0;
    }
    // the power series with its leading 1 dropped
    let nu = f64::from(n) / 2.0 - 1.0;
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..40 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// dΛ_n/dx = -(x/n) Λ_{n+2}(x).
pub fn radial_kernel_derivative(n: u32, x: f64) -> f64 {
    -x / f64::from(n) * radial_kernel(n + 2, x)
}

/// Radial transform `|S^{n-1}| ∫ f(r) Λ_n(p r) r^{n-1} dr` over the panels
/// `edges`, each subdivided so that no panel spans more than a third of an
/// oscillation. Returns the value and the difference between two Gauss orders.
pub fn radial_transform<F: Fn(f64) -> f64>(n: u32, p: f64, edges: &[f64], f: F) -> (f64, f64) {
    let hi = GaussRule::cached(20);
    let lo = GaussRule::cached(14);
    let max_width = if p > 0.0 { 2.0 / p } else { f64::INFINITY };
    let nm1 = n as i32 - 1;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for k in 0..pieces {
            let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let g = |r: f64| f(r) * radial_kernel(n, p * r) * r.powi(nm1);
            fine += hi.integrate(x0, x1, g);
            coarse += lo.integrate(x0, x1, g);
        }
    }
    let area = sphere_area(n);
    (area * fine, area * (fine - coarse).abs())
}

fn series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && kf > 0.5 * x {
            break;
        }
    }
    sum
}

/// (2l+1)!! j_l(x) / x^l via upward recurrence, valid for x ≳ l.
fn odd_kernel(l: u32, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let mut jm = j0;
    let mut j = s / (x * x) - c / x;
    for k in 1..l {
        let next = f64::from(2 * k + 1) / x * j - jm;
        jm = j;
        j = next;
    }
    let mut scale = 1.0;
    for k in 1..=l {
        scale *= f64::from(2 * k + 1) / x;
    }
    scale * j
}

fn even_kernel(m: u32, x: f64) -> f64 {
    let j0 = bessel_j_asymptotic(0.0, x);
    let j = if m == 0 {
        j0
    } else {
        let mut jm = j0;
        let mut jc = bessel_j_asymptotic(1.0, x);
        for k in 1..m {
            let next = 2.0 * f64::from(k) / x * jc - jm;
            jm = jc;
            jc = next;
        }
        jc
    };
    let mut scale = 1.0;
    for k in 1..=m {
        scale *= 2.0 * f64::from(k) / x;
    }
    scale * j
}

/// Hankel asymptotic expansion of J_ν(x), truncated at its smallest term.
fn bessel_j_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= last || term == 0.0 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
