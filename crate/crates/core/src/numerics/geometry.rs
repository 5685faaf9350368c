//! Dimension-dependent constants.

use std::f64::consts::PI;

/// Γ(k/2) for a positive integer `k`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "gamma_half requires k > 0");
    if k % 2 == 0 {
        (1..k / 2).map(f64::from).product()
    } else {
        // Γ(1/2) = √π, Γ(x + 1) = x Γ(x)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x + 0.25 < f64::from(k) / 2.0 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Surface measure |S^{n-1}| of the unit sphere in R^n.
pub fn sphere_area(n: u32) -> f64 {
    2.0 * PI.powf(f64::from(n) / 2.0) / gamma_half(n)
}

/// Volume v_n of the unit ball in R^n.
pub fn ball_volume(n: u32) -> f64 {
    sphere_area(n) / f64::from(n)
}

/// The leading-order constant s_n = (n - 2)|S^{n-1}|.
pub fn s_n(n: u32) -> f64 {
    f64::from(n - 2) * sphere_area(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((s_n(3) - 4.0 * PI).abs() < 1e-13);
        assert!((s_n(4) - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn gamma_half_integers() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half(3) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(8), 6.0);
    }
}
