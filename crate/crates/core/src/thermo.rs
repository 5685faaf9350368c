//! Discrete Legendre transforms and the finite-volume bounds used to pass between
//! canonical and grand-canonical energies.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::geometry::ball_volume;

/// Energy per volume sampled on a strictly increasing density grid, extended
/// piecewise linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GridFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::Domain("grid function needs equal, non-empty xs and ys".into()));
        }
        if xs[0] < 0.0 || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("densities must be ≥ 0 and strictly increasing".into()));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid function values must be finite".into()));
        }
        Ok(GridFunction { xs, ys })
    }

    /// Samples `f` on `xs`.
    pub fn sample(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let ys = xs.iter().map(|&x| f(x)).collect();
        GridFunction::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Linear interpolation; outside the grid is an error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.xs[0], *self.xs.last().unwrap());
        if !(x >= lo && x <= hi) {
            return Err(Error::Extrapolation(format!("ρ = {x} outside grid [{lo}, {hi}]")));
        }
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, self.xs.len().max(2) - 1);
        if self.xs.len() == 1 {
            return Ok(self.ys[0]);
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let t = (x - x0) / (x1 - x0);
        Ok(self.ys[i - 1] + t * (self.ys[i] - self.ys[i - 1]))
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.xs.windows(2).zip(self.ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect()
    }

    /// Convexity of the piecewise-linear extension, up to a relative slack on the slopes.
    pub fn is_convex(&self) -> bool {
        let s = self.slopes();
        s.windows(2).all(|w| w[1] >= w[0] - 1e-12 * (w[0].abs() + w[1].abs()).max(1e-300))
    }

    /// Reads two whitespace- or comma-separated columns; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
            xs.push(parse(cols[0])?);
            ys.push(parse(cols[1])?);
        }
        GridFunction::new(xs, ys)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        GridFunction::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in self.xs.iter().zip(&self.ys) {
            let _ = writeln!(out, "{x:.16e} {y:.16e}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugatePoint {
    pub mu: f64,
    pub value: f64,
    pub argmax_rho: f64,
    /// μ exceeds the last slope, so μρ − g(ρ) keeps growing past the grid.
    pub unbounded: bool,
}

/// g*(μ) = sup_ρ [μρ − g(ρ)] on a μ grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conjugate {
    pub points: Vec<ConjugatePoint>,
}

impl Conjugate {
    pub fn any_unbounded(&self) -> bool {
        self.points.iter().any(|p| p.unbounded)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.points
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "argmax_rho": p.argmax_rho,
                        "mu": p.mu,
                        "unbounded": p.unbounded,
                        "value": if p.unbounded { serde_json::Value::Null } else { p.value.into() },
                    })
                })
                .collect(),
        )
    }
}

/// Legendre transform over the grid vertices, which is exact for the
/// piecewise-linear extension.
pub fn legendre_transform(g: &GridFunction, mu_grid: &[f64]) -> Result<Conjugate> {
    if mu_grid.iter().any(|m| !m.is_finite()) {
        return Err(Error::Domain("μ grid must be finite".into()));
    }
    let last_slope = g.slopes().last().copied().unwrap_or(f64::NEG_INFINITY);
    let points = mu_grid
        .iter()
        .map(|&mu| {
            let (i, value) = g
                .xs
                .iter()
                .zip(&g.ys)
                .map(|(x, y)| mu * x - y)
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
            let unbounded = i + 1 == g.xs.len() && mu > last_slope && g.xs.len() > 1;
            ConjugatePoint { mu, value, argmax_rho: g.xs[i], unbounded }
        })
        .collect();
    Ok(Conjugate { points })
}

/// (g*)*(ρ) = sup_μ [μρ − g*(μ)] over the bounded points of a conjugate.
pub fn biconjugate_at(conj: &Conjugate, rho: f64) -> Result<f64> {
    conj.points
        .iter()
        .filter(|p| !p.unbounded)
        .map(|p| p.mu * rho - p.value)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or_else(|| Error::Domain("no bounded conjugate values".into()))
}

/// Bound on e − e** at grid points for a convex e and a μ grid of spacing `dmu`
/// covering its slopes.
pub fn biconjugate_tolerance(g: &GridFunction, dmu: f64) -> f64 {
    // the maximizer may jump across a run of collinear vertices, so only the span bounds it
    dmu * (g.xs[g.xs.len() - 1] - g.xs[0])
}

/// e(ρ) − sup_μ[μρ − e*(μ)]. For convex e this is within the grid tolerance of 0;
/// otherwise it is the distance from e to its convex envelope at ρ.
pub fn ensembles_gap(e: &GridFunction, rho: f64, mu_grid: &[f64]) -> Result<f64> {
    let value = e.eval(rho)?;
    let conj = legendre_transform(e, mu_grid)?;
    Ok(value - biconjugate_at(&conj, rho)?)
}

/// Uniform μ grid spanning the slopes of `g` with margin, and its spacing.
pub fn slope_mu_grid(g: &GridFunction, count: usize) -> (Vec<f64>, f64) {
    let s = g.slopes();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo - 1.0, hi + 1.0) } else { (-1.0, 1.0) };
    let count = count.max(2);
    let d = (hi - lo) / (count - 1) as f64;
    ((0..count).map(|i| lo + d * i as f64).collect(), d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimpleLower {
    pub value: f64,
    /// N = 1 has no pair term, so the bound carries no information.
    pub vacuous: bool,
}

/// E₀(N, L) ≥ (ε/2) v_n 4^{−n} Rⁿ N²/Lⁿ − N V(0)/2 when V ≥ ε on B(0, 2R).
pub fn simple_lower(eps: f64, r: f64, n_particles: u64, l: f64, v0_at_0: f64, n: u32) -> Result<SimpleLower> {
    if !(eps >= 0.0 && r > 0.0 && l > 0.0) {
        return Err(Error::Domain("need ε ≥ 0 and R, L > 0".into()));
    }
    if 2.0 * r >= l {
        return Err(Error::Geometry(format!("2R = {} must be below L = {l}", 2.0 * r)));
    }
    let nn = n_particles as f64;
    let c = ball_volume(n) * 4f64.powi(-(n as i32)) / 2.0;
    Ok(SimpleLower {
        value: c * eps * r.powi(n as i32) * nn * nn / l.powi(n as i32) - nn * v0_at_0 / 2.0,
        vacuous: n_particles <= 1,
    })
}

/// (1 + R/L)ⁿ e(ρ (1 + R/L)^{−n}).
pub fn duplicate_scaling(e: &GridFunction, rho: f64, l: f64, r: f64, n: u32) -> Result<f64> {
    if !(l > 0.0 && r >= 0.0) {
        return Err(Error::Domain("need L > 0 and R ≥ 0".into()));
    }
    let f = (1.0 + r / l).powi(n as i32);
    Ok(f * e.eval(rho / f)?)
}

/// e(ρ) ≤ V̂₀ρ/2 at every sample.
pub fn trivial_upper_holds(e: &GridFunction, v_hat0: f64) -> bool {
    e.xs.iter().zip(&e.ys).all(|(x, y)| *y <= v_hat0 * x / 2.0 * (1.0 + 1e-12) + 1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(a: f64, b: f64, k: usize) -> Vec<f64> {
        (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
    }

    #[test]
    fn quadratic_conjugate() {
        let g = GridFunction::sample(uniform(0.0, 10.0, 1000), |x| x * x).unwrap();
        let mus = uniform(0.0, 19.0, 50);
        let conj = legendre_transform(&g, &mus).unwrap();
        for p in &conj.points {
            assert!(!p.unbounded);
            assert!((p.value - p.mu * p.mu / 4.0).abs() <= 1e-4 + 1e-12, "{p:?}");
        }
    }

    #[test]
    fn linear_support_function() {
        let g = GridFunction::sample(uniform(0.0, 5.0, 10), |x| 2.0 * x).unwrap();
        let conj = legendre_transform(&g, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        for p in &conj.points[..3] {
            assert!(p.value.abs() < 1e-14 && !p.unbounded);
        }
        assert!(conj.points[3].unbounded);
    }

    #[test]
    fn simple_lower_golden() {
        let s = simple_lower(1.0, 1.0, 100, 10.0, 1.0, 3).unwrap();
        assert!((s.value - -49.6727507652510632).abs() < 1e-12);
        let one = simple_lower(1.0, 1.0, 1, 10.0, 3.0, 3).unwrap();
        assert!(one.vacuous);
        assert!(matches!(simple_lower(1.0, 5.0, 10, 10.0, 1.0, 3), Err(Error::Geometry(_))));
        assert_eq!(simple_lower(0.0, 1.0, 10, 10.0, 0.0, 3).unwrap().value, 0.0);
    }

    #[test]
    fn duplicate_scaling_examples() {
        let g = GridFunction::sample(uniform(0.0, 2.0, 2000), |x| x * x).unwrap();
        let v = duplicate_scaling(&g, 1.0, 10.0, 1.0, 3).unwrap();
        assert!((v - 1.1f64.powi(-3)).abs() < 1e-6);
        assert!((duplicate_scaling(&g, 1.0, 1e12, 1.0, 3).unwrap() - 1.0).abs() < 1e-9);
        assert!(matches!(duplicate_scaling(&g, 5.0, 10.0, 0.0, 3), Err(Error::Extrapolation(_))));
    }

    #[test]
    fn text_round_trip() {
        let g = GridFunction::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.1, 0.7]).unwrap();
        assert_eq!(GridFunction::from_text(&g.to_text()).unwrap(), g);
        assert!(GridFunction::from_text("0 0\n1").is_err());
    }
}
