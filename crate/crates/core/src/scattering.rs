//! Zero-energy scattering solution `−Δu + ½Vu = 0`, the scattering length and
//! the derived functions `g = Vu`, `φ = V(1 − u)`.

use std::io::Write as _;
use std::path::Path;

use serde_json::json;

use crate::error::{Error, Result};
use crate::numerics::geometry::{s_n, sphere_area};
use crate::numerics::interp::Hermite;
use crate::numerics::kernel::{radial_kernel, radial_transform};
use crate::numerics::ode::{dopri5, StepControl, Trajectory};
use crate::potentials::{DecayClass, RadialPotential};

#[derive(Debug, Clone, Copy)]
pub struct ScatterOptions {
    /// Relative tolerance of the ODE integration.
    pub tol: f64,
    /// Outer radius of the exported grid; defaults to four matching radii.
    pub r_max: Option<f64>,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        ScatterOptions { tol: 1e-10, r_max: None }
    }
}

#[derive(Debug, Clone)]
enum Interior {
    /// u vanishes on [0, R₀).
    HardCore,
    Numeric(Hermite),
}

#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    n: u32,
    potential: RadialPotential,
    a_pow: f64,
    a_pow_err: f64,
    r_match: f64,
    r_max: f64,
    interior: Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatValues {
    pub g_hat: f64,
    pub phi_hat: f64,
    pub w_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMetrics {
    pub gamma: f64,
    pub gamma_tilde: f64,
    /// Set when ĝ₀ = 0 and γ̃ is reported as 0 by convention.
    pub degenerate: bool,
    /// γ̃ ≤ γ/(2 s_n).
    pub bound_holds: bool,
}

/// Solves the zero-energy scattering equation for `potential` in dimension `n`.
pub fn solve_zero_energy(potential: &RadialPotential, n: u32, opts: ScatterOptions) -> Result<ScatteringSolution> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension must be at least 3, got {n}")));
    }
    if !(opts.tol > 0.0 && opts.tol < 1e-2) {
        return Err(Error::Domain(format!("tolerance {} outside (0, 1e-2)", opts.tol)));
    }
    let nf = f64::from(n);
    if let RadialPotential::HardCore { r0 } = potential {
        let r_max = opts.r_max.unwrap_or(4.0 * r0).max(*r0);
        return Ok(ScatteringSolution {
            n,
            potential: potential.clone(),
            a_pow: r0.powf(nf - 2.0),
            a_pow_err: 0.0,
            r_match: *r0,
            r_max,
            interior: Interior::HardCore,
        });
    }

    let (r_match, tail_rel) = potential.cutoff(n);
    let total = potential.moment(n, 0)?;
    // P(r) ≤ ½∫_0^r V s^{n-1} ds, so rescaling by this bound keeps P = O(1)
    let p_scale = 0.5 * total / sphere_area(n);
    let r_max = opts.r_max.unwrap_or(4.0 * r_match).max(r_match);
    if p_scale == 0.0 {
        let xs = vec![0.0, r_match];
        return Ok(ScatteringSolution {
            n,
            potential: potential.clone(),
            a_pow: 0.0,
            a_pow_err: 0.0,
            r_match,
            r_max,
            interior: Interior::Numeric(Hermite::new(xs, vec![1.0, 1.0], vec![0.0, 0.0])),
        });
    }

    let eps = 1e-6 * r_match.min(1.0);
    let nm1 = n as i32 - 1;
    let rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let rn = r.powi(nm1);
        [y[1] * p_scale / rn, 0.5 * potential.value(r) * y[0] * rn / p_scale]
    };
    let ctl = StepControl {
        rel_tol: opts.tol,
        abs_tol: opts.tol * 1e-3,
        max_step: potential.range() / 64.0,
        max_steps: 2_000_000,
    };
    let edges = breakpoints(potential, eps, r_match);
    let mut traj: Trajectory<2> = Trajectory::default();
    let mut y = [1.0, 0.0];
    for w in edges.windows(2) {
        y = dopri5(&rhs, w[0], w[1], y, ctl, &mut traj)?;
    }

    let p_end = y[1] * p_scale;
    let b = p_end / (2.0 - nf);
    let big_a = y[0] - b * r_match.powf(2.0 - nf);
    if !(big_a > 0.0 && big_a.is_finite()) {
        return Err(Error::InfiniteScatteringLength(format!(
            "exterior constant A = {big_a:.3e} is not positive; no classical solution"
        )));
    }
    let a_pow = -b / big_a;
    let xs = traj.t.clone();
    let ys: Vec<f64> = traj.y.iter().map(|v| v[0] / big_a).collect();
    let ds: Vec<f64> = traj.dy.iter().map(|d| d[0] / big_a).collect();
    // ODE error plus the tail bound (2 s_n)⁻¹ ∫_{|x|>R} V
    let a_pow_err = a_pow * opts.tol * 10.0 + tail_rel * total / (2.0 * s_n(n));
    Ok(ScatteringSolution {
        n,
        potential: potential.clone(),
        a_pow,
        a_pow_err,
        r_match,
        r_max,
        interior: Interior::Numeric(Hermite::new(xs, ys, ds)),
    })
}

/// Integration breakpoints on [eps, end] at every jump of V or its derivatives.
fn breakpoints(potential: &RadialPotential, eps: f64, end: f64) -> Vec<f64> {
    let mut pts = vec![eps];
    if let DecayClass::Compact(_) = potential.decay() {
        let knots = potential.panel_edges(3, f64::INFINITY);
        pts.extend(knots.into_iter().filter(|&r| r > eps && r < end));
    }
    pts.push(end);
    pts.dedup();
    pts
}

impl ScatteringSolution {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn potential(&self) -> &RadialPotential {
        &self.potential
    }

    /// a^{n−2}, the quantity every formula consumes.
    pub fn a_pow(&self) -> f64 {
        self.a_pow
    }

    /// Error bar on a^{n−2}.
    pub fn a_pow_err(&self) -> f64 {
        self.a_pow_err
    }

    pub fn a(&self) -> f64 {
        self.a_pow.powf(1.0 / f64::from(self.n - 2))
    }

    pub fn s_n(&self) -> f64 {
        s_n(self.n)
    }

    /// Radius beyond which u takes its exterior form 1 − a^{n−2} r^{2−n}.
    pub fn r_match(&self) -> f64 {
        self.r_match
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// u(r) and u'(r).
    pub fn u_with_derivative(&self, r: f64) -> (f64, f64) {
        let nf = f64::from(self.n);
        if r >= self.r_match {
            let t = self.a_pow * r.powf(2.0 - nf);
            return (1.0 - t, (nf - 2.0) * t / r);
        }
        match &self.interior {
            Interior::HardCore => (0.0, 0.0),
            Interior::Numeric(h) => {
                let (lo, _) = h.domain();
                if r <= lo {
                    (h.ys()[0], 0.0)
                } else {
                    h.eval_with_derivative(r)
                }
            }
        }
    }

    pub fn u(&self, r: f64) -> f64 {
        self.u_with_derivative(r).0
    }

    /// g(r) = V(r) u(r); finite for every potential except inside a hard core.
    pub fn g(&self, r: f64) -> f64 {
        let v = self.potential.value(r);
        if v == 0.0 {
            0.0
        } else {
            v * self.u(r)
        }
    }

    /// φ(r) = V(r)(1 − u(r)).
    pub fn phi(&self, r: f64) -> f64 {
        let v = self.potential.value(r);
        if v == 0.0 {
            0.0
        } else {
            v * (1.0 - self.u(r))
        }
    }

    /// Radial panel edges suited to integrating g, φ or V against smooth weights.
    pub fn quadrature_edges(&self, max_width: f64) -> Vec<f64> {
        self.potential.panel_edges(self.n, max_width)
    }

    pub fn g_hat(&self, p: f64) -> f64 {
        if let RadialPotential::HardCore { r0 } = self.potential {
            // g is the surface measure 2(n−2)R₀⁻¹ δ(|x| − R₀)
            return 2.0 * self.s_n() * self.a_pow * radial_kernel(self.n, p * r0);
        }
        let edges = self.quadrature_edges(self.potential.range() / 16.0);
        radial_transform(self.n, p, &edges, |r| self.g(r)).0
    }

    pub fn phi_hat(&self, p: f64) -> Result<f64> {
        if self.potential.is_hard_core() {
            return Err(Error::NonIntegrable("φ = V(1 − u) is not integrable for a hard core".into()));
        }
        let edges = self.quadrature_edges(self.potential.range() / 16.0);
        Ok(radial_transform(self.n, p, &edges, |r| self.phi(r)).0)
    }

    pub fn w_hat(&self, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Err(Error::Singularity("ŵ_p = ĝ_p/(2p²) is singular at p = 0".into()));
        }
        Ok(self.g_hat(p) / (2.0 * p * p))
    }

    /// (ĝ_p, φ̂_p, ŵ_p).
    pub fn hat_functions(&self, p: f64) -> Result<HatValues> {
        Ok(HatValues { g_hat: self.g_hat(p), phi_hat: self.phi_hat(p)?, w_hat: self.w_hat(p)? })
    }

    /// γ = ∫V|x|^{2−n} and γ̃ = φ̂₀/ĝ₀.
    pub fn gamma_metrics(&self) -> Result<GammaMetrics> {
        let gamma = self.potential.moment(self.n, 2 - self.n as i32)?;
        let g0 = self.g_hat(0.0);
        let phi0 = self.phi_hat(0.0)?;
        let (gamma_tilde, degenerate) = if g0 == 0.0 { (0.0, true) } else { (phi0 / g0, false) };
        let bound = gamma / (2.0 * self.s_n());
        let bound_holds = gamma_tilde <= bound * (1.0 + 1e-9) + 1e-15;
        Ok(GammaMetrics { gamma, gamma_tilde, degenerate, bound_holds })
    }

    /// Grid points of the solver followed by exterior points up to r_max.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = match &self.interior {
            Interior::HardCore => vec![(0.0, 0.0)],
            Interior::Numeric(h) => h.xs().iter().zip(h.ys()).map(|(&r, &u)| (r, u)).collect(),
        };
        let last = out.last().map_or(0.0, |p| p.0);
        let steps = 64;
        for k in 0..=steps {
            let r = self.r_match + (self.r_max - self.r_match) * k as f64 / steps as f64;
            if r > last {
                out.push((r, self.u(r)));
            }
        }
        out
    }

    /// Writes the grid as two-column text `r u(r)`.
    pub fn write_grid(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (r, u) in self.grid() {
            write!(f, "{r:.16e} {u:.16e}\n")?;
        }
        f.flush()?;
        Ok(())
    }

    /// JSON record `{n, a, a_pow, g_hat_0, gamma, gamma_tilde}` with sorted keys.
    pub fn json_record(&self) -> Result<String> {
        let (gamma, gamma_tilde) = match self.gamma_metrics() {
            Ok(m) => (json!(m.gamma), json!(m.gamma_tilde)),
            Err(_) => (serde_json::Value::Null, serde_json::Value::Null),
        };
        let record = json!({
            "n": self.n,
            "a": self.a(),
            "a_pow": self.a_pow,
            "g_hat_0": self.g_hat(0.0),
            "gamma": gamma,
            "gamma_tilde": gamma_tilde,
        });
        serde_json::to_string_pretty(&record).map_err(|e| Error::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soft(v0: f64, r0: f64) -> RadialPotential {
        RadialPotential::soft_sphere(v0, r0).unwrap()
    }

    #[test]
    fn soft_sphere_3d_closed_form() {
        let sol = solve_zero_energy(&soft(2.0, 1.0), 3, ScatterOptions::default()).unwrap();
        let want = 1.0 - 1f64.tanh();
        assert!((sol.a() - want).abs() < 1e-9 * want, "a = {}", sol.a());
    }

    #[test]
    fn hard_core_is_exact() {
        let h = RadialPotential::hard_core(1.3).unwrap();
        for n in 3..=6 {
            let sol = solve_zero_energy(&h, n, ScatterOptions::default()).unwrap();
            assert_eq!(sol.a(), 1.3);
            assert_eq!(sol.u(1.0), 0.0);
            let r: f64 = 2.0;
            assert!((sol.u(r) - (1.0 - (1.3 / r).powi(n as i32 - 2))).abs() < 1e-15);
        }
    }

    #[test]
    fn free_potential() {
        let sol = solve_zero_energy(&soft(0.0, 1.0), 4, ScatterOptions::default()).unwrap();
        assert_eq!(sol.a(), 0.0);
        assert_eq!(sol.u(0.3), 1.0);
        assert_eq!(sol.g_hat(1.0), 0.0);
        assert_eq!(sol.phi_hat(1.0).unwrap(), 0.0);
        let m = sol.gamma_metrics().unwrap();
        assert!(m.degenerate && m.gamma == 0.0 && m.gamma_tilde == 0.0);
    }

    #[test]
    fn g_hat_zero_identity() {
        for n in [3u32, 4, 5] {
            for pot in [soft(2.0, 1.0), RadialPotential::gaussian(3.0, 0.7).unwrap()] {
                let sol = solve_zero_energy(&pot, n, ScatterOptions::default()).unwrap();
                let g0 = sol.g_hat(0.0);
                let want = 2.0 * sol.s_n() * sol.a_pow();
                assert!(((g0 - want) / g0).abs() < 1e-8, "n={n} {pot}: {g0} vs {want}");
            }
        }
    }

    #[test]
    fn hats_sum_to_potential_transform() {
        let pot = soft(2.0, 1.0);
        let sol = solve_zero_energy(&pot, 3, ScatterOptions::default()).unwrap();
        for p in [0.0, 0.7, 3.0, 11.0] {
            let v = pot.fourier_radial(p, 3).unwrap().value;
            let s = sol.g_hat(p) + sol.phi_hat(p).unwrap();
            assert!((s - v).abs() < 1e-10, "p={p}");
        }
        assert!(matches!(sol.w_hat(0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn gamma_soft_sphere() {
        let sol = solve_zero_energy(&soft(2.0, 1.0), 3, ScatterOptions::default()).unwrap();
        let m = sol.gamma_metrics().unwrap();
        assert!((m.gamma - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(m.bound_holds && !m.degenerate);
    }

    #[test]
    fn json_record_has_sorted_keys() {
        let sol = solve_zero_energy(&soft(2.0, 1.0), 3, ScatterOptions::default()).unwrap();
        let s = sol.json_record().unwrap();
        let keys: Vec<usize> = ["\"a\"", "\"a_pow\"", "\"g_hat_0\"", "\"gamma\"", "\"gamma_tilde\"", "\"n\""]
            .iter()
            .map(|k| s.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
