//! Nonnegative radial pair potentials and their n-dimensional Fourier transforms.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::geometry::sphere_area;
use crate::numerics::interp::Hermite;
use crate::numerics::kernel::radial_transform;
use crate::numerics::quadrature::{uniform_edges, GaussRule};

/// Relative size of the neglected Gaussian tail.
const GAUSSIAN_TAIL: f64 = 1e-14;

/// Relative tolerance demanded of a radial transform.
const FOURIER_TOL: f64 = 1e-9;

/// Tabulated potential: monotone cubic through the samples, clamped at zero,
/// constant below the first sample and zero beyond the last one.
#[derive(Debug, Clone)]
pub struct Tabulated {
    interp: Hermite,
    source: Option<PathBuf>,
}

impl Tabulated {
    pub fn new(rs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if rs.len() < 2 || rs.len() != vs.len() {
            return Err(Error::Parse("tabulated potential needs at least two (r, V) rows".into()));
        }
        if rs[0] < 0.0 || rs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("tabulated radii must be nonnegative and strictly increasing".into()));
        }
        if let Some(v) = vs.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("tabulated potential has invalid value {v}")));
        }
        Ok(Tabulated { interp: Hermite::monotone(rs, vs), source: None })
    }

    /// Reads whitespace-separated `r V(r)` rows; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() < 2 {
                return Err(Error::Parse(format!("{}:{}: expected two columns", path.display(), lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))
            };
            rs.push(parse(cols[0])?);
            vs.push(parse(cols[1])?);
        }
        let mut t = Tabulated::new(rs, vs)?;
        t.source = Some(path.to_path_buf());
        Ok(t)
    }

    fn eval(&self, r: f64) -> f64 {
        let (lo, hi) = self.interp.domain();
        if r > hi {
            0.0
        } else if r < lo {
            self.interp.ys()[0]
        } else {
            self.interp.eval(r).max(0.0)
        }
    }

    fn knots(&self) -> &[f64] {
        self.interp.xs()
    }

    fn scaled(&self, lambda: f64) -> Self {
        let rs = self.knots().iter().map(|r| r * lambda).collect();
        let vs = self.interp.ys().iter().map(|v| v / (lambda * lambda)).collect();
        Tabulated { interp: Hermite::monotone(rs, vs), source: None }
    }
}

/// How a potential decays at large r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// Vanishes beyond the given radius.
    Compact(f64),
    /// Faster than any power.
    Gaussian,
}

#[derive(Debug, Clone)]
pub enum RadialPotential {
    HardCore { r0: f64 },
    SoftSphere { v0: f64, r0: f64 },
    /// `V(r) = v0 exp(-r²/w²)`.
    Gaussian { v0: f64, w: f64 },
    Tabulated(Tabulated),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierValue {
    pub p: f64,
    pub value: f64,
    pub error_estimate: f64,
}

impl RadialPotential {
    pub fn hard_core(r0: f64) -> Result<Self> {
        positive("R0", r0)?;
        Ok(RadialPotential::HardCore { r0 })
    }

    pub fn soft_sphere(v0: f64, r0: f64) -> Result<Self> {
        nonnegative("V0", v0)?;
        positive("R0", r0)?;
        Ok(RadialPotential::SoftSphere { v0, r0 })
    }

    pub fn gaussian(v0: f64, w: f64) -> Result<Self> {
        nonnegative("V0", v0)?;
        positive("w", w)?;
        Ok(RadialPotential::Gaussian { v0, w })
    }

    pub fn is_hard_core(&self) -> bool {
        matches!(self, RadialPotential::HardCore { .. })
    }

    pub fn eval_radial(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
        }
        Ok(self.value(r))
    }

    /// V(r) without the sign check on r.
    pub(crate) fn value(&self, r: f64) -> f64 {
        match self {
            RadialPotential::HardCore { r0 } => {
                if r < *r0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            RadialPotential::SoftSphere { v0, r0 } => {
                if r <= *r0 {
                    *v0
                } else {
                    0.0
                }
            }
            RadialPotential::Gaussian { v0, w } => v0 * (-(r / w).powi(2)).exp(),
            RadialPotential::Tabulated(t) => t.eval(r),
        }
    }

    pub fn value_at_origin(&self) -> f64 {
        self.value(0.0)
    }

    pub fn decay(&self) -> DecayClass {
        match self {
            RadialPotential::HardCore { r0 } | RadialPotential::SoftSphere { r0, .. } => DecayClass::Compact(*r0),
            RadialPotential::Gaussian { .. } => DecayClass::Gaussian,
            RadialPotential::Tabulated(t) => DecayClass::Compact(*t.knots().last().expect("non-empty")),
        }
    }

    /// Radius of the support, `None` when unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        match self.decay() {
            DecayClass::Compact(r) => Some(r),
            DecayClass::Gaussian => None,
        }
    }

    /// A length scale of the potential (support radius or width).
    pub fn range(&self) -> f64 {
        match self {
            RadialPotential::Gaussian { w, .. } => *w,
            _ => self.support_radius().expect("compact"),
        }
    }

    /// Radius beyond which the potential is treated as zero, with the relative
    /// weight of the discarded tail of `∫ V r^{n-1} dr`.
    pub fn cutoff(&self, n: u32) -> (f64, f64) {
        match self {
            RadialPotential::Gaussian { w, .. } => {
                let mut x = 1.0f64;
                loop {
                    let tail = gaussian_tail(n, x);
                    if tail <= GAUSSIAN_TAIL || x > 60.0 {
                        return (x * w, tail);
                    }
                    x += 0.25;
                }
            }
            _ => (self.support_radius().expect("compact"), 0.0),
        }
    }

    /// Panel edges for radial quadrature of V times a smooth function, aligned
    /// with every point where V or its low derivatives jump.
    pub fn panel_edges(&self, n: u32, max_width: f64) -> Vec<f64> {
        let (end, _) = self.cutoff(n);
        match self {
            RadialPotential::Tabulated(t) => {
                let mut knots: Vec<f64> = vec![0.0];
                knots.extend(t.knots().iter().copied().filter(|&r| r > 0.0));
                let mut edges = vec![0.0];
                for w in knots.windows(2) {
                    edges.extend(uniform_edges(w[0], w[1], max_width).into_iter().skip(1));
                }
                edges
            }
            _ => uniform_edges(0.0, end, max_width),
        }
    }

    /// `|S^{n-1}| ∫ V(r) r^{n-1+extra} dr`; `extra = 0` gives `∫V`, `extra = 2-n` gives γ.
    pub fn moment(&self, n: u32, extra: i32) -> Result<f64> {
        if self.is_hard_core() {
            return Err(Error::NonIntegrable("hard-core potential".into()));
        }
        if n as i32 - 1 + extra <= -1 && self.value_at_origin() > 0.0 {
            return Err(Error::NonIntegrable(format!("r^{} weight diverges at the origin", n as i32 - 1 + extra)));
        }
        let rule = GaussRule::cached(20);
        let edges = self.panel_edges(n, self.range() / 16.0);
        let pw = n as i32 - 1 + extra;
        let sum: f64 = edges
            .windows(2)
            .map(|w| rule.integrate(w[0], w[1], |r| self.value(r) * r.powi(pw)))
            .sum();
        Ok(sphere_area(n) * sum)
    }

    /// `V̂_p` by the one-dimensional radial reduction.
    pub fn fourier_radial(&self, p: f64, n: u32) -> Result<FourierValue> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension must be at least 3, got {n}")));
        }
        if self.is_hard_core() {
            return Err(Error::NonIntegrable("hard-core potential has no Fourier transform".into()));
        }
        let p = p.abs();
        let (_, tail_rel) = self.cutoff(n);
        let edges = self.panel_edges(n, self.range() / 8.0);
        let (value, quad_err) = radial_transform(n, p, &edges, |r| self.value(r));
        let total = if p == 0.0 { value } else { radial_transform(n, 0.0, &edges, |r| self.value(r)).0 };
        let error_estimate = quad_err + tail_rel * total.abs();
        if error_estimate > FOURIER_TOL * total.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::ToleranceNotMet {
                achieved: error_estimate,
                requested: FOURIER_TOL * total.abs(),
                context: format!("Fourier transform at p = {p:.6e}"),
            });
        }
        Ok(FourierValue { p, value, error_estimate })
    }

    /// `λ^{-2} V(r/λ)`, whose scattering length is `λ a`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        let l2 = lambda * lambda;
        Ok(match self {
            RadialPotential::HardCore { r0 } => RadialPotential::HardCore { r0: r0 * lambda },
            RadialPotential::SoftSphere { v0, r0 } => RadialPotential::SoftSphere { v0: v0 / l2, r0: r0 * lambda },
            RadialPotential::Gaussian { v0, w } => RadialPotential::Gaussian { v0: v0 / l2, w: w * lambda },
            RadialPotential::Tabulated(t) => RadialPotential::Tabulated(t.scaled(lambda)),
        })
    }
}

/// `∫_x^∞ e^{-t²} t^{n-1} dt / ∫_0^∞ e^{-t²} t^{n-1} dt`, bounded by integrating
/// the tail with a crude majorant.
fn gaussian_tail(n: u32, x: f64) -> f64 {
    let nf = f64::from(n);
    let full = 0.5 * crate::numerics::geometry::gamma_half(n);
    // for t ≥ x ≥ √((n-1)/2)·… the integrand is bounded by e^{-x²}x^{n-1}e^{-(2x - (n-1)/x)(t-x)}
    let rate = 2.0 * x - (nf - 1.0) / x;
    if rate <= 0.0 {
        return 1.0;
    }
    (-x * x).exp() * x.powf(nf - 1.0) / rate / full
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be nonnegative and finite, got {v}")))
    }
}

impl fmt::Display for RadialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialPotential::HardCore { r0 } => write!(f, "hard_core:R0={r0}"),
            RadialPotential::SoftSphere { v0, r0 } => write!(f, "soft_sphere:V0={v0},R0={r0}"),
            RadialPotential::Gaussian { v0, w } => write!(f, "gaussian:V0={v0},w={w}"),
            RadialPotential::Tabulated(t) => match &t.source {
                Some(p) => write!(f, "tabulated:path={}", p.display()),
                None => write!(f, "tabulated:<in-memory>"),
            },
        }
    }
}

impl FromStr for RadialPotential {
    type Err = Error;

    /// Parses `kind:key=value,...`, e.g. `soft_sphere:V0=2,R0=1`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params: Vec<(String, String)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))?;
            params.push((k.trim().to_string(), v.trim().to_string()));
        }
        let take = |key: &str| -> Result<String> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Parse(format!("potential '{kind}' is missing parameter {key}")))
        };
        let num = |key: &str| -> Result<f64> {
            let v = take(key)?;
            v.parse::<f64>().map_err(|e| Error::Parse(format!("{key}={v}: {e}")))
        };
        let allowed: &[&str] = match kind.trim() {
            "hard_core" => &["R0"],
            "soft_sphere" => &["V0", "R0"],
            "gaussian" => &["V0", "w"],
            "tabulated" => &["path"],
            other => return Err(Error::Parse(format!("unknown potential kind '{other}'"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown parameter '{k}' for potential '{kind}'")));
        }
        match kind.trim() {
            "hard_core" => RadialPotential::hard_core(num("R0")?),
            "soft_sphere" => RadialPotential::soft_sphere(num("V0")?, num("R0")?),
            "gaussian" => RadialPotential::gaussian(num("V0")?, num("w")?),
            _ => Ok(RadialPotential::Tabulated(Tabulated::from_file(Path::new(&take("path")?))?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn evaluation() {
        let s = RadialPotential::soft_sphere(2.0, 1.0).unwrap();
        assert_eq!(s.eval_radial(0.5).unwrap(), 2.0);
        assert_eq!(s.eval_radial(1.5).unwrap(), 0.0);
        assert!(s.eval_radial(-0.1).is_err());
        let g = RadialPotential::gaussian(1.0, 1.0).unwrap();
        assert_eq!(g.eval_radial(0.0).unwrap(), 1.0);
        let h = RadialPotential::hard_core(1.0).unwrap();
        assert!(h.eval_radial(0.5).unwrap().is_infinite());
        assert_eq!(h.eval_radial(1.0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_transform_closed_form() {
        let g = RadialPotential::gaussian(1.0, 1.0).unwrap();
        let v0 = g.fourier_radial(0.0, 3).unwrap();
        assert!((v0.value - PI.powf(1.5)).abs() < 1e-12);
        for n in [3u32, 4, 5, 7] {
            for p in [0.5f64, 2.0, 6.0] {
                let want = PI.powf(f64::from(n) / 2.0) * (-p * p / 4.0).exp();
                let got = g.fourier_radial(p, n).unwrap().value;
                assert!((got - want).abs() < 1e-12 * want.max(1.0), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn soft_sphere_transform_closed_form() {
        let s = RadialPotential::soft_sphere(1.0, 1.0).unwrap();
        let got = s.fourier_radial(2.0, 3).unwrap().value;
        let want = 4.0 * PI * (2f64.sin() - 2.0 * 2f64.cos()) / 8.0;
        assert!((got - want).abs() < 1e-13);
        assert!((want - 2.735_685).abs() < 1e-6);
    }

    #[test]
    fn hard_core_is_not_integrable() {
        let h = RadialPotential::hard_core(1.0).unwrap();
        assert!(matches!(h.fourier_radial(1.0, 3), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["hard_core:R0=1.5", "soft_sphere:V0=2,R0=1", "gaussian:V0=1,w=0.5"] {
            let p: RadialPotential = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("soft_sphere:V0=2".parse::<RadialPotential>().is_err());
        assert!("square:V0=2".parse::<RadialPotential>().is_err());
        assert!("soft_sphere:V0=2,R0=1,x=3".parse::<RadialPotential>().is_err());
        assert!("soft_sphere:V0=-2,R0=1".parse::<RadialPotential>().is_err());
    }

    #[test]
    fn tabulated_file_and_clamp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        std::fs::write(&path, "# r V\n0 3\n0.5 3\n1.0 0\n1.5 0\n").unwrap();
        let spec = format!("tabulated:path={}", path.display());
        let p: RadialPotential = spec.parse().unwrap();
        assert_eq!(p.support_radius(), Some(1.5));
        for i in 0..=200 {
            let r = i as f64 * 0.01;
            assert!(p.value(r) >= 0.0);
        }
        assert_eq!(p.value(2.0), 0.0);
    }
}
