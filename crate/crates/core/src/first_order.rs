//! First-order energy bounds: the Dyson trial-function upper bound and the
//! Temple/cell-decomposition lower bound.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::geometry::{ball_volume, s_n, sphere_area};
use crate::numerics::interp::Hermite;
use crate::numerics::quadrature::{uniform_edges, GaussRule};
use crate::potentials::RadialPotential;
use crate::scattering::ScatteringSolution;

/// Every factor of the lower-bound product must exceed this margin.
pub const REGIME_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DysonMode {
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonIntegrals {
    pub b: f64,
    pub i: f64,
    pub k: f64,
    pub j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonUpper {
    pub value: f64,
    pub b: f64,
    /// Present in quadrature mode.
    pub integrals: Option<DysonIntegrals>,
    /// Closed form only: Ỹ^β ≥ 1/2, the bound is close to blowing up.
    pub near_divergence: bool,
}

/// The cutoff radius b = (|S^{n−1}| ρ)^{−1/n}.
pub fn dyson_cutoff(n: u32, rho: f64) -> f64 {
    (sphere_area(n) * rho).powf(-1.0 / f64::from(n))
}

/// I, K and J for the truncated scattering solution f = u/u(b).
pub fn dyson_integrals(sol: &ScatteringSolution, b: f64) -> Result<DysonIntegrals> {
    let n = sol.n();
    let ub = sol.u(b);
    if !(ub > 0.0) {
        return Err(Error::DensityTooHigh(format!("u(b) = {ub:.3e} vanishes at the cutoff b = {b:.3e}")));
    }
    let pot = sol.potential();
    let r_in = sol.r_match().min(b);
    let mut edges: Vec<f64> = sol
        .quadrature_edges(pot.range() / 32.0)
        .into_iter()
        .filter(|&r| r < r_in)
        .collect();
    edges.push(r_in);
    let mut r = r_in;
    while r < b {
        r = (r * 1.25).min(b);
        if b - r < 1e-9 * b {
            r = b;
        }
        edges.push(r);
    }
    let rule = GaussRule::cached(20);
    let nm1 = n as i32 - 1;
    let (mut i, mut k, mut j) = (0.0, 0.0, 0.0);
    for w in edges.windows(2) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            let (u, du) = sol.u_with_derivative(x);
            let (f, df) = (u / ub, du / ub);
            let vol = wt * x.powi(nm1);
            let pot_term = if f == 0.0 { 0.0 } else { 0.5 * pot.value(x) * f * f };
            i += vol * (1.0 - f * f);
            k += vol * f * df;
            j += vol * (df * df + pot_term);
        }
    }
    let area = sphere_area(n);
    Ok(DysonIntegrals { b, i: area * i, k: area * k, j: area * j })
}

/// The constant C of the closed-form upper bound.
pub fn dyson_closed_form_constant(n: u32) -> f64 {
    let nf = f64::from(n);
    let beta = (nf - 2.0) / nf;
    2.0 / 3.0 * (nf - 1.0).powi(2) * sphere_area(n).powf(beta) / (nf - 2.0)
}

/// Upper bound on the energy per particle from the Dyson trial function.
pub fn dyson_upper(sol: &ScatteringSolution, rho: f64, mode: DysonMode) -> Result<DysonUpper> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("density must be positive, got {rho}")));
    }
    let n = sol.n();
    let b = dyson_cutoff(n, rho);
    if sol.a_pow() == 0.0 {
        let integrals = (mode == DysonMode::Quadrature).then_some(DysonIntegrals { b, i: 0.0, k: 0.0, j: 0.0 });
        return Ok(DysonUpper { value: 0.0, b, integrals, near_divergence: false });
    }
    match mode {
        DysonMode::Quadrature => {
            let ints = dyson_integrals(sol, b)?;
            let irho = ints.i * rho;
            if irho >= 1.0 {
                return Err(Error::DensityTooHigh(format!("Iρ = {irho:.4} ≥ 1")));
            }
            let kr = ints.k * rho;
            let value = (ints.j * rho + 2.0 / 3.0 * kr * kr) / (1.0 - irho).powi(2);
            Ok(DysonUpper { value, b, integrals: Some(ints), near_divergence: false })
        }
        DysonMode::ClosedForm => {
            let nf = f64::from(n);
            let beta = (nf - 2.0) / nf;
            let y = sol.a_pow() * sol.a().powi(2) * rho;
            let yt_beta = (sphere_area(n) * y).powf(beta);
            if yt_beta >= 1.0 {
                return Err(Error::OutOfRegime(format!("Ỹ^β = {yt_beta:.4} ≥ 1")));
            }
            let c = dyson_closed_form_constant(n);
            let leading = s_n(n) * sol.a_pow() * rho;
            let q = 1.0 - yt_beta;
            let value = leading * (q.powi(-4) + c * y.powf(beta) * q.powi(-2));
            Ok(DysonUpper { value, b, integrals: None, near_divergence: yt_beta >= 0.5 })
        }
    }
}

/// Inputs of the box lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempleParams {
    /// Particle number; real-valued so that the bound can be evaluated at 4ρlⁿ.
    pub n_particles: f64,
    pub l: f64,
    pub eps: f64,
    pub r: f64,
    pub r0: f64,
    pub a_pow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempleValues {
    pub g: f64,
    pub k: f64,
    /// The factors of K after the prefactor s_n a^{n−2}/lⁿ, in order.
    pub factors: [f64; 4],
}

/// G(N, l) and K(N, l) of the Temple estimate.
pub fn temple_block(tp: &TempleParams, n: u32) -> Result<TempleValues> {
    let nf = f64::from(n);
    if !(tp.eps > 0.0 && tp.eps < 1.0) {
        return Err(Error::Domain(format!("eps = {} outside (0, 1)", tp.eps)));
    }
    if !(tp.r > tp.r0) {
        return Err(Error::Geometry(format!("R = {} must exceed R0 = {}", tp.r, tp.r0)));
    }
    if !(2.0 * tp.r < tp.l) {
        return Err(Error::Geometry(format!("R = {} must be below l/2 = {}", tp.r, tp.l / 2.0)));
    }
    let sna = s_n(n) * tp.a_pow;
    let ln = tp.l.powf(nf);
    let np = tp.n_particles;
    let g = tp.eps * PI * PI / (tp.l * tp.l) - sna * np * np / ln;
    if !(g > 0.0) {
        return Err(Error::TempleGap(g));
    }
    let rn = tp.r.powf(nf);
    let factors = [
        1.0 - tp.eps,
        (1.0 - 2.0 * tp.r / tp.l).powf(nf),
        (1.0 - ball_volume(n) * rn / ln).powf(np - 2.0),
        1.0 - nf * (nf - 2.0) * tp.a_pow * np / ((rn - tp.r0.powf(nf)) * g),
    ];
    let k = sna / ln * factors.iter().product::<f64>();
    Ok(TempleValues { g, k, factors })
}

/// The exponents α, β, γ of the lower-bound ansatz, as exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentAnsatz {
    pub alpha: Ratio<i64>,
    pub beta: Ratio<i64>,
    pub gamma_exp: Ratio<i64>,
}

impl ExponentAnsatz {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension must be at least 3, got {n}")));
        }
        let n = i64::from(n);
        let alpha = Ratio::new(n - 2, n * (n + 2) + 2);
        let beta = (alpha + 1) / n;
        let gamma_exp = alpha * n;
        Ok(ExponentAnsatz { alpha, beta, gamma_exp })
    }

    pub fn alpha_f64(&self) -> f64 {
        ratio_f64(self.alpha)
    }

    pub fn beta_f64(&self) -> f64 {
        ratio_f64(self.beta)
    }

    pub fn gamma_f64(&self) -> f64 {
        ratio_f64(self.gamma_exp)
    }
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// α(n) = (n − 2)/(n(n + 2) + 2).
pub fn alpha(n: u32) -> Result<Ratio<i64>> {
    Ok(ExponentAnsatz::new(n)?.alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub leading: f64,
    pub y: f64,
    /// C in value = leading·(1 − C Y^α).
    pub certified_c: f64,
    /// ε, l, R, k = ρlⁿ of the ansatz.
    pub eps: f64,
    pub l: f64,
    pub r: f64,
    pub k: f64,
    /// Named factors of value/leading.
    pub factors: Vec<(&'static str, f64)>,
    /// The linearized product as written in the proof, when all its factors are positive.
    pub proof_form: Option<f64>,
}

/// Lower bound on the energy per particle at density ρ from the exponent ansatz.
pub fn ly_lower(a_pow: f64, r0: f64, rho: f64, n: u32) -> Result<LowerBound> {
    let ans = ExponentAnsatz::new(n)?;
    if !(a_pow > 0.0 && r0 > 0.0 && rho > 0.0) {
        return Err(Error::Domain("a^{n−2}, R0 and ρ must be positive".into()));
    }
    let nf = f64::from(n);
    let a = a_pow.powf(1.0 / (nf - 2.0));
    let y = a.powf(nf) * rho;
    let (al, be, ga) = (ans.alpha_f64(), ans.beta_f64(), ans.gamma_f64());
    let threshold = (a / r0).powf((nf - 2.0) / (5.0 * al));
    if y > threshold {
        return Err(Error::OutOfRegime(format!(
            "Y = {y:.3e} exceeds (a/R0)^((n−2)/(5α)) = {threshold:.3e}"
        )));
    }
    let eps = y.powf(al);
    let l = a * y.powf(-be);
    let ln = l.powf(nf);
    let r = (r0.powf(nf) + y.powf(ga) * ln).powf(1.0 / nf);
    let k = rho * ln;
    if !(k > 1.0) {
        return Err(Error::OutOfRegime(format!("ρlⁿ = {k:.4} ≤ 1; the cell step needs at least one particle per cell")));
    }
    let tp = TempleParams { n_particles: 4.0 * k, l, eps, r, r0, a_pow };
    let tv = temple_block(&tp, n).map_err(|e| Error::OutOfRegime(format!("Temple block: {e}")))?;
    let leading = s_n(n) * a_pow * rho;
    let factors = vec![
        ("1-eps", tv.factors[0]),
        ("(1-2R/l)^n", tv.factors[1]),
        ("(1-v_n R^n/l^n)^(N-2)", tv.factors[2]),
        ("Temple denominator", tv.factors[3]),
        ("1-1/(rho l^n)", 1.0 - 1.0 / k),
    ];
    if let Some((name, v)) = factors.iter().find(|(_, v)| !(*v > REGIME_MARGIN)) {
        return Err(Error::OutOfRegime(format!("factor {name} = {v:.4} not above {REGIME_MARGIN}")));
    }
    // (k − 1) K(4k, l) = leading · Π factors
    let value = leading * factors.iter().map(|f| f.1).product::<f64>();
    let certified_c = (1.0 - value / leading) / y.powf(al);
    Ok(LowerBound {
        value,
        leading,
        y,
        certified_c,
        eps,
        l,
        r,
        k,
        factors,
        proof_form: proof_form(n, y, &ans),
    })
}

/// The Bernoulli-linearized product with the proof's constants C₁…C₄.
fn proof_form(n: u32, y: f64, ans: &ExponentAnsatz) -> Option<f64> {
    let nf = f64::from(n);
    let (al, be, ga) = (ans.alpha_f64(), ans.beta_f64(), ans.gamma_f64());
    let c1 = 2.0 * nf * 2f64.powf(1.0 / nf);
    let c2 = 8.0 * ball_volume(n);
    let c3 = 4.0 * nf * (nf - 2.0) / (PI * PI);
    let c4 = 16.0 * s_n(n) / (PI * PI);
    let denom = 1.0 - c4 * y.powf(2.0 - al - (nf + 2.0) * be);
    let fs = [
        1.0 - y.powf(al),
        1.0 - c1 * y.powf(ga / nf),
        1.0 - y.powf(nf * be - 1.0),
        1.0 - c2 * y.powf(1.0 + ga - nf * be),
        if denom > 0.0 { 1.0 - c3 * y.powf(1.0 - al - 2.0 * be - ga) / denom } else { -1.0 },
    ];
    fs.iter().all(|&f| f > 0.0).then(|| fs.iter().product())
}

/// Minimizer of a linear objective over distributions with prescribed mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub value: f64,
    /// At most two (index, weight) pairs.
    pub weights: Vec<(usize, f64)>,
}

/// Indices of the lower convex hull of (xs[i], ys[i]); xs strictly increasing.
pub fn lower_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[a] - xs[o]) * (ys[i] - ys[o]) - (ys[a] - ys[o]) * (xs[i] - xs[o]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Lower convex envelope of the points at abscissa `x`.
pub fn envelope_at(xs: &[f64], ys: &[f64], x: f64) -> Result<Envelope> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Domain("envelope needs matching nonempty abscissae and values".into()));
    }
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if !(x >= lo && x <= hi) {
        return Err(Error::Infeasible(format!("mean {x} outside [{lo}, {hi}]")));
    }
    let hull = lower_hull(xs, ys);
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        if x == xs[i] {
            return Ok(Envelope { value: ys[i], weights: vec![(i, 1.0)] });
        }
        if x < xs[j] {
            let t = (x - xs[i]) / (xs[j] - xs[i]);
            return Ok(Envelope {
                value: (1.0 - t) * ys[i] + t * ys[j],
                weights: vec![(i, 1.0 - t), (j, t)],
            });
        }
    }
    let last = *hull.last().expect("non-empty");
    Ok(Envelope { value: ys[last], weights: vec![(last, 1.0)] })
}

/// min Σ c_m E(m) over c ≥ 0 with Σ c_m = 1 and Σ m c_m = k.
pub fn cell_envelope(e: &[f64], k: f64) -> Result<Envelope> {
    if e.first() != Some(&0.0) {
        return Err(Error::Hypothesis("cell energies must start with E(0) = 0".into()));
    }
    let xs: Vec<f64> = (0..e.len()).map(|m| m as f64).collect();
    envelope_at(&xs, e, k)
}

/// The weight U of the Dyson replacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DysonWeight {
    Zero,
    /// `height` on (lo, hi), zero elsewhere.
    Box { lo: f64, hi: f64, height: f64 },
}

impl DysonWeight {
    /// The normalized box n/(Rⁿ − R₀ⁿ) on (R₀, R).
    pub fn temple_box(n: u32, r0: f64, r: f64) -> Self {
        let nf = f64::from(n);
        DysonWeight::Box { lo: r0, hi: r, height: nf / (r.powf(nf) - r0.powf(nf)) }
    }

    fn value(&self, r: f64) -> f64 {
        match *self {
            DysonWeight::Zero => 0.0,
            DysonWeight::Box { lo, hi, height } => {
                if r > lo && r < hi {
                    height
                } else {
                    0.0
                }
            }
        }
    }
}

/// LHS − RHS of the radial Dyson inequality
/// ∫(f'² + ½Vf²) r^{n−1} ≥ (n−2)a^{n−2} ∫ U f² r^{n−1} on [0, r_end].
pub fn dyson_lemma_gap(
    f: &Hermite,
    u_weight: &DysonWeight,
    v: &RadialPotential,
    sol: &ScatteringSolution,
    n: u32,
    r_end: f64,
) -> Result<f64> {
    let r0 = v
        .support_radius()
        .ok_or_else(|| Error::Hypothesis("Dyson's lemma needs a compactly supported V".into()))?;
    let nf = f64::from(n);
    if let DysonWeight::Box { lo, hi, height } = *u_weight {
        if !(height >= 0.0 && hi > lo) {
            return Err(Error::Hypothesis("weight box must have positive width and nonnegative height".into()));
        }
        if lo < r0 * (1.0 - 1e-12) {
            return Err(Error::Hypothesis(format!("U must vanish on [0, R0 = {r0}]")));
        }
        let mass = height * (hi.powf(nf) - lo.powf(nf)) / nf;
        if mass > 1.0 + 1e-12 {
            return Err(Error::Hypothesis(format!("∫U r^(n−1) dr = {mass:.6} exceeds 1")));
        }
    }
    let mut pts: Vec<f64> = f.xs().to_vec();
    pts.extend(v.panel_edges(n, f64::INFINITY));
    if let DysonWeight::Box { lo, hi, .. } = *u_weight {
        pts.extend([lo, hi]);
    }
    pts.push(0.0);
    pts.push(r_end);
    pts.retain(|&r| (0.0..=r_end).contains(&r));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let rule = GaussRule::cached(20);
    let nm1 = n as i32 - 1;
    let width = v.range() / 32.0;
    let (_, lhs_hi) = f.domain();
    let mut gap = 0.0;
    for w in pts.windows(2) {
        for e in uniform_edges(w[0], w[1], width).windows(2) {
            for (r, wt) in rule.mapped(e[0], e[1]) {
                let (fv, df) = if r <= lhs_hi { f.eval_with_derivative(r) } else { (0.0, 0.0) };
                let vv = v.value(r);
                let pot = if fv == 0.0 {
                    0.0
                } else if vv.is_infinite() {
                    return Ok(f64::INFINITY);
                } else {
                    0.5 * vv * fv * fv
                };
                let rhs = (nf - 2.0) * sol.a_pow() * u_weight.value(r) * fv * fv;
                gap += wt * r.powi(nm1) * (df * df + pot - rhs);
            }
        }
    }
    Ok(gap)
}

/// One row of a density scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u32,
    pub rho: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub leading: f64,
    pub lower: Option<f64>,
    pub upper_first: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    #[serde(rename = "Q_tilde")]
    pub q_tilde: Option<f64>,
    #[serde(rename = "Omega")]
    pub omega: Option<f64>,
    pub upper_second: Option<f64>,
    pub reference: Option<f64>,
    pub flags: Vec<String>,
}
