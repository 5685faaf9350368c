//! Second-order trial-state energy E(ρ) = s_n a^{n−2}ρ + Q + Q̃ + Ω and the
//! small-density expansion coefficients of Q.
//!
//! Momentum integrals are radial: for a radial F, `∫ F(|p|) dp = |S^{n−1}| ∫ F(p) p^{n−1} dp`.
//! The angular average of `V̂_{p−q}` over the relative direction of p and q is
//! `|S^{n−1}| ∫ V(r) Λ_n(pr) Λ_n(qr) r^{n−1} dr`, which turns Ω into products of
//! one-dimensional transforms.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numerics::geometry::{s_n, sphere_area};
use crate::numerics::kernel::{radial_kernel, radial_kernel_minus_one};
use crate::numerics::quadrature::{composite_nodes, graded_edges, uniform_edges, GaussRule};
use crate::potentials::RadialPotential;
use crate::scattering::ScatteringSolution;

/// Φ(t) = √(1+4t) + 2t² − 2t − 1, evaluated as 8t³(√(1+4t)+3)/(√(1+4t)+1)³.
pub fn phi_fn(t: f64) -> Result<f64> {
    if !(t >= -0.25) {
        return Err(Error::Domain(format!("Φ(t) needs t ≥ −1/4, got {t}")));
    }
    Ok(phi_unchecked(t))
}

fn phi_unchecked(t: f64) -> f64 {
    let sq = (1.0 + 4.0 * t).sqrt();
    8.0 * t * t * t * (sq + 3.0) / (sq + 1.0).powi(3)
}

/// Optimal pair parameters at one momentum, as functions of t = ρŵ_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiparticleParams {
    pub t: f64,
    pub e: f64,
    pub h: f64,
    pub s: f64,
    pub m: f64,
}

pub fn quasiparticle(rho: f64, w_hat: f64) -> Result<QuasiparticleParams> {
    qp_from_t(rho * w_hat)
}

fn qp_from_t(t: f64) -> Result<QuasiparticleParams> {
    let disc = 1.0 + 4.0 * t;
    if !(disc > 0.0) {
        return Err(Error::OutOfRegime(format!(
            "1 + 4ρŵ = {disc:.3e} ≤ 0 (e_p would reach 1/2); use a smaller density"
        )));
    }
    let sq = disc.sqrt();
    let e = -2.0 * t / (1.0 + sq);
    Ok(QuasiparticleParams {
        t,
        e,
        h: e * e / sq,
        s: -t / sq,
        m: -4.0 * t * t / ((sq + 1.0) * (sq + 1.0)),
    })
}

/// Taylor coefficients b_0..=b_max of Φ at 0, exactly.
pub fn taylor_coefficients(max: u32) -> Vec<Ratio<i128>> {
    // √(1+4t) = Σ C(1/2, k) 4^k t^k
    let mut out = Vec::with_capacity(max as usize + 1);
    let mut coef = Ratio::from_integer(1i128);
    for k in 0..=i128::from(max) {
        let b = match k {
            0 => coef - 1,
            1 => coef - 2,
            2 => coef + 2,
            _ => coef,
        };
        out.push(b);
        coef = coef * (Ratio::new(1, 2) - k) / (k + 1) * 4;
    }
    out
}

/// The exact value of c_{n/2+1} for even n, as `(q, k)` meaning `q·π^k`.
pub fn c_log_exact(n: u32) -> Option<(Ratio<i128>, u32)> {
    if n < 4 || n % 2 == 1 {
        return None;
    }
    // |S^{n−1}| = 2π^{n/2}/(n/2 − 1)! for even n
    let k = i128::from(n / 2);
    let b = taylor_coefficients(n / 2 + 1)[(n / 2 + 1) as usize];
    let fact: i128 = (1..k).product();
    let num = b * Ratio::from_integer(2i128.pow((k + 1) as u32) * (i128::from(n) - 2).pow(k as u32));
    let den = Ratio::from_integer(fact.pow((k + 1) as u32) * 4 * 2i128.pow(n));
    Some((num / den, (k * k - k) as u32))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    /// (m, b_m) for 3 ≤ m ≤ ⌈n/2⌉ + 1.
    pub b_m: Vec<(u32, Ratio<i128>)>,
    /// (m, c_m) for integer 3 ≤ m ≤ ⌈n/2⌉.
    pub c_m: Vec<(u32, f64)>,
    /// Coefficient of s_n a^{n−2}ρ Y^{n/2−1}|ln Y| (even n).
    pub c_log: Option<f64>,
}

/// Radial quadrature nodes in r with g, φ and V sampled on them.
#[derive(Debug, Clone)]
struct RadialNodes {
    r: Vec<f64>,
    /// |S^{n−1}| × weight × r^{n−1}.
    w: Vec<f64>,
    g: Vec<f64>,
    phi: Vec<f64>,
    v: Vec<f64>,
}

/// Evaluator of the second-order quantities for one scattering solution.
#[derive(Debug, Clone)]
pub struct SecondOrder<'a> {
    sol: &'a ScatteringSolution,
    nodes: Option<RadialNodes>,
    range: f64,
}

/// All momentum-space samples at one density.
#[derive(Debug, Clone)]
pub struct DensitySamples {
    pub rho: f64,
    pub p: Vec<f64>,
    /// Radial weights including p^{n−1} and |S^{n−1}|.
    pub w: Vec<f64>,
    pub g_hat: Vec<f64>,
    pub phi_hat: Option<Vec<f64>>,
    pub v_hat: Option<Vec<f64>>,
    pub qp: Vec<QuasiparticleParams>,
    /// Λ_n(p_i r_j), row-major in i.
    lam: Vec<f64>,
}

/// Highest momentum sampled, in units of 1/range.
const P_MAX: f64 = 160.0;
const P_ORDER: usize = 16;

impl<'a> SecondOrder<'a> {
    pub fn new(sol: &'a ScatteringSolution) -> Self {
        let pot = sol.potential();
        let range = pot.range();
        let nodes = if pot.is_hard_core() {
            None
        } else {
            let n = sol.n();
            let rule = GaussRule::cached(20);
            let edges = sol.quadrature_edges(range / 16.0);
            let pts = composite_nodes(&edges, &rule);
            let area = sphere_area(n);
            let nm1 = n as i32 - 1;
            let r: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let w = pts.iter().map(|&(x, wt)| area * wt * x.powi(nm1)).collect();
            let g = r.iter().map(|&x| sol.g(x)).collect();
            let phi = r.iter().map(|&x| sol.phi(x)).collect();
            let v = r.iter().map(|&x| pot.value(x)).collect();
            Some(RadialNodes { r, w, g, phi, v })
        };
        SecondOrder { sol, nodes, range }
    }

    pub fn solution(&self) -> &ScatteringSolution {
        self.sol
    }

    fn n(&self) -> u32 {
        self.sol.n()
    }

    /// Momentum nodes: [0, ε/64] then doubling panels capped at width 2/range.
    fn momentum_nodes(&self, rho: f64) -> Vec<(f64, f64)> {
        let eps = (self.sol.g_hat(0.0) * rho).sqrt();
        let p_max = P_MAX / self.range;
        let cap = 2.0 / self.range;
        let edges = if eps / 64.0 < p_max / 2.0 {
            graded_edges(eps / 64.0, p_max, 2.0, cap)
        } else {
            uniform_edges(0.0, p_max.max(8.0 * eps), cap)
        };
        composite_nodes(&edges, &GaussRule::cached(P_ORDER))
    }

    fn transform_row(&self, lam_row: &[f64], values: impl Fn(&RadialNodes) -> &[f64]) -> f64 {
        let nodes = self.nodes.as_ref().expect("finite potential");
        let vals = values(nodes);
        lam_row.iter().zip(&nodes.w).zip(vals).map(|((l, w), v)| l * w * v).sum()
    }

    /// Samples ĝ, φ̂, V̂ and the pair parameters on the momentum grid for ρ.
    pub fn samples(&self, rho: f64) -> Result<DensitySamples> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("density must be positive, got {rho}")));
        }
        let n = self.n();
        let nm1 = n as i32 - 1;
        let area = sphere_area(n);
        let pts = self.momentum_nodes(rho);
        let p: Vec<f64> = pts.iter().map(|q| q.0).collect();
        let w: Vec<f64> = pts.iter().map(|&(x, wt)| area * wt * x.powi(nm1)).collect();
        let (lam, g_hat, phi_hat, v_hat) = match &self.nodes {
            None => {
                let g = p.iter().map(|&x| self.sol.g_hat(x)).collect();
                (Vec::new(), g, None, None)
            }
            Some(nodes) => {
                let nr = nodes.r.len();
                let mut lam = Vec::with_capacity(p.len() * nr);
                for &x in &p {
                    lam.extend(nodes.r.iter().map(|&r| radial_kernel(n, x * r)));
                }
                let mut g = Vec::with_capacity(p.len());
                let mut ph = Vec::with_capacity(p.len());
                let mut vv = Vec::with_capacity(p.len());
                for i in 0..p.len() {
                    let row = &lam[i * nr..(i + 1) * nr];
                    g.push(self.transform_row(row, |nd| &nd.g));
                    ph.push(self.transform_row(row, |nd| &nd.phi));
                    vv.push(self.transform_row(row, |nd| &nd.v));
                }
                (lam, g, Some(ph), Some(vv))
            }
        };
        let qp = p
            .iter()
            .zip(&g_hat)
            .map(|(&x, &g)| qp_from_t(rho * g / (2.0 * x * x)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DensitySamples { rho, p, w, g_hat, phi_hat, v_hat, qp, lam })
    }

    /// Q = (2(2π)^n ρ)⁻¹ ∫ p² Φ(ρŵ_p) dp.
    pub fn q(&self, s: &DensitySamples) -> f64 {
        let n = self.n();
        let sum: f64 = s
            .p
            .iter()
            .zip(&s.w)
            .zip(&s.qp)
            .map(|((&x, &w), qp)| w * x * x * phi_unchecked(qp.t))
            .sum();
        sum / (2.0 * (2.0 * PI).powi(n as i32) * s.rho)
    }

    /// Q̃ = 2(2π)^{−n} ∫ φ̂_p h_p dp.
    pub fn q_tilde(&self, s: &DensitySamples) -> Result<f64> {
        let phi = s.phi_hat.as_ref().ok_or_else(non_integrable)?;
        let sum: f64 = s.w.iter().zip(phi).zip(&s.qp).map(|((w, f), qp)| w * f * qp.h).sum();
        Ok(2.0 * sum / (2.0 * PI).powi(self.n() as i32))
    }

    /// Ω from the three factorized double integrals.
    pub fn omega(&self, s: &DensitySamples) -> Result<f64> {
        let nodes = self.nodes.as_ref().ok_or_else(non_integrable)?;
        let v_hat = s.v_hat.as_ref().expect("finite potential");
        let n = self.n();
        let nr = nodes.r.len();
        let np = s.p.len();
        // E(r) = ∫ e_p² Λ(pr) dp, S(r) = ∫ s_p Λ(pr) dp, H(r) = ∫ h_q (Λ(qr) − 1) dq
        let mut big_e = vec![0.0; nr];
        let mut big_s = vec![0.0; nr];
        let mut big_h = vec![0.0; nr];
        for i in 0..np {
            let qp = &s.qp[i];
            let (we, ws, wh) = (s.w[i] * qp.e * qp.e, s.w[i] * qp.s, s.w[i] * qp.h);
            let row = &s.lam[i * nr..(i + 1) * nr];
            for j in 0..nr {
                big_e[j] += we * row[j];
                big_s[j] += ws * row[j];
                big_h[j] += wh * radial_kernel_minus_one(n, s.p[i] * nodes.r[j]);
            }
        }
        let mut term_a = 0.0;
        let mut term_d = 0.0;
        for j in 0..nr {
            let wv = nodes.w[j] * nodes.v[j];
            term_a += wv * big_e[j] * big_e[j];
            term_d += 2.0 * wv * big_s[j] * big_h[j];
        }
        let vh: f64 = (0..np).map(|i| s.w[i] * v_hat[i] * s.qp[i].h).sum();
        let h: f64 = (0..np).map(|i| s.w[i] * s.qp[i].h).sum();
        let term_h = -2.0 * vh * h;
        Ok((term_a + term_d + term_h) / (2.0 * (2.0 * PI).powi(2 * n as i32) * s.rho))
    }

    /// ∫ h_p dp.
    pub fn h_integral(&self, s: &DensitySamples) -> f64 {
        s.w.iter().zip(&s.qp).map(|(w, qp)| w * qp.h).sum()
    }

    /// ρ⁻¹{(∫e²)² + (∫|s|)(∫h|q|) + (∫h)²}, the bracket bounding |Ω| up to a constant.
    pub fn omega_bracket(&self, s: &DensitySamples) -> f64 {
        let mut e2 = 0.0;
        let mut sa = 0.0;
        let mut hq = 0.0;
        let mut h = 0.0;
        for ((w, x), qp) in s.w.iter().zip(&s.p).zip(&s.qp) {
            e2 += w * qp.e * qp.e;
            sa += w * qp.s.abs();
            hq += w * qp.h * x;
            h += w * qp.h;
        }
        (e2 * e2 + sa * hq + h * h) / s.rho
    }

    /// Angular average of V̂_{p−q} over the relative direction, in factorized form.
    pub fn angular_vhat_average(&self, p: f64, q: f64) -> Result<f64> {
        let nodes = self.nodes.as_ref().ok_or_else(non_integrable)?;
        let n = self.n();
        Ok((0..nodes.r.len())
            .map(|j| nodes.w[j] * nodes.v[j] * radial_kernel(n, p * nodes.r[j]) * radial_kernel(n, q * nodes.r[j]))
            .sum())
    }

    /// V̂ at one momentum from the same nodes.
    pub fn v_hat(&self, p: f64) -> Result<f64> {
        let nodes = self.nodes.as_ref().ok_or_else(non_integrable)?;
        let n = self.n();
        Ok((0..nodes.r.len()).map(|j| nodes.w[j] * nodes.v[j] * radial_kernel(n, p * nodes.r[j])).sum())
    }

    /// b_m, c_m and c_log.
    pub fn expansion_coefficients(&self) -> Result<ExpansionCoefficients> {
        let n = self.n();
        if n < 4 {
            return Err(Error::Domain("expansion coefficients are defined for n ≥ 4".into()));
        }
        let top = (n + 1) / 2;
        let bs = taylor_coefficients(top + 1);
        let b_m = (3..=top + 1).map(|m| (m, bs[m as usize])).collect();
        let c_m = (3..=top).map(|m| Ok((m, self.c_m(m)?))).collect::<Result<Vec<_>>>()?;
        let c_log = c_log_exact(n).map(|(q, k)| ratio_f64(q) * PI.powi(k as i32));
        Ok(ExpansionCoefficients { b_m, c_m, c_log })
    }

    /// c_m = b_m/(2(2π)^n) ∫ p² ŵ_p^m dp, finite only for m < n/2 + 1.
    pub fn c_m(&self, m: u32) -> Result<f64> {
        let n = self.n();
        if 2 * m >= n + 2 {
            return Err(Error::DivergentMoment(format!(
                "∫p²ŵ^m diverges at p = 0 for m = {m} ≥ n/2 + 1 in n = {n}"
            )));
        }
        if m < 3 {
            return Err(Error::Domain(format!("c_m is defined for m ≥ 3, got {m}")));
        }
        let b = ratio_f64(taylor_coefficients(m)[m as usize]);
        let edges = graded_edges(1e-6 / self.range, P_MAX / self.range, 2.0, 2.0 / self.range);
        let pts = composite_nodes(&edges, &GaussRule::cached(P_ORDER));
        let nm1 = n as i32 - 1;
        let integral: f64 = pts
            .iter()
            .map(|&(x, w)| {
                let what = self.sol.g_hat(x) / (2.0 * x * x);
                w * x.powi(nm1) * x * x * what.powi(m as i32)
            })
            .sum();
        Ok(b * sphere_area(n) * integral / (2.0 * (2.0 * PI).powi(n as i32)))
    }
}

fn non_integrable() -> Error {
    Error::NonIntegrable("V̂ and φ̂ do not exist for a hard-core potential".into())
}

fn ratio_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_dim(sol: &ScatteringSolution, n: u32) -> Result<()> {
    if sol.n() != n {
        return Err(Error::Domain(format!("solution is for n = {}, requested n = {n}", sol.n())));
    }
    Ok(())
}

pub fn compute_q(sol: &ScatteringSolution, rho: f64, n: u32) -> Result<f64> {
    check_dim(sol, n)?;
    if sol.a_pow() == 0.0 {
        return Ok(0.0);
    }
    let so = SecondOrder::new(sol);
    Ok(so.q(&so.samples(rho)?))
}

pub fn compute_q_tilde(sol: &ScatteringSolution, rho: f64, n: u32) -> Result<f64> {
    check_dim(sol, n)?;
    if sol.a_pow() == 0.0 {
        return Ok(0.0);
    }
    let so = SecondOrder::new(sol);
    so.q_tilde(&so.samples(rho)?)
}

pub fn compute_omega(sol: &ScatteringSolution, rho: f64, n: u32) -> Result<f64> {
    check_dim(sol, n)?;
    if sol.a_pow() == 0.0 {
        return Ok(0.0);
    }
    let so = SecondOrder::new(sol);
    so.omega(&so.samples(rho)?)
}

pub fn expansion_coefficients(sol: &ScatteringSolution, n: u32) -> Result<ExpansionCoefficients> {
    check_dim(sol, n)?;
    SecondOrder::new(sol).expansion_coefficients()
}

/// The dimension-appropriate comparator: LHY form (n = 3), log form (n = 4), leading term otherwise.
pub fn reference_energy(n: u32, a_pow: f64, rho: f64) -> f64 {
    let nf = f64::from(n);
    let a = a_pow.powf(1.0 / (nf - 2.0));
    let y = a.powf(nf) * rho;
    let leading = s_n(n) * a_pow * rho;
    match n {
        3 => leading * (1.0 + 128.0 / (15.0 * PI.sqrt()) * y.sqrt()),
        4 if y > 0.0 => leading * (1.0 + 2.0 * PI * PI * y * y.ln().abs()),
        _ => leading,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderReport {
    pub n: u32,
    pub rho: f64,
    pub y: f64,
    pub leading: f64,
    pub q: f64,
    pub q_tilde: f64,
    pub omega: f64,
    pub e_total: f64,
    pub reference: f64,
    pub residual: f64,
    pub coefficients: Option<ExpansionCoefficients>,
    /// c_log s_n a^{n−2}ρ Y^{n/2−1}(|ln(ĝ₀ρ)| − |ln Y|), the term moved into the error by using |ln Y|.
    pub log_shift: Option<f64>,
    /// |Ω| divided by the bracket of its a-priori bound.
    pub omega_bracket_ratio: f64,
}

impl SecondOrderReport {
    /// JSON object with sorted keys.
    pub fn to_json(&self) -> Value {
        let coefficients = match &self.coefficients {
            None => Value::Null,
            Some(c) => json!({
                "b_m": c.b_m.iter().map(|(m, b)| (m.to_string(), json!(b.to_string()))).collect::<serde_json::Map<_, _>>(),
                "c_m": c.c_m.iter().map(|(m, v)| (m.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
                "c_log": c.c_log,
            }),
        };
        json!({
            "n": self.n,
            "rho": self.rho,
            "Y": self.y,
            "Q": self.q,
            "Q_tilde": self.q_tilde,
            "Omega": self.omega,
            "E_total": self.e_total,
            "reference": self.reference,
            "residual": self.residual,
            "coefficients": coefficients,
        })
    }
}

/// Evaluates E(ρ) = s_n a^{n−2}ρ + Q + Q̃ + Ω and the reference expansion.
pub fn second_order_upper(sol: &ScatteringSolution, rho: f64, n: u32) -> Result<SecondOrderReport> {
    check_dim(sol, n)?;
    let so = SecondOrder::new(sol);
    so.report(rho)
}

impl SecondOrder<'_> {
    pub fn report(&self, rho: f64) -> Result<SecondOrderReport> {
        let sol = self.sol;
        let n = self.n();
        let nf = f64::from(n);
        let y = sol.a_pow() * sol.a().powi(2) * rho;
        let leading = s_n(n) * sol.a_pow() * rho;
        let coefficients = if n >= 4 { Some(self.expansion_coefficients()?) } else { None };
        if sol.a_pow() == 0.0 {
            return Ok(SecondOrderReport {
                n,
                rho,
                y,
                leading,
                q: 0.0,
                q_tilde: 0.0,
                omega: 0.0,
                e_total: 0.0,
                reference: 0.0,
                residual: 0.0,
                coefficients,
                log_shift: None,
                omega_bracket_ratio: 0.0,
            });
        }
        let s = self.samples(rho)?;
        let q = self.q(&s);
        let q_tilde = self.q_tilde(&s)?;
        let omega = self.omega(&s)?;
        let e_total = leading + q + q_tilde + omega;
        let reference = reference_energy(n, sol.a_pow(), rho);
        let log_shift = coefficients.as_ref().and_then(|c| c.c_log).map(|c| {
            let g0 = sol.g_hat(0.0);
            c * leading * y.powf(nf / 2.0 - 1.0) * ((g0 * rho).ln().abs() - y.ln().abs())
        });
        let bracket = self.omega_bracket(&s);
        Ok(SecondOrderReport {
            n,
            rho,
            y,
            leading,
            q,
            q_tilde,
            omega,
            e_total,
            reference,
            residual: e_total - reference,
            coefficients,
            log_shift,
            omega_bracket_ratio: if bracket > 0.0 { omega.abs() / bracket } else { 0.0 },
        })
    }
}

/// Convenience for callers holding only a potential.
pub fn is_finite_potential(p: &RadialPotential) -> bool {
    !p.is_hard_core()
}
