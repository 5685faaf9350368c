//! Gauss–Legendre rules, composite panels and adaptive Gauss–Kronrod.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Builds the `order`-point rule by Newton iteration on P_order.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = (order + 1) / 2;
        let nf = order as f64;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[m - 1] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Cached rule; rules are immutable once built.
    pub fn cached(order: usize) -> Arc<GaussRule> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("gauss rule cache poisoned");
        guard
            .entry(order)
            .or_insert_with(|| Arc::new(GaussRule::new(order)))
            .clone()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre over consecutive `edges`.
pub fn composite<F: FnMut(f64) -> f64>(edges: &[f64], rule: &GaussRule, mut f: F) -> f64 {
    edges
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Flattened (node, weight) pairs of a composite rule.
pub fn composite_nodes(edges: &[f64], rule: &GaussRule) -> Vec<(f64, f64)> {
    edges
        .windows(2)
        .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect()
}

/// Panel edges on [0, hi]: one panel [0, first], then geometric growth by
/// `ratio` capped at `max_width`.
pub fn graded_edges(first: f64, hi: f64, ratio: f64, max_width: f64) -> Vec<f64> {
    assert!(first > 0.0 && hi > first && ratio > 1.0 && max_width > 0.0);
    let mut edges = vec![0.0, first];
    let mut x = first;
    while x < hi {
        let width = ((ratio - 1.0) * x).min(max_width);
        x = (x + width).min(hi);
        if hi - x < 1e-3 * width {
            x = hi;
        }
        edges.push(x);
    }
    edges
}

/// Uniform panel edges on [a, b] with width at most `max_width`.
pub fn uniform_edges(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    let count = (((b - a) / max_width).ceil() as usize).max(1);
    (0..=count)
        .map(|i| a + (b - a) * i as f64 / count as f64)
        .collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) on a finite interval with global bisection.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    const MAX_INTERVALS: usize = 4000;
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::ToleranceNotMet {
                achieved: err,
                requested: abs_tol.max(rel_tol * total.abs()),
                context: "adaptive quadrature interval budget exhausted".into(),
            });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, pv, pe) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    // resum to shed accumulated update rounding
    let total: f64 = pieces.iter().map(|p| p.2).sum();
    let err: f64 = pieces.iter().map(|p| p.3).sum();
    Ok((total, err))
}
