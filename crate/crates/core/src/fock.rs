//! Brute-force check of the paired trial state on a truncated Fock space.
//!
//! Modes are lattice vectors k ∈ ℤⁿ with momentum 2πk/L. The state factorizes into
//! blocks: the zero mode (Poisson weights in N₀) and one block per pair {p, −p}
//! (geometric weights in c_p²). Expectations are computed by applying creation and
//! annihilation operators to basis vectors and summing over the truncated basis.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Mode = Vec<i64>;

/// Default cap on the number of truncated basis states.
pub const DEFAULT_BUDGET: usize = 8_000_000;
/// Amplitudes below this are dropped from the support.
const PRUNE: f64 = 1e-40;
/// A normalization deficit above this raises the flag.
const DEFICIT_FLAG: f64 = 1e-6;
const MAX_MODES: usize = 15;
/// Cap on the number of quartic terms applied in `energy_expectation`.
const TERM_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    /// Zero mode first, then pairs (p, −p).
    modes: Vec<Mode>,
    l: f64,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!("box side must be positive, got {l}")));
        }
        let dim = modes.first().map(Vec::len).ok_or_else(|| Error::Domain("empty mode set".into()))?;
        if dim == 0 || modes.iter().any(|m| m.len() != dim) {
            return Err(Error::Domain("modes must share a positive dimension".into()));
        }
        let mut sorted = modes.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("mode labels must be distinct".into()));
        }
        let zero = vec![0; dim];
        if !modes.contains(&zero) {
            return Err(Error::Domain("mode set must contain 0".into()));
        }
        let mut ordered = vec![zero.clone()];
        for m in &sorted {
            let neg = negate(m);
            if sorted.binary_search(&neg).is_err() {
                return Err(Error::Domain(format!("mode set not closed under negation: {m:?}")));
            }
            if *m != zero && *m > neg {
                ordered.push(m.clone());
                ordered.push(neg);
            }
        }
        Ok(ModeSet { modes: ordered, l })
    }

    /// {0} ∪ {±k : k ∈ reps}.
    pub fn from_pairs(reps: &[Mode], l: f64) -> Result<Self> {
        let dim = reps.first().map_or(1, Vec::len);
        let mut modes = vec![vec![0; dim]];
        for k in reps {
            modes.push(k.clone());
            modes.push(negate(k));
        }
        ModeSet::new(modes, l)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.modes[0].len()
    }

    pub fn pairs(&self) -> usize {
        (self.modes.len() - 1) / 2
    }

    /// |2πk/L|.
    pub fn momentum(&self, k: &[i64]) -> f64 {
        2.0 * PI / self.l * k.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt()
    }

    fn index_of(&self, k: &[i64]) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.as_slice() == k)
            .ok_or_else(|| Error::Mode(format!("mode {k:?} is not in the mode set")))
    }
}

fn negate(k: &[i64]) -> Mode {
    k.iter().map(|x| -x).collect()
}

fn block_of(mode: usize) -> usize {
    mode.div_ceil(2)
}

/// Exact normalized weights of one block, tabulated until negligible.
#[derive(Debug, Clone)]
struct BlockWeights(Vec<f64>);

impl BlockWeights {
    fn poisson(n0: f64, min_len: usize) -> Self {
        let mut w = vec![(-n0).exp()];
        let mut k = 0usize;
        loop {
            let next = w[k] * n0 / (k + 1) as f64;
            k += 1;
            w.push(next);
            if k > min_len && (k as f64) > n0 && next < 1e-300f64.max(1e-40 * w[k - 1]) {
                break;
            }
            if k > min_len + 100_000 {
                break;
            }
        }
        BlockWeights(w)
    }

    fn geometric(c: f64, min_len: usize) -> Self {
        let x = c * c;
        let mut w = vec![1.0 - x];
        while w.len() <= min_len || (*w.last().unwrap() > 1e-300 && w.len() < min_len + 200_000) {
            let next = w.last().unwrap() * x;
            if next == 0.0 {
                break;
            }
            w.push(next);
        }
        BlockWeights(w)
    }

    fn get(&self, k: isize) -> f64 {
        if k < 0 {
            0.0
        } else {
            self.0.get(k as usize).copied().unwrap_or(0.0)
        }
    }

    fn truncated_mass(&self, cutoff: usize) -> f64 {
        self.0.iter().take(cutoff + 1).sum()
    }

    /// Σ_{k ≥ from} (k+3)² max_{|j−k|≤2} w_j.
    fn weighted_tail(&self, from: usize) -> f64 {
        (from..self.0.len() + 2)
            .map(|k| {
                let m = (-2..=2).map(|d| self.get(k as isize + d)).fold(0.0, f64::max);
                ((k + 3) * (k + 3)) as f64 * m
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedFockState {
    modes: ModeSet,
    cutoff: usize,
    n0: f64,
    /// c per pair block, in mode-set order.
    c: Vec<f64>,
    /// Dense amplitudes over block occupations (mixed radix, base cutoff+1).
    amps: Vec<f64>,
    support: Vec<usize>,
    deficit: f64,
    /// Per block: (weighted tail beyond cutoff−2, weighted total, truncated mass).
    tails: Vec<(f64, f64, f64)>,
}

/// Builds the trial state with the default size budget.
pub fn build_state(ms: &ModeSet, c: &BTreeMap<Mode, f64>, n: f64, cutoff: usize) -> Result<TruncatedFockState> {
    build_state_with_budget(ms, c, n, cutoff, DEFAULT_BUDGET)
}

pub fn build_state_with_budget(
    ms: &ModeSet,
    c: &BTreeMap<Mode, f64>,
    n: f64,
    cutoff: usize,
    budget: usize,
) -> Result<TruncatedFockState> {
    if cutoff < 1 {
        return Err(Error::Domain("cutoff must be at least 1".into()));
    }
    if ms.modes.len() > MAX_MODES {
        return Err(Error::Size { size: ms.modes.len(), budget: MAX_MODES });
    }
    for (k, &v) in c {
        let i = ms.index_of(k)?;
        if i == 0 {
            return Err(Error::Mode("c is not defined at p = 0".into()));
        }
        if !(v.abs() < 1.0) {
            return Err(Error::Domain(format!("|c_p| must be < 1, got {v} at {k:?}")));
        }
        if let Some(&w) = c.get(&negate(k)) {
            if w != v {
                return Err(Error::Domain(format!("c must be even: c({k:?}) = {v} but c(−p) = {w}")));
            }
        }
    }
    let pairs = ms.pairs();
    let cp: Vec<f64> = (0..pairs)
        .map(|j| {
            let p = &ms.modes[2 * j + 1];
            c.get(p).or_else(|| c.get(&negate(p))).copied().unwrap_or(0.0)
        })
        .collect();
    let depletion: f64 = cp.iter().map(|x| 2.0 * x * x / (1.0 - x * x)).sum();
    let n0 = n - depletion;
    if n0 < 0.0 {
        return Err(Error::Infeasible(format!(
            "N₀ = N − Σh_p = {n0:.6} < 0: depletion {depletion:.6} exceeds N = {n}"
        )));
    }
    let base = cutoff + 1;
    let size = base
        .checked_pow((pairs + 1) as u32)
        .filter(|&s| s <= budget)
        .ok_or(Error::Size { size: base.saturating_pow((pairs + 1) as u32), budget })?;

    let mut blocks = vec![BlockWeights::poisson(n0, cutoff + 4)];
    blocks.extend(cp.iter().map(|&x| BlockWeights::geometric(x, cutoff + 4)));
    let masses: Vec<f64> = blocks.iter().map(|b| b.truncated_mass(cutoff)).collect();
    let z: f64 = masses.iter().product();

    let mut amps = vec![0.0; size];
    let mut support = Vec::new();
    let mut pruned = 0.0;
    let mut digits = vec![0usize; pairs + 1];
    for (idx, amp) in amps.iter_mut().enumerate() {
        decode(idx, base, &mut digits);
        let w: f64 = digits.iter().zip(&blocks).map(|(&d, b)| b.get(d as isize)).product::<f64>() / z;
        // c_p^{α(p)} carries the sign of c for odd pair occupations
        let sign: f64 = digits[1..].iter().zip(&cp).map(|(&d, &x)| if x < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 }).product();
        let a = sign * w.sqrt();
        if a.abs() < PRUNE {
            pruned += w;
        } else {
            *amp = a;
            support.push(idx);
        }
    }
    let tails = blocks
        .iter()
        .zip(&masses)
        .map(|(b, &m)| (b.weighted_tail(cutoff.saturating_sub(2)), b.weighted_tail(0), m))
        .collect();
    Ok(TruncatedFockState {
        modes: ms.clone(),
        cutoff,
        n0,
        c: cp,
        amps,
        support,
        deficit: (1.0 - z) + pruned * z,
        tails,
    })
}

fn decode(mut idx: usize, base: usize, digits: &mut [usize]) {
    for d in digits.iter_mut() {
        *d = idx % base;
        idx /= base;
    }
}

/// One operator: mode index and whether it creates.
type Op = (usize, bool);

/// Neumaier-compensated sum that also tracks Σ|x|.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl Acc {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    fn merge(mut self, o: Acc) -> Acc {
        self.add(o.sum);
        self.comp += o.comp;
        self.abs += o.abs - o.sum.abs();
        self
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn roundoff(&self) -> f64 {
        4.0 * f64::EPSILON * self.abs
    }
}

impl TruncatedFockState {
    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mode_set(&self) -> &ModeSet {
        &self.modes
    }

    /// 1 − Σ|f(α)|² relative to the untruncated normalization.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn deficit_flag(&self) -> bool {
        self.deficit > DEFICIT_FLAG
    }

    pub fn dimension(&self) -> usize {
        self.amps.len()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// Amplitude of an occupation function, given per mode in mode-set order.
    pub fn amplitude(&self, occ: &[usize]) -> f64 {
        self.lookup(occ).unwrap_or(0.0)
    }

    pub fn norm_squared(&self) -> f64 {
        let mut acc = Acc::default();
        for &i in &self.support {
            acc.add(self.amps[i] * self.amps[i]);
        }
        acc.value()
    }

    pub fn h(&self, p: &[i64]) -> Result<f64> {
        let i = self.modes.index_of(p)?;
        Ok(if i == 0 { self.n0 } else { h_of(self.c[block_of(i) - 1]) })
    }

    pub fn s(&self, p: &[i64]) -> Result<f64> {
        let i = self.modes.index_of(p)?;
        Ok(if i == 0 { self.n0 } else { s_of(self.c[block_of(i) - 1]) })
    }

    fn lookup(&self, occ: &[usize]) -> Option<f64> {
        let base = self.cutoff + 1;
        if occ[0] > self.cutoff {
            return None;
        }
        let mut idx = occ[0];
        let mut scale = base;
        for j in 0..self.modes.pairs() {
            let (a, b) = (occ[2 * j + 1], occ[2 * j + 2]);
            if a != b || a > self.cutoff {
                return None;
            }
            idx += a * scale;
            scale *= base;
        }
        Some(self.amps[idx])
    }

    /// ⟨ψ| O |ψ⟩ for O = ops[0] ops[1] … (rightmost acts first).
    fn expect_ops(&self, ops: &[Op]) -> Acc {
        let base = self.cutoff + 1;
        let m = self.modes.modes.len();
        let blocks = self.modes.pairs() + 1;
        self.support
            .par_iter()
            .fold(Acc::default, |mut acc, &idx| {
                let mut digits = [0usize; MAX_MODES];
                decode(idx, base, &mut digits[..blocks]);
                let mut occ = [0usize; MAX_MODES];
                for (k, o) in occ.iter_mut().enumerate().take(m) {
                    *o = digits[block_of(k)];
                }
                let mut coef = 1.0;
                for &(mode, create) in ops.iter().rev() {
                    if create {
                        occ[mode] += 1;
                        coef *= (occ[mode] as f64).sqrt();
                    } else {
                        if occ[mode] == 0 {
                            return acc;
                        }
                        coef *= (occ[mode] as f64).sqrt();
                        occ[mode] -= 1;
                    }
                }
                if let Some(b) = self.lookup(&occ[..m]) {
                    if b != 0.0 {
                        acc.add(b * coef * self.amps[idx]);
                    }
                }
                acc
            })
            .reduce(Acc::default, Acc::merge)
    }

    /// Truncation bound for an operator acting on the given blocks.
    fn truncation_bound(&self, blocks: &[usize]) -> f64 {
        let mut uniq: Vec<usize> = blocks.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let total: f64 = uniq.iter().map(|&b| self.tails[b].1).product();
        let tail: f64 = uniq
            .iter()
            .map(|&b| self.tails[b].0 * uniq.iter().filter(|&&o| o != b).map(|&o| self.tails[o].1).product::<f64>())
            .sum();
        let delta = (1.0 - uniq.iter().map(|&b| self.tails[b].2).product::<f64>()).max(0.0);
        (tail + delta * total) / (1.0 - delta).max(f64::MIN_POSITIVE)
    }
}

fn h_of(c: f64) -> f64 {
    c * c / (1.0 - c * c)
}

fn s_of(c: f64) -> f64 {
    c / (1.0 - c * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CondensateQuantity {
    /// ⟨a₀⁺a₀⟩
    Number,
    /// ⟨a₀a₀⟩
    Pair,
    /// ⟨a₀⁺a₀a₀⁺a₀⟩
    Square,
}

/// The expectation identities of the trial state, items 1–6.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Selector {
    Condensate(CondensateQuantity),
    /// ⟨a_p⁺a_p a_q⁺a_q⟩ = h_p h_q for p ≠ ±q, p ≠ 0.
    Factorization { p: Mode, q: Mode },
    /// ⟨a_p⁺a_{−p}⁺ a_q a_{−q}⟩ = s_p s_q for p ≠ ±q, p ≠ 0.
    PairFactorization { p: Mode, q: Mode },
    Occupation(Mode),
    Pairing(Mode),
    /// ⟨a_p⁺a_p a_{±p}⁺a_{±p}⟩ = h_p(2h_p+1); `flip` selects −p.
    Fluctuation { p: Mode, flip: bool },
}

impl Selector {
    pub fn item(&self) -> u8 {
        match self {
            Selector::Condensate(_) => 1,
            Selector::Factorization { .. } => 2,
            Selector::PairFactorization { .. } => 3,
            Selector::Occupation(_) => 4,
            Selector::Pairing(_) => 5,
            Selector::Fluctuation { .. } => 6,
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Condensate(CondensateQuantity::Number) => write!(f, "<a0+ a0>"),
            Selector::Condensate(CondensateQuantity::Pair) => write!(f, "<a0 a0>"),
            Selector::Condensate(CondensateQuantity::Square) => write!(f, "<a0+ a0 a0+ a0>"),
            Selector::Factorization { p, q } => write!(f, "<n{p:?} n{q:?}>"),
            Selector::PairFactorization { p, q } => write!(f, "<a+{p:?} a+-p a{q:?} a-q>"),
            Selector::Occupation(p) => write!(f, "<n{p:?}>"),
            Selector::Pairing(p) => write!(f, "<a+{p:?} a+-p>"),
            Selector::Fluctuation { p, flip } => write!(f, "<n{p:?} n{}p>", if *flip { "-" } else { "+" }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationRecord {
    pub selector: Selector,
    pub numeric: f64,
    pub closed_form: f64,
    pub abs_err: f64,
    /// Truncation tail plus summation roundoff.
    pub tail_bound: f64,
}

impl ExpectationRecord {
    pub fn within_bound(&self) -> bool {
        self.abs_err <= self.tail_bound
    }
}

/// Evaluates one identity by brute force and compares with its closed form.
pub fn expectations(st: &TruncatedFockState, selector: &Selector) -> Result<ExpectationRecord> {
    let ms = &st.modes;
    let nonzero = |p: &Mode| -> Result<usize> {
        let i = ms.index_of(p)?;
        if i == 0 {
            return Err(Error::Mode("selector needs p ≠ 0".into()));
        }
        Ok(i)
    };
    let distinct = |i: usize, j: usize| -> Result<()> {
        if i != 0 && block_of(i) == block_of(j) {
            return Err(Error::Mode("selector needs p ≠ ±q".into()));
        }
        Ok(())
    };
    let partner = |i: usize| if i == 0 { 0 } else if i % 2 == 1 { i + 1 } else { i - 1 };
    let (ops, closed): (Vec<Op>, f64) = match selector {
        Selector::Condensate(q) => match q {
            CondensateQuantity::Number => (vec![(0, true), (0, false)], st.n0),
            CondensateQuantity::Pair => (vec![(0, false), (0, false)], st.n0),
            CondensateQuantity::Square => {
                (vec![(0, true), (0, false), (0, true), (0, false)], st.n0 * (st.n0 + 1.0))
            }
        },
        Selector::Factorization { p, q } => {
            let i = nonzero(p)?;
            let j = ms.index_of(q)?;
            distinct(i, j)?;
            (vec![(i, true), (i, false), (j, true), (j, false)], st.h(p)? * st.h(q)?)
        }
        Selector::PairFactorization { p, q } => {
            let i = nonzero(p)?;
            let j = ms.index_of(q)?;
            distinct(i, j)?;
            (vec![(i, true), (partner(i), true), (j, false), (partner(j), false)], st.s(p)? * st.s(q)?)
        }
        Selector::Occupation(p) => {
            let i = nonzero(p)?;
            (vec![(i, true), (i, false)], st.h(p)?)
        }
        Selector::Pairing(p) => {
            let i = nonzero(p)?;
            (vec![(i, true), (partner(i), true)], st.s(p)?)
        }
        Selector::Fluctuation { p, flip } => {
            let i = nonzero(p)?;
            let j = if *flip { partner(i) } else { i };
            let h = st.h(p)?;
            (vec![(i, true), (i, false), (j, true), (j, false)], h * (2.0 * h + 1.0))
        }
    };
    let blocks: Vec<usize> = ops.iter().map(|&(m, _)| block_of(m)).collect();
    let acc = st.expect_ops(&ops);
    let numeric = acc.value();
    Ok(ExpectationRecord {
        selector: selector.clone(),
        numeric,
        closed_form: closed,
        abs_err: (numeric - closed).abs(),
        tail_bound: st.truncation_bound(&blocks) + acc.roundoff(),
    })
}

/// All admissible selectors for a state: item 1 in full and items 2–6 over its modes.
pub fn all_selectors(ms: &ModeSet) -> Vec<Selector> {
    let mut out = vec![
        Selector::Condensate(CondensateQuantity::Number),
        Selector::Condensate(CondensateQuantity::Pair),
        Selector::Condensate(CondensateQuantity::Square),
    ];
    let m = ms.modes();
    for (i, p) in m.iter().enumerate().skip(1) {
        out.push(Selector::Occupation(p.clone()));
        out.push(Selector::Pairing(p.clone()));
        out.push(Selector::Fluctuation { p: p.clone(), flip: false });
        out.push(Selector::Fluctuation { p: p.clone(), flip: true });
        for (j, q) in m.iter().enumerate() {
            if j == 0 || block_of(j) != block_of(i) {
                out.push(Selector::Factorization { p: p.clone(), q: q.clone() });
                out.push(Selector::PairFactorization { p: p.clone(), q: q.clone() });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyExpectation {
    pub numeric: f64,
    pub closed: f64,
    pub tail_bound: f64,
}

/// ⟨H̃_L⟩ by operator application over pair-preserving quartic terms, and the
/// kinetic + E₁ + E₂ + E₃ closed form on the same mode set.
pub fn energy_expectation(
    st: &TruncatedFockState,
    v_hat: &(dyn Fn(f64) -> f64 + Sync),
    l: f64,
    n: usize,
) -> Result<EnergyExpectation> {
    let ms = &st.modes;
    if n != ms.dim() || (l - ms.l).abs() > 1e-12 * ms.l {
        return Err(Error::Domain(format!(
            "state lives in n = {}, L = {}; got n = {n}, L = {l}",
            ms.dim(),
            ms.l
        )));
    }
    let modes = ms.modes();
    let m = modes.len();
    let vol = l.powi(n as i32);
    let diff = |a: &Mode, b: &Mode| -> Mode { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let vh = |k: &Mode| v_hat(ms.momentum(k));

    let mut numeric = 0.0;
    let mut bound = 0.0;
    for (i, p) in modes.iter().enumerate().skip(1) {
        let acc = st.expect_ops(&[(i, true), (i, false)]);
        let k2 = ms.momentum(p).powi(2);
        numeric += k2 * acc.value();
        bound += k2 * (st.truncation_bound(&[block_of(i)]) + acc.roundoff());
    }
    let neg: Vec<usize> = modes.iter().map(|k| ms.index_of(&negate(k)).expect("closed set")).collect();
    let mut terms = 0usize;
    for ip in 0..m {
        for iq in 0..m {
            for ir in 0..m {
                for is in 0..m {
                    if !(ip == ir || ip == is || iq == neg[ip]) {
                        continue;
                    }
                    let lhs: Mode = modes[ip].iter().zip(&modes[iq]).map(|(a, b)| a + b).collect();
                    let rhs: Mode = modes[ir].iter().zip(&modes[is]).map(|(a, b)| a + b).collect();
                    if lhs != rhs {
                        continue;
                    }
                    terms += 1;
                    if terms > TERM_BUDGET {
                        return Err(Error::Size { size: terms, budget: TERM_BUDGET });
                    }
                    let v = vh(&diff(&modes[ip], &modes[ir])) / (2.0 * vol);
                    if v == 0.0 {
                        continue;
                    }
                    let ops = [(ip, true), (iq, true), (ir, false), (is, false)];
                    let acc = st.expect_ops(&ops);
                    numeric += v * acc.value();
                    let blocks: Vec<usize> = ops.iter().map(|&(x, _)| block_of(x)).collect();
                    bound += v.abs() * (st.truncation_bound(&blocks) + acc.roundoff());
                }
            }
        }
    }

    // closed form
    let hs: Vec<f64> = (1..m).map(|i| h_of(st.c[block_of(i) - 1])).collect();
    let ss: Vec<f64> = (1..m).map(|i| s_of(st.c[block_of(i) - 1])).collect();
    let n_total = st.n0 + hs.iter().sum::<f64>();
    let kinetic: f64 = (1..m).map(|i| ms.momentum(&modes[i]).powi(2) * hs[i - 1]).sum();
    let v0 = v_hat(0.0);
    let e1 = v0 / (2.0 * vol) * (n_total * n_total + hs.iter().map(|h| h * (2.0 * h + 1.0)).sum::<f64>());
    let mut e2 = 0.0;
    let mut e3 = 0.0;
    for i in 1..m {
        let (h, s) = (hs[i - 1], ss[i - 1]);
        let vp = vh(&modes[i]);
        e2 += st.n0 / vol * vp * h;
        e3 += st.n0 / vol * vp * s;
        let two_p: Mode = modes[i].iter().map(|x| 2 * x).collect();
        e2 += vh(&two_p) / (2.0 * vol) * h * (2.0 * h + 1.0);
        for j in 1..m {
            if block_of(i) == block_of(j) {
                continue;
            }
            let v = vh(&diff(&modes[i], &modes[j])) / (2.0 * vol);
            e2 += v * h * hs[j - 1];
            e3 += v * s * ss[j - 1];
        }
    }
    Ok(EnergyExpectation { numeric, closed: kinetic + e1 + e2 + e3, tail_bound: bound })
}
