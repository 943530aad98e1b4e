//! Binary finite-state encoders and the trellis enumerator `fsm_iowe`.

use alloc::string::String;
use alloc::vec::Vec;

use super::Iowe;
use crate::error::{contract, invalid, Error, Result};
use crate::special::log_add_exp;

/// Default cap on DP cells (two layers of `states × (K+1) × (n+1)`).
pub const DEFAULT_CELL_BUDGET: u128 = 1 << 31;

/// Binary-input encoder given by next-state and output tables. Output bit `o`
/// of a transition is bit `o` of the packed output word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsm {
    outputs: usize,
    next: Vec<[usize; 2]>,
    out: Vec<[u32; 2]>,
}

impl Fsm {
    pub fn new(outputs: usize, next: Vec<[usize; 2]>, out: Vec<[u32; 2]>) -> Result<Self> {
        let states = next.len();
        if states == 0 || out.len() != states {
            return Err(invalid!("state tables must be nonempty and of equal length"));
        }
        if outputs == 0 || outputs > 32 {
            return Err(invalid!("an encoder emits between 1 and 32 bits per step, got {outputs}"));
        }
        if next.iter().flatten().any(|&s| s >= states) {
            return Err(invalid!("next-state table points outside the state set"));
        }
        if out.iter().flatten().any(|&o| outputs < 32 && o >> outputs != 0) {
            return Err(invalid!("output word wider than {outputs} bits"));
        }
        Ok(Fsm { outputs, next, out })
    }

    /// Recursive systematic encoder `[1, g1(D)/g0(D)]`. Polynomials are bit
    /// masks with bit `i` the coefficient of `D^i`; `g0` must have a constant
    /// term. Outputs per step: systematic bit, then parity bit.
    pub fn rsc(feedback: u32, feedforward: u32) -> Result<Self> {
        if feedback & 1 == 0 {
            return Err(invalid!("feedback polynomial needs a constant term"));
        }
        let memory = (32 - feedback.leading_zeros()).max(32 - feedforward.leading_zeros()).saturating_sub(1) as usize;
        if memory > 16 {
            return Err(invalid!("encoder memory {memory} is too large"));
        }
        let states = 1usize << memory;
        let mask = states - 1;
        let mut next = Vec::with_capacity(states);
        let mut out = Vec::with_capacity(states);
        for s in 0..states {
            let mut nx = [0usize; 2];
            let mut ot = [0u32; 2];
            for u in 0..2u32 {
                // state bit i-1 holds a_{t-i}
                let fb = ((s as u32) << 1 & feedback & !1).count_ones() & 1;
                let a = u ^ fb;
                let reg = ((s as u32) << 1) | a;
                let parity = (reg & feedforward).count_ones() & 1;
                nx[u as usize] = ((s << 1) | a as usize) & mask;
                ot[u as usize] = u | parity << 1;
            }
            next.push(nx);
            out.push(ot);
        }
        Fsm::new(2, next, out)
    }

    /// Two-state accumulator with a single output `x_t = x_{t-1} ⊕ u_t`.
    pub fn accumulator() -> Self {
        Fsm { outputs: 1, next: alloc::vec![[0, 1], [1, 0]], out: alloc::vec![[0, 1], [1, 0]] }
    }

    /// Parses `[1, num/den]`, e.g. `[1,(1+D^4)/(1+D+D^2+D^3+D^4)]`.
    pub fn from_generator_str(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| invalid!("generator must be bracketed: {text}"))?;
        let (first, second) = inner.split_once(',').ok_or_else(|| invalid!("generator needs two entries: {text}"))?;
        if first != "1" {
            return Err(invalid!("only systematic generators [1, g1/g0] are supported: {text}"));
        }
        let (num, den) = match second.split_once('/') {
            Some((n, d)) => (parse_poly(n)?, parse_poly(d)?),
            None => (parse_poly(second)?, 1),
        };
        Fsm::rsc(den, num)
    }

    pub fn states(&self) -> usize {
        self.next.len()
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn step(&self, state: usize, bit: u8) -> (usize, u32) {
        let b = (bit & 1) as usize;
        (self.next[state][b], self.out[state][b])
    }

    /// Shortest length `T` such that every state reaches state 0 in exactly
    /// `T` steps, and for each state the lexicographically smallest such input.
    pub fn termination_tails(&self) -> Result<Vec<Vec<u8>>> {
        let states = self.states();
        // reach[j][s]: s reaches 0 in exactly j steps
        let mut reach: Vec<Vec<bool>> = alloc::vec![(0..states).map(|s| s == 0).collect()];
        let cap = 4 * states.max(8);
        while !reach.last().unwrap().iter().all(|&r| r) {
            if reach.len() > cap {
                return Err(invalid!("encoder cannot be driven back to the zero state"));
            }
            let prev = reach.last().unwrap();
            let cur = (0..states).map(|s| prev[self.next[s][0]] || prev[self.next[s][1]]).collect();
            reach.push(cur);
        }
        let t = reach.len() - 1;
        let tails = (0..states)
            .map(|s0| {
                let mut s = s0;
                let mut bits = Vec::with_capacity(t);
                for left in (0..t).rev() {
                    let b = if reach[left][self.next[s][0]] { 0 } else { 1 };
                    bits.push(b as u8);
                    s = self.next[s][b];
                }
                bits
            })
            .collect();
        Ok(tails)
    }

    /// Encodes `bits` from state 0; returns the transmitted bits.
    pub fn encode(&self, bits: &[u8], mask: &PunctureMask, termination: Termination) -> Result<Vec<u8>> {
        let mut s = 0usize;
        let mut tx = Vec::new();
        for (t, &b) in bits.iter().enumerate() {
            let (ns, o) = self.step(s, b);
            for k in 0..self.outputs {
                if mask.keeps(t * self.outputs + k) {
                    tx.push(((o >> k) & 1) as u8);
                }
            }
            s = ns;
        }
        if termination == Termination::Zero {
            for &b in &self.termination_tails()?[s] {
                let (ns, o) = self.step(s, b);
                for k in 0..self.outputs {
                    tx.push(((o >> k) & 1) as u8);
                }
                s = ns;
            }
        }
        Ok(tx)
    }
}

fn parse_poly(text: &str) -> Result<u32> {
    let t = text.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(text);
    let mut mask = 0u32;
    for term in t.split('+') {
        let power = match term {
            "1" => 0,
            "D" => 1,
            _ => term
                .strip_prefix("D^")
                .and_then(|p| p.parse::<u32>().ok())
                .ok_or_else(|| invalid!("cannot parse polynomial term '{term}'"))?,
        };
        if power > 16 {
            return Err(invalid!("polynomial degree {power} is too large"));
        }
        mask ^= 1 << power;
    }
    Ok(mask)
}

/// Periodic keep-mask over the output positions `t · outputs + o` of the
/// information phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunctureMask(Vec<bool>);

impl PunctureMask {
    pub fn new(pattern: Vec<bool>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(invalid!("puncturing pattern must be nonempty"));
        }
        Ok(PunctureMask(pattern))
    }

    pub fn keep_all() -> Self {
        PunctureMask(alloc::vec![true])
    }

    /// Keep the last of every `period` consecutive positions.
    pub fn every(period: usize) -> Result<Self> {
        if period == 0 {
            return Err(invalid!("puncturing period must be at least 1"));
        }
        let mut p = alloc::vec![false; period];
        p[period - 1] = true;
        Ok(PunctureMask(p))
    }

    #[inline]
    pub fn keeps(&self, idx: usize) -> bool {
        self.0[idx % self.0.len()]
    }

    pub fn pattern(&self) -> &[bool] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Open,
    /// Driven to state 0 after the information bits; tail outputs are all
    /// transmitted and counted in `n`, tail inputs are not counted in `K`.
    Zero,
}

/// Exact IOWE of `fsm` over `info_len` information bits by dynamic programming
/// over (state, input weight, kept output weight).
pub fn fsm_iowe(fsm: &Fsm, info_len: usize, mask: &PunctureMask, termination: Termination, budget: u128) -> Result<Iowe> {
    let states = fsm.states();
    let outs = fsm.outputs();
    let tails = match termination {
        Termination::Zero => Some(fsm.termination_tails()?),
        Termination::Open => None,
    };
    let kept_info = (0..info_len * outs).filter(|&i| mask.keeps(i)).count();
    let tail_len = tails.as_ref().map_or(0, |t| t[0].len() * outs);
    let n = kept_info + tail_len;
    let k = info_len;
    let required = 2 * states as u128 * (k as u128 + 1) * (kept_info as u128 + 1);
    if required > budget {
        return Err(Error::Resource { what: alloc::format!("trellis enumerator (K = {k})"), required, budget });
    }
    let hdim = kept_info + 1;
    let wdim = k + 1;
    let idx = |s: usize, w: usize, h: usize| (s * wdim + w) * hdim + h;
    let mut cur = alloc::vec![f64::NEG_INFINITY; states * wdim * hdim];
    let mut nxt = cur.clone();
    cur[idx(0, 0, 0)] = 0.0;
    let mut h_max = 0usize;
    for t in 0..k {
        let keep_bits: u32 = (0..outs).filter(|&o| mask.keeps(t * outs + o)).fold(0, |m, o| m | 1 << o);
        let step_h = keep_bits.count_ones() as usize;
        nxt.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        for s in 0..states {
            for w in 0..=t.min(k) {
                let base = idx(s, w, 0);
                for h in 0..=h_max {
                    let v = cur[base + h];
                    if v == f64::NEG_INFINITY {
                        continue;
                    }
                    for b in 0..2u8 {
                        let (ns, o) = fsm.step(s, b);
                        let dh = (o & keep_bits).count_ones() as usize;
                        let j = idx(ns, w + b as usize, h + dh);
                        nxt[j] = log_add_exp(nxt[j], v);
                    }
                }
            }
        }
        h_max += step_h;
        core::mem::swap(&mut cur, &mut nxt);
    }
    let mut out = Iowe::empty(k, n);
    for s in 0..states {
        let dh = match &tails {
            Some(tails) => {
                let mut st = s;
                let mut weight = 0usize;
                for &b in &tails[s] {
                    let (ns, o) = fsm.step(st, b);
                    weight += o.count_ones() as usize;
                    st = ns;
                }
                if st != 0 {
                    return Err(contract!("termination tail of state {s} does not end in state 0"));
                }
                weight
            }
            None => 0,
        };
        for w in 0..=k {
            for h in 0..=kept_info {
                let v = cur[idx(s, w, h)];
                if v != f64::NEG_INFINITY {
                    out.set(w, h + dh, log_add_exp(out.get(w, h + dh), v));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::acc_iowe;

    #[test]
    fn accumulator_fsm_matches_closed_form() {
        let t = fsm_iowe(&Fsm::accumulator(), 12, &PunctureMask::keep_all(), Termination::Open, DEFAULT_CELL_BUDGET)
            .unwrap();
        let (d, same) = t.max_log_diff(&acc_iowe(12));
        assert!(same && d < 1e-12, "{d}");
    }

    #[test]
    fn rsc_as_accumulator() {
        let f = Fsm::rsc(0b11, 0b1).unwrap();
        let mask = PunctureMask::new(alloc::vec![false, true]).unwrap();
        let t = fsm_iowe(&f, 9, &mask, Termination::Open, DEFAULT_CELL_BUDGET).unwrap();
        let (d, same) = t.max_log_diff(&acc_iowe(9));
        assert!(same && d < 1e-12);
    }

    #[test]
    fn turbo_rsc_parses_and_terminates() {
        let f = Fsm::from_generator_str("[1,(1+D^4)/(1+D+D^2+D^3+D^4)]").unwrap();
        assert_eq!(f, Fsm::rsc(0b11111, 0b10001).unwrap());
        assert_eq!(f.states(), 16);
        let tails = f.termination_tails().unwrap();
        assert!(tails.iter().all(|t| t.len() == 4));
        let t = fsm_iowe(&f, 8, &PunctureMask::keep_all(), Termination::Zero, DEFAULT_CELL_BUDGET).unwrap();
        assert_eq!(t.output_len(), 16 + 8);
        assert!((t.log_total() - 8.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let f = Fsm::rsc(0b11111, 0b10001).unwrap();
        let e = fsm_iowe(&f, 100, &PunctureMask::keep_all(), Termination::Zero, 1000).unwrap_err();
        assert_eq!(e.code(), "E_RESOURCE");
    }

    #[test]
    fn generator_parse_errors() {
        assert!(Fsm::from_generator_str("1,(1+D)").is_err());
        assert!(Fsm::from_generator_str("[1,(1+X)/(1+D)]").is_err());
        assert!(Fsm::from_generator_str("[1,(1+D^2)/(D)]").is_err());
        assert!(Fsm::from_generator_str("[1,1+D+D^2]").is_ok());
    }
}
