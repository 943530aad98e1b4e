//! Closed-form enumerators: repetition, accumulator, identity, partial
//! precoder and the periodically punctured accumulator.

use alloc::vec::Vec;

use super::{Iowe, WeightEnumerator};
use crate::error::{contract, invalid, Result};
use crate::special::{LnFactorials, LogSum};

/// Repetition code: `N` bits, each repeated `q` times.
#[derive(Debug, Clone)]
pub struct Repetition {
    n: usize,
    q: usize,
    fact: LnFactorials,
}

impl Repetition {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        if n == 0 || q == 0 {
            return Err(invalid!("repetition code needs N >= 1 and q >= 1, got N = {n}, q = {q}"));
        }
        Ok(Repetition { n, q, fact: LnFactorials::new(n) })
    }
}

impl WeightEnumerator for Repetition {
    fn input_len(&self) -> usize {
        self.n
    }
    fn output_len(&self) -> usize {
        self.n * self.q
    }
    fn row(&self, w: usize) -> Vec<f64> {
        let mut row = alloc::vec![f64::NEG_INFINITY; self.n * self.q + 1];
        if w <= self.n {
            row[w * self.q] = self.fact.choose(self.n, w);
        }
        row
    }
}

/// `A_{w,h} = C(N, w)` for `h = qw`.
pub fn rep_iowe(n: usize, q: usize) -> Result<Iowe> {
    if q < 2 {
        return Err(invalid!("repetition factor must be at least 2, got {q}"));
    }
    Ok(tabulate(&Repetition::new(n, q)?))
}

/// Rate-1 accumulator `x_i = x_{i-1} ⊕ u_i`, open-ended.
#[derive(Debug, Clone)]
pub struct Accumulator {
    n: usize,
    fact: LnFactorials,
}

impl Accumulator {
    pub fn new(n: usize) -> Self {
        Accumulator { n, fact: LnFactorials::new(n) }
    }

    /// `log A_{w,h} = log C(n-h, ⌊w/2⌋) + log C(h-1, ⌈w/2⌉-1)`.
    #[inline]
    pub fn entry(&self, w: usize, h: usize) -> f64 {
        acc_entry(&self.fact, self.n, w, h)
    }
}

#[inline]
fn acc_entry(fact: &LnFactorials, n: usize, w: usize, h: usize) -> f64 {
    if w == 0 || h == 0 {
        return if w == 0 && h == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if h > n || w > n {
        return f64::NEG_INFINITY;
    }
    fact.choose(n - h, w / 2) + fact.choose(h - 1, w.div_ceil(2) - 1)
}

impl WeightEnumerator for Accumulator {
    fn input_len(&self) -> usize {
        self.n
    }
    fn output_len(&self) -> usize {
        self.n
    }
    fn row(&self, w: usize) -> Vec<f64> {
        (0..=self.n).map(|h| self.entry(w, h)).collect()
    }
}

pub fn acc_iowe(n: usize) -> Iowe {
    tabulate(&Accumulator::new(n))
}

/// Uncoded transmission of `n` bits.
#[derive(Debug, Clone)]
pub struct Identity {
    n: usize,
    fact: LnFactorials,
}

impl Identity {
    pub fn new(n: usize) -> Self {
        Identity { n, fact: LnFactorials::new(n) }
    }
}

impl WeightEnumerator for Identity {
    fn input_len(&self) -> usize {
        self.n
    }
    fn output_len(&self) -> usize {
        self.n
    }
    fn row(&self, w: usize) -> Vec<f64> {
        let mut row = alloc::vec![f64::NEG_INFINITY; self.n + 1];
        if w <= self.n {
            row[w] = self.fact.choose(self.n, w);
        }
        row
    }
}

pub fn identity_iowe(n: usize) -> Iowe {
    tabulate(&Identity::new(n))
}

/// Accumulator on the first `m` of `n` input bits, identity on the rest.
pub fn partial_precode(n: usize, m: usize) -> Result<Iowe> {
    if m > n {
        return Err(contract!("precoder accumulates {m} of only {n} bits"));
    }
    let fact = LnFactorials::new(n);
    let rest = n - m;
    let mut out = Iowe::empty(n, n);
    for w in 0..=n {
        for h in 0..=n {
            let mut acc = LogSum::new();
            // w1 accumulated input bits, w2 = w - w1 plain bits
            for w1 in w.saturating_sub(rest)..=w.min(m) {
                let w2 = w - w1;
                if w2 > h {
                    continue;
                }
                let h1 = h - w2;
                if h1 > m {
                    continue;
                }
                acc.add(acc_entry(&fact, m, w1, h1) + fact.choose(rest, w2));
            }
            out.set(w, h, acc.value());
        }
    }
    Ok(out)
}

/// Accumulator of length `period · groups` of which only the last bit of each
/// group of `period` consecutive outputs is transmitted.
///
/// The kept bits are the running parities at group ends, so the code factors
/// exactly into per-group parity checks followed by an accumulator of length
/// `groups`:
/// `A_{m,h} = Σ_i Acc_{groups}(i, h) · [x^m] O(x)^i E(x)^{groups-i}`,
/// with `O`, `E` the odd and even parts of `(1+x)^period`.
#[derive(Debug, Clone)]
pub struct PuncturedAccumulator {
    groups: usize,
    period: usize,
    fact: LnFactorials,
    odd_pows: Vec<Vec<f64>>,
    even_pows: Vec<Vec<f64>>,
}

impl PuncturedAccumulator {
    pub fn new(groups: usize, period: usize) -> Result<Self> {
        if groups == 0 || period == 0 {
            return Err(invalid!("punctured accumulator needs groups >= 1 and period >= 1"));
        }
        let small = LnFactorials::new(period);
        let odd: Vec<(usize, f64)> = (1..=period).step_by(2).map(|j| (j, small.choose(period, j))).collect();
        let even: Vec<(usize, f64)> = (0..=period).step_by(2).map(|j| (j, small.choose(period, j))).collect();
        Ok(PuncturedAccumulator {
            groups,
            period,
            fact: LnFactorials::new(groups.max(period)),
            odd_pows: log_poly_powers(&odd, groups),
            even_pows: log_poly_powers(&even, groups),
        })
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// `log [x^m] O(x)^i E(x)^{groups-i}`.
    fn parity_split(&self, m: usize, i: usize) -> f64 {
        let o = &self.odd_pows[i];
        let e = &self.even_pows[self.groups - i];
        let mut acc = LogSum::new();
        let lo = m.saturating_sub(e.len() - 1);
        let hi = m.min(o.len() - 1);
        for a in lo..=hi {
            acc.add(o[a] + e[m - a]);
        }
        acc.value()
    }
}

/// `powers[i]` holds the log-coefficients of `P(x)^i` for `i = 0..=max`.
fn log_poly_powers(terms: &[(usize, f64)], max: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(alloc::vec![0.0]);
    let deg = terms.iter().map(|t| t.0).max().unwrap_or(0);
    for i in 1..=max {
        let prev: &Vec<f64> = &out[i - 1];
        let mut next = alloc::vec![LogSum::new(); prev.len() + deg];
        for (a, &pa) in prev.iter().enumerate() {
            if pa == f64::NEG_INFINITY {
                continue;
            }
            for &(j, c) in terms {
                next[a + j].add(pa + c);
            }
        }
        out.push(next.iter().map(LogSum::value).collect());
    }
    out
}

impl WeightEnumerator for PuncturedAccumulator {
    fn input_len(&self) -> usize {
        self.groups * self.period
    }
    fn output_len(&self) -> usize {
        self.groups
    }
    fn row(&self, m: usize) -> Vec<f64> {
        let k = self.groups;
        let split: Vec<f64> = (0..=k).map(|i| self.parity_split(m, i)).collect();
        (0..=k)
            .map(|h| {
                let mut acc = LogSum::new();
                for (i, &s) in split.iter().enumerate() {
                    if s != f64::NEG_INFINITY {
                        acc.add(s + acc_entry(&self.fact, k, i, h));
                    }
                }
                acc.value()
            })
            .collect()
    }
}

pub(crate) fn tabulate(e: &dyn WeightEnumerator) -> Iowe {
    let (k, n) = (e.input_len(), e.output_len());
    let mut out = Iowe::empty(k, n);
    for w in 0..=k {
        for (h, v) in e.row(w).into_iter().enumerate() {
            out.set(w, h, v);
        }
    }
    out
}
