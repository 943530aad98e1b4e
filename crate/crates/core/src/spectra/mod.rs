//! Input–output weight enumerators, distance spectra and spectral exponents.
//!
//! Every count is stored as a natural logarithm; `-inf` marks an empty cell.

pub mod asymptotic;
mod closed;
mod compose;
pub mod ensembles;
pub mod fsm;

use alloc::vec::Vec;

pub use closed::{acc_iowe, identity_iowe, partial_precode, rep_iowe, Accumulator, Identity, PuncturedAccumulator, Repetition};
pub use compose::{puncture_random, systematic_join, turbo_two_branch, uniform_concat};
pub use fsm::{fsm_iowe, Fsm, PunctureMask, Termination, DEFAULT_CELL_BUDGET};

use crate::error::{contract, Result};
use crate::special::{log_sum_exp, LogSum};

/// Anything that can produce rows `w ↦ (log A_{w,h})_h` of a weight enumerator.
pub trait WeightEnumerator {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    /// `log A_{w,h}` for `h = 0..=output_len`.
    fn row(&self, w: usize) -> Vec<f64>;
}

/// Tabulated input–output weight enumerator `log A_{w,h}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Iowe {
    k: usize,
    n: usize,
    table: Vec<f64>,
}

impl Iowe {
    /// All-empty enumerator with input length `k` and output length `n`.
    pub fn empty(k: usize, n: usize) -> Self {
        Iowe { k, n, table: alloc::vec![f64::NEG_INFINITY; (k + 1) * (n + 1)] }
    }

    pub fn from_fn(k: usize, n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::empty(k, n);
        for w in 0..=k {
            for h in 0..=n {
                out.table[w * (n + 1) + h] = f(w, h);
            }
        }
        out
    }

    /// From exact integer counts, `counts[w][h]`.
    pub fn from_counts(counts: &[Vec<u64>]) -> Result<Self> {
        let k = counts.len().checked_sub(1).ok_or_else(|| contract!("empty count table"))?;
        let n = counts[0].len().checked_sub(1).ok_or_else(|| contract!("empty count row"))?;
        if counts.iter().any(|r| r.len() != n + 1) {
            return Err(contract!("ragged count table"));
        }
        Ok(Self::from_fn(k, n, |w, h| ln_count(counts[w][h] as f64)))
    }

    pub fn input_len(&self) -> usize {
        self.k
    }

    pub fn output_len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, w: usize, h: usize) -> f64 {
        self.table[w * (self.n + 1) + h]
    }

    #[inline]
    pub fn set(&mut self, w: usize, h: usize, v: f64) {
        self.table[w * (self.n + 1) + h] = v;
    }

    pub fn row_slice(&self, w: usize) -> &[f64] {
        &self.table[w * (self.n + 1)..(w + 1) * (self.n + 1)]
    }

    /// `log Σ_{w,h} A_{w,h}`.
    pub fn log_total(&self) -> f64 {
        log_sum_exp(&self.table)
    }

    /// `log Σ_h A_{w,h}`.
    pub fn row_log_total(&self, w: usize) -> f64 {
        log_sum_exp(self.row_slice(w))
    }

    /// Largest `|log A - log B|` over cells finite in either table, and whether
    /// the supports agree. Used for relative-error comparisons.
    pub fn max_log_diff(&self, other: &Iowe) -> (f64, bool) {
        if self.k != other.k || self.n != other.n {
            return (f64::INFINITY, false);
        }
        let mut worst: f64 = 0.0;
        let mut same_support = true;
        for (&a, &b) in self.table.iter().zip(&other.table) {
            match (a.is_finite(), b.is_finite()) {
                (true, true) => worst = worst.max((a - b).abs()),
                (false, false) => {}
                _ => same_support = false,
            }
        }
        (worst, same_support)
    }

    /// Cells rounded to integers; panics in debug builds if a count exceeds 2^53.
    pub fn to_counts(&self) -> Vec<Vec<f64>> {
        (0..=self.k)
            .map(|w| (0..=self.n).map(|h| libm::round(libm::exp(self.get(w, h)))).collect())
            .collect()
    }
}

impl WeightEnumerator for Iowe {
    fn input_len(&self) -> usize {
        self.k
    }
    fn output_len(&self) -> usize {
        self.n
    }
    fn row(&self, w: usize) -> Vec<f64> {
        self.row_slice(w).to_vec()
    }
}

#[inline]
pub(crate) fn ln_count(c: f64) -> f64 {
    if c > 0.0 {
        libm::log(c)
    } else {
        f64::NEG_INFINITY
    }
}

/// How codeword multiplicities are weighted when marginalizing over input weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// `A_h = Σ_w A_{w,h}`: bounds on block (word) error probability.
    Block,
    /// `A_h = Σ_w (w/K) A_{w,h}`: bounds on information-bit error probability.
    Bit,
}

/// Distance spectrum `log A_h`, `h = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSpectrum {
    n: usize,
    k: usize,
    weighting: Weighting,
    log_a: Vec<f64>,
}

impl DistanceSpectrum {
    pub fn new(n: usize, k: usize, weighting: Weighting, log_a: Vec<f64>) -> Result<Self> {
        if log_a.len() != n + 1 {
            return Err(contract!("spectrum of length {} for block length {n}", log_a.len()));
        }
        if log_a.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(contract!("spectrum entries must be finite or -inf"));
        }
        Ok(DistanceSpectrum { n, k, weighting, log_a })
    }

    /// Spectrum of an explicit list of codeword weights (block weighting).
    pub fn from_weights(n: usize, k: usize, weights: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut counts = alloc::vec![0u64; n + 1];
        for h in weights {
            if h > n {
                return Err(contract!("codeword weight {h} exceeds length {n}"));
            }
            counts[h] += 1;
        }
        Self::new(n, k, Weighting::Block, counts.iter().map(|&c| ln_count(c as f64)).collect())
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn info_length(&self) -> usize {
        self.k
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn log_a(&self) -> &[f64] {
        &self.log_a
    }

    #[inline]
    pub fn get(&self, h: usize) -> f64 {
        self.log_a[h]
    }

    /// Smallest `h >= 1` with nonzero multiplicity.
    pub fn min_distance(&self) -> Option<usize> {
        (1..=self.n).find(|&h| self.log_a[h].is_finite())
    }
}

/// Marginalizes an enumerator over input weight.
pub fn to_distance(iowe: &Iowe, weighting: Weighting) -> DistanceSpectrum {
    let (k, n) = (iowe.input_len(), iowe.output_len());
    let mut acc = alloc::vec![LogSum::new(); n + 1];
    for w in 0..=k {
        let shift = match weighting {
            Weighting::Block => 0.0,
            Weighting::Bit if w == 0 || k == 0 => continue,
            Weighting::Bit => libm::log(w as f64 / k as f64),
        };
        for (h, slot) in acc.iter_mut().enumerate() {
            slot.add(iowe.get(w, h) + shift);
        }
    }
    DistanceSpectrum { n, k, weighting, log_a: acc.iter().map(LogSum::value).collect() }
}

/// How a sampled exponent is read between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Finite-length spectrum: `r(δ) = log A_{⌈δn⌉}/n`.
    Ceil,
    /// Smooth curve: linear interpolation between samples.
    Linear,
}

/// Samples `(δ_i, r_i)` of the normalized log-multiplicity, natural log per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralExponent {
    deltas: Vec<f64>,
    values: Vec<f64>,
    sampling: Sampling,
}

impl SpectralExponent {
    pub fn new(deltas: Vec<f64>, values: Vec<f64>, sampling: Sampling) -> Result<Self> {
        if deltas.is_empty() || deltas.len() != values.len() {
            return Err(contract!("exponent needs matching, nonempty δ and r samples"));
        }
        if deltas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(contract!("δ grid must be strictly increasing"));
        }
        if deltas[0] <= 0.0 || *deltas.last().unwrap() > 1.0 + 1e-12 {
            return Err(contract!("δ samples must lie in (0, 1]"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(contract!("exponent samples contain NaN"));
        }
        Ok(SpectralExponent { deltas, values, sampling })
    }

    /// Samples `f` on `grid` (linear interpolation between samples).
    pub fn from_fn(grid: &[f64], f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = grid.iter().copied().map(f).collect();
        Self::new(grid.to_vec(), values, Sampling::Linear)
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    /// Smallest and largest δ covered.
    pub fn coverage(&self) -> (f64, f64) {
        (self.deltas[0], *self.deltas.last().unwrap())
    }

    /// `r(δ)`, or `None` outside the sampled range.
    pub fn at(&self, delta: f64) -> Option<f64> {
        let (lo, hi) = self.coverage();
        let slack = 1e-12;
        if delta < lo - slack || delta > hi + slack {
            return None;
        }
        let idx = self.deltas.partition_point(|&d| d < delta - slack);
        let idx = idx.min(self.deltas.len() - 1);
        match self.sampling {
            Sampling::Ceil => Some(self.values[idx]),
            Sampling::Linear => {
                if idx == 0 || (self.deltas[idx] - delta).abs() <= slack {
                    return Some(self.values[idx]);
                }
                let (d0, d1) = (self.deltas[idx - 1], self.deltas[idx]);
                let (r0, r1) = (self.values[idx - 1], self.values[idx]);
                if !r0.is_finite() || !r1.is_finite() {
                    // Empty weight classes stay empty rather than being interpolated.
                    return Some(if (delta - d0) < (d1 - delta) { r0 } else { r1 });
                }
                let t = (delta - d0) / (d1 - d0);
                Some(r0 + t * (r1 - r0))
            }
        }
    }

    /// Richardson-style extrapolation `2 r_fine - r_coarse` from spectra at block
    /// lengths `n` and `2n`, sampled on `grid`. Where the two curves differ by
    /// more than `unstable`, the finer curve is kept unchanged. Returns the
    /// extrapolated curve and the largest `|r_fine - r_coarse|` seen.
    pub fn richardson(coarse: &Self, fine: &Self, grid: &[f64], unstable: f64) -> Result<(Self, f64)> {
        let mut values = Vec::with_capacity(grid.len());
        let mut residual: f64 = 0.0;
        for &d in grid {
            let (rc, rf) = match (coarse.at(d), fine.at(d)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(contract!("extrapolation grid point δ = {d} outside spectrum coverage")),
            };
            if rc.is_finite() && rf.is_finite() {
                let diff = (rf - rc).abs();
                residual = residual.max(diff);
                values.push(if diff > unstable { rf } else { 2.0 * rf - rc });
            } else {
                values.push(rf);
            }
        }
        Ok((Self::new(grid.to_vec(), values, Sampling::Linear)?, residual))
    }
}

/// `r_i = log A_{h_i} / n` at `δ_i = h_i/n`, `h = 1..=n`.
pub fn exponent_of(spectrum: &DistanceSpectrum) -> SpectralExponent {
    let n = spectrum.block_length();
    let deltas = (1..=n).map(|h| h as f64 / n as f64).collect();
    let values = (1..=n).map(|h| spectrum.get(h) / n as f64).collect();
    SpectralExponent { deltas, values, sampling: Sampling::Ceil }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_choose;

    #[test]
    fn universe_code_exponent_approaches_ln2() {
        let n = 1000;
        let spec =
            DistanceSpectrum::new(n, n, Weighting::Block, (0..=n).map(|h| ln_choose(n as u64, h as u64)).collect())
                .unwrap();
        let r = exponent_of(&spec);
        assert!((r.at(0.5).unwrap() - core::f64::consts::LN_2).abs() < 2e-2);
    }

    #[test]
    fn single_codeword_exponent() {
        let spec = DistanceSpectrum::from_weights(4, 1, [0, 3]).unwrap();
        let r = exponent_of(&spec);
        assert_eq!(r.at(0.75).unwrap(), 0.0);
        assert_eq!(r.at(0.5).unwrap(), f64::NEG_INFINITY);
        assert_eq!(r.at(1.0).unwrap(), f64::NEG_INFINITY);
        // ⌈δn⌉ sampling
        assert_eq!(r.at(0.6).unwrap(), 0.0);
    }

    #[test]
    fn bit_weighting_with_full_input_weight_equals_block() {
        let mut iowe = Iowe::empty(3, 5);
        iowe.set(0, 0, 0.0);
        iowe.set(3, 4, libm::log(2.0));
        iowe.set(3, 5, 0.0);
        let block = to_distance(&iowe, Weighting::Block);
        let bit = to_distance(&iowe, Weighting::Bit);
        for h in 1..=5 {
            assert_eq!(block.get(h), bit.get(h));
        }
        assert_eq!(block.get(0), 0.0);
    }

    #[test]
    fn bit_entries_never_exceed_block_entries() {
        let iowe = acc_iowe(9);
        let block = to_distance(&iowe, Weighting::Block);
        let bit = to_distance(&iowe, Weighting::Bit);
        for h in 0..=9 {
            assert!(bit.get(h) <= block.get(h) + 1e-12);
        }
    }

    #[test]
    fn exponent_validation() {
        assert!(SpectralExponent::new(alloc::vec![0.2, 0.1], alloc::vec![0.0, 0.0], Sampling::Linear).is_err());
        assert!(SpectralExponent::new(alloc::vec![0.0, 0.1], alloc::vec![0.0, 0.0], Sampling::Linear).is_err());
        let e = SpectralExponent::new(alloc::vec![0.1, 0.3], alloc::vec![0.0, 0.2], Sampling::Linear).unwrap();
        assert!((e.at(0.2).unwrap() - 0.1).abs() < 1e-15);
        assert!(e.at(0.05).is_none());
    }

    #[test]
    fn richardson_removes_first_order_term() {
        let grid = [0.1, 0.2, 0.5];
        let f = |d: f64, n: f64| d * d + 3.0 * d / n;
        let coarse = SpectralExponent::from_fn(&grid, |d| f(d, 100.0)).unwrap();
        let fine = SpectralExponent::from_fn(&grid, |d| f(d, 200.0)).unwrap();
        let (ext, res) = SpectralExponent::richardson(&coarse, &fine, &grid, 1.0).unwrap();
        for (&d, &v) in grid.iter().zip(ext.values()) {
            assert!((v - d * d).abs() < 1e-12);
        }
        assert!(res > 0.0);
    }
}
