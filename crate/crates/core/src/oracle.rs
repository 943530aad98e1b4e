//! Ground truth for the bounds and spectra: exhaustive enumeration of small
//! encoders and interleavers, and Monte-Carlo ML decoding over parallel
//! channels.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{MbiosChannel, ParallelChannelSet};
use crate::error::{contract, invalid, Error, Result};
use crate::special::LnFactorials;
use crate::spectra::{DistanceSpectrum, Iowe, Weighting};

/// Largest input length enumerated by [`exhaustive_iowe`].
pub const MAX_EXHAUSTIVE_INPUT: usize = 16;
/// Largest interleaver length enumerated by the permutation averages.
pub const MAX_EXHAUSTIVE_PERMUTATION: usize = 7;
/// Largest code size accepted by [`ExplicitCode`].
pub const MAX_CODEWORDS: usize = 1 << 16;

fn weight(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b != 0).count()
}

fn bits_of(u: u32, k: usize) -> Vec<u8> {
    (0..k).map(|i| ((u >> i) & 1) as u8).collect()
}

/// Exact IOWE of `encode` by running all `2^k` inputs.
pub fn exhaustive_iowe(k: usize, n: usize, encode: impl Fn(&[u8]) -> Result<Vec<u8>>) -> Result<Iowe> {
    if k > MAX_EXHAUSTIVE_INPUT {
        return Err(Error::Resource {
            what: alloc::format!("exhaustive enumeration of {k} input bits"),
            required: 1u128 << k,
            budget: 1u128 << MAX_EXHAUSTIVE_INPUT,
        });
    }
    let mut counts = alloc::vec![alloc::vec![0u64; n + 1]; k + 1];
    for u in 0..(1u32 << k) {
        let x = bits_of(u, k);
        let c = encode(&x)?;
        if c.len() != n {
            return Err(contract!("encoder produced {} bits, expected {n}", c.len()));
        }
        counts[weight(&x)][weight(&c)] += 1;
    }
    Iowe::from_counts(&counts)
}

/// Exact average IOWE over all `m!` permutations `π`, where `encode(u, π)`
/// produces the codeword for input `u` under interleaver `π`.
pub fn exhaustive_permutation_average(
    k: usize,
    m: usize,
    n: usize,
    encode: impl Fn(&[u8], &[usize]) -> Result<Vec<u8>>,
) -> Result<Iowe> {
    if m > MAX_EXHAUSTIVE_PERMUTATION {
        return Err(Error::Resource {
            what: alloc::format!("enumeration of all permutations of {m} positions"),
            required: (1..=m as u128).product(),
            budget: (1..=MAX_EXHAUSTIVE_PERMUTATION as u128).product(),
        });
    }
    if k > MAX_EXHAUSTIVE_INPUT {
        return Err(Error::Resource {
            what: alloc::format!("exhaustive enumeration of {k} input bits"),
            required: 1u128 << k,
            budget: 1u128 << MAX_EXHAUSTIVE_INPUT,
        });
    }
    let mut counts = alloc::vec![alloc::vec![0u64; n + 1]; k + 1];
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        for u in 0..(1u32 << k) {
            let x = bits_of(u, k);
            let c = encode(&x, &perm)?;
            if c.len() != n {
                return Err(contract!("encoder produced {} bits, expected {n}", c.len()));
            }
            counts[weight(&x)][weight(&c)] += 1;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let ln_perms = LnFactorials::new(m).ln_fact(m);
    Ok(Iowe::from_fn(k, n, |w, h| {
        let c = counts[w][h];
        if c == 0 {
            f64::NEG_INFINITY
        } else {
            libm::log(c as f64) - ln_perms
        }
    }))
}

/// Serial concatenation `inner(π(outer(u)))` averaged over all interleavers
/// of the `m` middle bits.
pub fn exhaustive_interleaver_average(
    k: usize,
    m: usize,
    n: usize,
    outer: impl Fn(&[u8]) -> Result<Vec<u8>>,
    inner: impl Fn(&[u8]) -> Result<Vec<u8>>,
) -> Result<Iowe> {
    exhaustive_permutation_average(k, m, n, |u, perm| {
        let v = outer(u)?;
        if v.len() != m {
            return Err(contract!("outer encoder produced {} bits, expected {m}", v.len()));
        }
        let permuted: Vec<u8> = perm.iter().map(|&i| v[i]).collect();
        inner(&permuted)
    })
}

/// `u ∥ branch(u) ∥ branch(π(u))` averaged over all interleavers of the `k`
/// information bits.
pub fn exhaustive_turbo_average(k: usize, n_branch: usize, branch: impl Fn(&[u8]) -> Result<Vec<u8>>) -> Result<Iowe> {
    exhaustive_permutation_average(k, k, k + 2 * n_branch, |u, perm| {
        let mut c = u.to_vec();
        c.extend(branch(u)?);
        let permuted: Vec<u8> = perm.iter().map(|&i| u[i]).collect();
        c.extend(branch(&permuted)?);
        Ok(c)
    })
}

/// Lexicographic successor; false after the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// A block code given by its codewords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitCode {
    n: usize,
    words: Vec<Vec<u8>>,
}

impl ExplicitCode {
    pub fn new(words: Vec<Vec<u8>>) -> Result<Self> {
        if words.is_empty() {
            return Err(invalid!("a code needs at least one codeword"));
        }
        if words.len() > MAX_CODEWORDS {
            return Err(Error::Resource {
                what: alloc::string::String::from("explicit code size"),
                required: words.len() as u128,
                budget: MAX_CODEWORDS as u128,
            });
        }
        let n = words[0].len();
        if n == 0 {
            return Err(invalid!("codewords must be nonempty"));
        }
        for (i, w) in words.iter().enumerate() {
            if w.len() != n {
                return Err(invalid!("codeword {i} has length {}, expected {n}", w.len()));
            }
            if w.iter().any(|&b| b > 1) {
                return Err(invalid!("codeword {i} has a symbol other than 0 or 1"));
            }
        }
        if !words.iter().any(|w| w.iter().all(|&b| b == 0)) {
            return Err(invalid!("the code must contain the all-zero word"));
        }
        Ok(ExplicitCode { n, words })
    }

    /// All `2^k` combinations of the generator rows.
    pub fn from_generator(rows: &[Vec<u8>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 || k > 16 {
            return Err(invalid!("generator needs 1..=16 rows, got {k}"));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid!("generator rows differ in length"));
        }
        let words = (0..(1u32 << k))
            .map(|u| {
                let mut c = alloc::vec![0u8; n];
                for (i, row) in rows.iter().enumerate() {
                    if (u >> i) & 1 == 1 {
                        for (cb, &rb) in c.iter_mut().zip(row) {
                            *cb ^= rb & 1;
                        }
                    }
                }
                c
            })
            .collect();
        Self::new(words)
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn codewords(&self) -> &[Vec<u8>] {
        &self.words
    }

    /// `log2 M`.
    pub fn info_bits(&self) -> f64 {
        libm::log2(self.words.len() as f64)
    }

    pub fn rate(&self) -> f64 {
        self.info_bits() / self.n as f64
    }

    /// Closed under bitwise addition.
    pub fn is_linear(&self) -> bool {
        let mut sorted = self.words.clone();
        sorted.sort();
        for a in &self.words {
            for b in &self.words {
                let s: Vec<u8> = a.iter().zip(b).map(|(x, y)| x ^ y).collect();
                if sorted.binary_search(&s).is_err() {
                    return false;
                }
            }
        }
        true
    }

    /// Weight distribution of the codewords, block weighting.
    pub fn spectrum(&self) -> Result<DistanceSpectrum> {
        let mut counts = alloc::vec![0u64; self.n + 1];
        for w in &self.words {
            counts[weight(w)] += 1;
        }
        let log_a = counts.iter().map(|&c| if c == 0 { f64::NEG_INFINITY } else { libm::log(c as f64) }).collect();
        DistanceSpectrum::new(self.n, libm::round(self.info_bits()) as usize, Weighting::Block, log_a)
    }
}

/// How code positions are mapped to channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assignment {
    /// Position `i` always goes through channel `map[i]`.
    Fixed(Vec<usize>),
    /// Each position independently picks channel `j` with probability `α_j`
    /// in every trial.
    Random,
}

/// Block-error counts with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlTrialResult {
    pub trials: u64,
    pub errors: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl MlTrialResult {
    pub fn from_counts(trials: u64, errors: u64) -> Self {
        const Z: f64 = 1.959_964;
        if trials == 0 {
            return MlTrialResult { trials, errors, estimate: 0.0, ci_lo: 0.0, ci_hi: 1.0 };
        }
        let t = trials as f64;
        let p = errors as f64 / t;
        let z2 = Z * Z;
        let den = 1.0 + z2 / t;
        let centre = (p + z2 / (2.0 * t)) / den;
        let half = Z * libm::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t)) / den;
        let ci_lo = (centre - half).max(0.0).min(p);
        let ci_hi = (centre + half).min(1.0).max(p);
        MlTrialResult { trials, errors, estimate: p, ci_lo, ci_hi }
    }

    /// Binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        libm::sqrt(self.estimate * (1.0 - self.estimate) / self.trials as f64)
    }
}

/// Reusable per-code state for ML trials.
#[derive(Debug, Clone)]
pub struct MlSimulator {
    code: ExplicitCode,
    channels: Vec<Sampler>,
    cum_alphas: Vec<f64>,
    assignment: Assignment,
    seed: u64,
}

#[derive(Debug, Clone)]
enum Sampler {
    Bsc(f64),
    Bec(f64),
    Awgn(f64),
    /// Output log-probabilities `(ln P(y|0), ln P(y|1))` and cumulative
    /// `P(y|0)` for sampling; `P(y|1)` samples through the mirror map.
    Table { ln: Vec<(f64, f64)>, cum0: Vec<f64>, mirror: Vec<usize> },
}

impl Sampler {
    fn new(ch: &MbiosChannel) -> Self {
        match ch {
            MbiosChannel::Bsc { p } => Sampler::Bsc(*p),
            MbiosChannel::Bec { eps } => Sampler::Bec(*eps),
            MbiosChannel::BiAwgn { esno } => Sampler::Awgn(libm::sqrt(2.0 * esno)),
            MbiosChannel::Tabulated(t) => {
                let mut acc = 0.0;
                let mut cum0 = Vec::with_capacity(t.len());
                let mut ln = Vec::with_capacity(t.len());
                for e in t.entries() {
                    acc += e.weight * e.p0;
                    cum0.push(acc);
                    ln.push((e.ln_w + e.ln_p0, e.ln_w + e.ln_p1));
                }
                Sampler::Table { ln, cum0, mirror: t.mirror().to_vec() }
            }
        }
    }

    /// Draws an output for input `x` and returns `(ln p(y|0), ln p(y|1))`
    /// up to a common additive constant.
    fn draw(&self, x: u8, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match *self {
            Sampler::Bsc(p) => {
                let flip = rng.random::<f64>() < p;
                let y = x ^ flip as u8;
                let (good, bad) = (libm::log(1.0 - p), libm::log(p));
                if y == 0 {
                    (good, bad)
                } else {
                    (bad, good)
                }
            }
            Sampler::Bec(eps) => {
                if rng.random::<f64>() < eps {
                    (0.0, 0.0)
                } else if x == 0 {
                    (0.0, f64::NEG_INFINITY)
                } else {
                    (f64::NEG_INFINITY, 0.0)
                }
            }
            Sampler::Awgn(m) => {
                let noise: f64 = rng.sample(StandardNormal);
                let y = if x == 0 { m } else { -m } + noise;
                let (d0, d1) = (y - m, y + m);
                (-0.5 * d0 * d0, -0.5 * d1 * d1)
            }
            Sampler::Table { ref ln, ref cum0, ref mirror } => {
                let u = rng.random::<f64>() * cum0.last().copied().unwrap_or(1.0);
                let mut i = cum0.partition_point(|&c| c <= u).min(cum0.len() - 1);
                if x == 1 {
                    i = mirror[i];
                }
                ln[i]
            }
        }
    }
}

impl MlSimulator {
    pub fn new(code: ExplicitCode, set: &ParallelChannelSet, assignment: Assignment, seed: u64) -> Result<Self> {
        if let Assignment::Fixed(map) = &assignment {
            if map.len() != code.block_length() {
                return Err(contract!("channel map has {} entries for block length {}", map.len(), code.block_length()));
            }
            if let Some(&j) = map.iter().find(|&&j| j >= set.len()) {
                return Err(contract!("channel map refers to channel {j} of {}", set.len()));
            }
        }
        let mut acc = 0.0;
        let cum_alphas = set
            .alphas()
            .iter()
            .map(|&a| {
                acc += a;
                acc
            })
            .collect();
        Ok(MlSimulator {
            code,
            channels: set.channels().iter().map(Sampler::new).collect(),
            cum_alphas,
            assignment,
            seed,
        })
    }

    /// One trial; true on a block error. The outcome depends only on
    /// `(seed, trial)`.
    pub fn trial(&self, trial: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        let words = self.code.codewords();
        let sent = rng.random_range(0..words.len());
        let x = &words[sent];
        let n = x.len();
        let mut lp = Vec::with_capacity(n);
        for (i, &xi) in x.iter().enumerate() {
            let j = match &self.assignment {
                Assignment::Fixed(map) => map[i],
                Assignment::Random => {
                    let u = rng.random::<f64>() * self.cum_alphas[self.cum_alphas.len() - 1];
                    self.cum_alphas.partition_point(|&c| c <= u).min(self.cum_alphas.len() - 1)
                }
            };
            lp.push(self.channels[j].draw(xi, &mut rng));
        }
        let mut best = f64::NEG_INFINITY;
        let mut ties = 0u32;
        let mut chosen = usize::MAX;
        for (ci, c) in words.iter().enumerate() {
            let mut score = 0.0;
            for (&b, &(l0, l1)) in c.iter().zip(&lp) {
                score += if b == 0 { l0 } else { l1 };
            }
            if score > best {
                best = score;
                ties = 1;
                chosen = ci;
            } else if score == best {
                // reservoir choice among equal maxima
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    chosen = ci;
                }
            }
        }
        chosen != sent
    }

    /// Errors over trials `range`.
    pub fn count(&self, range: core::ops::Range<u64>) -> u64 {
        range.filter(|&t| self.trial(t)).count() as u64
    }
}

/// Monte-Carlo ML block-error estimate over trials `0..trials`.
pub fn ml_montecarlo(
    code: &ExplicitCode,
    set: &ParallelChannelSet,
    assignment: Assignment,
    trials: u64,
    seed: u64,
) -> Result<MlTrialResult> {
    let sim = MlSimulator::new(code.clone(), set, assignment, seed)?;
    Ok(MlTrialResult::from_counts(trials, sim.count(0..trials)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_enumerated() {
        let mut p = alloc::vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn wilson_contains_estimate() {
        for (t, e) in [(10, 0), (10, 10), (1000, 37), (7, 3)] {
            let r = MlTrialResult::from_counts(t, e);
            assert!(r.ci_lo <= r.estimate && r.estimate <= r.ci_hi);
        }
    }

    #[test]
    fn generator_span() {
        let c = ExplicitCode::from_generator(&[alloc::vec![1, 1, 0], alloc::vec![0, 1, 1]]).unwrap();
        assert_eq!(c.size(), 4);
        assert!(c.is_linear());
        let bad = ExplicitCode::new(alloc::vec![alloc::vec![0, 0], alloc::vec![1, 0], alloc::vec![0, 1]]).unwrap();
        assert!(!bad.is_linear());
        assert!(ExplicitCode::new(alloc::vec![alloc::vec![1, 1]]).is_err());
    }

    #[test]
    fn too_large_enumerations_are_refused() {
        assert_eq!(exhaustive_iowe(17, 17, |u| Ok(u.to_vec())).unwrap_err().code(), "E_RESOURCE");
        assert_eq!(exhaustive_interleaver_average(1, 8, 8, |_| Ok(alloc::vec![0; 8]), |v| Ok(v.to_vec())).unwrap_err().code(), "E_RESOURCE");
    }
}
