//! Log-domain combinatorics and entropy helpers.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Natural log of `n choose k`.
///
/// Small `min(k, n - k)` is summed term by term; everything else goes through
/// `lgamma`. Both paths are accurate to ~1e-13 relative for `n <= 10^4`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(alloc::format!("log_binomial: k = {k} exceeds n = {n}")));
    }
    Ok(ln_choose(n, k))
}

/// Infallible variant used in hot loops: returns `-inf` when `k > n`.
#[inline]
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k <= 32 {
        let mut acc = 0.0;
        for i in 1..=k {
            acc += libm::log((n - k + i) as f64 / i as f64);
        }
        return acc;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Table of `ln m!` for `m <= max`, for repeated binomials of one size class.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        for m in 1..=max {
            table.push(libm::lgamma(m as f64 + 1.0));
        }
        // lgamma is exact enough at small arguments, but keep 0! and 1! exact
        if max >= 1 {
            table[1] = 0.0;
        }
        LnFactorials { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_fact(&self, m: usize) -> f64 {
        self.table[m]
    }

    /// `ln C(n, k)`, `-inf` outside `0 <= k <= n`.
    #[inline]
    pub fn choose(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        let k = k.min(n - k);
        if k <= 32 {
            return ln_choose(n as u64, k as u64);
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }

    /// Signed-index convenience: `-inf` when either argument is negative.
    #[inline]
    pub fn choose_i(&self, n: i64, k: i64) -> f64 {
        if n < 0 || k < 0 || k > n {
            return f64::NEG_INFINITY;
        }
        self.choose(n as usize, k as usize)
    }
}

/// `ln(e^a + e^b)` with correct handling of infinities.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// `ln Σ e^{x_i}`; `-inf` for an empty slice or all `-inf` entries.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let mut sum = 0.0;
    for &v in values {
        sum += libm::exp(v - max);
    }
    max + libm::log(sum)
}

/// Streaming log-sum-exp accumulator that rescales when a larger term shows up.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum { max: f64::NEG_INFINITY, sum: 0.0 }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x == f64::INFINITY {
            self.max = f64::INFINITY;
            self.sum = 1.0;
            return;
        }
        if self.max == f64::INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += libm::exp(x - self.max);
        } else {
            self.sum = self.sum * libm::exp(self.max - x) + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY || self.max == f64::INFINITY {
            return self.max;
        }
        self.max + libm::log(self.sum)
    }
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy_bits(p: f64) -> f64 {
    entropy_nats(p) / LN_2
}

/// Binary entropy in nats, with `H(0) = H(1) = 0`.
#[inline]
pub fn entropy_nats(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * libm::log(p) - (1.0 - p) * libm::log1p(-p)
}

/// `x ln x` with the continuous extension at zero.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * libm::log(x)
    }
}
