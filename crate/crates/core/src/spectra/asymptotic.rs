//! Large-block-length spectral exponents of the accumulate-based ensembles,
//! obtained from the exact finite-length sums by the method of types.
//!
//! Exponents are natural logs normalized by the stated length. Every
//! ensemble exponent `r(δ)` is per transmitted symbol.

use alloc::vec::Vec;

use super::{Sampling, SpectralExponent};
use crate::error::{invalid, Result};
use crate::optimize::{brent_max, multistart_max};
use crate::special::entropy_nats;

const TOL: f64 = 1e-11;
const EDGE: f64 = 1e-12;

/// Accumulator exponent `(1-y) H(x / (2(1-y))) + y H(x / (2y))` for input
/// weight `x·n` and output weight `y·n`; `-inf` outside `x <= 2 min(y, 1-y)`.
pub fn acc_exponent(x: f64, y: f64) -> f64 {
    if !(0.0..=1.0 + EDGE).contains(&x) || !(0.0 - EDGE..=1.0 + EDGE).contains(&y) {
        return f64::NEG_INFINITY;
    }
    let y = y.clamp(0.0, 1.0);
    if x > 2.0 * y.min(1.0 - y) + EDGE {
        return f64::NEG_INFINITY;
    }
    let mut v = 0.0;
    if y < 1.0 {
        v += (1.0 - y) * entropy_nats((x / (2.0 * (1.0 - y))).min(1.0));
    }
    if y > 0.0 {
        v += y * entropy_nats((x / (2.0 * y)).min(1.0));
    }
    v
}

/// Odd and even parts of `(1+x)^p` as `(degree, ln coefficient)` lists.
#[derive(Debug, Clone)]
pub struct ParitySplit {
    odd: Vec<(f64, f64)>,
    even: Vec<(f64, f64)>,
}

impl ParitySplit {
    pub fn new(period: usize) -> Result<Self> {
        if period == 0 {
            return Err(invalid!("puncturing period must be at least 1"));
        }
        let lc = |j: usize| crate::special::ln_choose(period as u64, j as u64);
        Ok(ParitySplit {
            odd: (1..=period).step_by(2).map(|j| (j as f64, lc(j))).collect(),
            even: (0..=period).step_by(2).map(|j| (j as f64, lc(j))).collect(),
        })
    }

    /// `lim (1/K) ln [x^{μK}] O(x)^{ιK} E(x)^{(1-ι)K}`.
    pub fn exponent(&self, iota: f64, mu: f64) -> f64 {
        let lo = iota * self.odd[0].0 + (1.0 - iota) * self.even[0].0;
        let top = |t: &[(f64, f64)]| *t.last().unwrap();
        let (odeg, oc) = top(&self.odd);
        let (edeg, ec) = top(&self.even);
        let hi = iota * odeg + (1.0 - iota) * edeg;
        let scale = 1e-10 * hi.max(1.0);
        if mu < lo - scale || mu > hi + scale {
            return f64::NEG_INFINITY;
        }
        if mu <= lo + scale {
            return iota * self.odd[0].1 + (1.0 - iota) * self.even[0].1;
        }
        if mu >= hi - scale {
            return iota * oc + (1.0 - iota) * ec;
        }
        // Saddle point: d/ds [ι ln O(e^s) + (1-ι) ln E(e^s)] = μ, increasing in s.
        let slope = |s: f64| {
            let (_, mo, vo) = tilted(&self.odd, s);
            let (_, me, ve) = tilted(&self.even, s);
            (iota * mo + (1.0 - iota) * me - mu, iota * vo + (1.0 - iota) * ve)
        };
        let (mut a, mut b) = (-1.0, 1.0);
        while slope(a).0 > 0.0 && a > -700.0 {
            a *= 2.0;
        }
        while slope(b).0 < 0.0 && b < 700.0 {
            b *= 2.0;
        }
        let mut s = 0.5 * (a + b);
        for _ in 0..200 {
            let (g, d) = slope(s);
            if g.abs() < 1e-14 * mu.max(1.0) {
                break;
            }
            if g > 0.0 {
                b = s;
            } else {
                a = s;
            }
            let newton = s - g / d;
            s = if d > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a < 1e-15 {
                break;
            }
        }
        let (lo_, _, _) = tilted(&self.odd, s);
        let (le, _, _) = tilted(&self.even, s);
        iota * lo_ + (1.0 - iota) * le - mu * s
    }

    /// Admissible range of the odd-group fraction `ι` for a given `μ`.
    fn iota_range(&self, mu: f64) -> (f64, f64) {
        let (odeg, edeg) = (self.odd.last().unwrap().0, self.even.last().unwrap().0);
        // need ι <= μ (each odd group has weight >= 1) and ι·odeg + (1-ι)·edeg >= μ
        let mut lo: f64 = 0.0;
        let mut hi = mu.min(1.0);
        if odeg > edeg {
            lo = lo.max((mu - edeg) / (odeg - edeg));
        } else if odeg < edeg {
            hi = hi.min((edeg - mu) / (edeg - odeg));
        } else if mu > edeg {
            hi = -1.0;
        }
        (lo, hi)
    }
}

/// `(ln P(e^s), mean, variance)` of the degree under the tilted law.
fn tilted(terms: &[(f64, f64)], s: f64) -> (f64, f64, f64) {
    let m = terms.iter().map(|&(j, c)| c + j * s).fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for &(j, c) in terms {
        let e = libm::exp(c + j * s - m);
        z += e;
        m1 += j * e;
        m2 += j * j * e;
    }
    let mean = m1 / z;
    (m + libm::log(z), mean, (m2 / z - mean * mean).max(0.0))
}

/// Punctured-accumulator exponent per kept bit: input weight `μ·K`, output
/// weight `η·K`, `K` groups of `period` bits.
pub fn punctured_acc_exponent(split: &ParitySplit, mu: f64, eta: f64) -> f64 {
    if !(-EDGE..=1.0 + EDGE).contains(&eta) || mu < -EDGE {
        return f64::NEG_INFINITY;
    }
    let eta = eta.clamp(0.0, 1.0);
    let (mut lo, mut hi) = split.iota_range(mu.max(0.0));
    hi = hi.min(2.0 * eta).min(2.0 * (1.0 - eta));
    lo = lo.max(0.0);
    if hi < lo - EDGE {
        return f64::NEG_INFINITY;
    }
    if hi <= lo + EDGE {
        let t = 0.5 * (lo + hi);
        return split.exponent(t, mu) + acc_exponent(t, eta);
    }
    brent_max(|t| split.exponent(t, mu) + acc_exponent(t, eta), lo, hi, TOL).1
}

/// Asymptotic ensemble families.
#[derive(Debug, Clone)]
pub enum AsymptoticEnsemble {
    /// Non-systematic repeat-accumulate, rate `1/q`.
    Nsra { q: usize },
    /// Systematic RA with every `p`-th accumulator output kept.
    Spra { p: usize, q: usize, split: ParitySplit },
    /// SPRA preceded by an accumulator precoder bypassed by a fraction
    /// `bypass` of the information bits.
    Spara { p: usize, q: usize, bypass: f64, split: ParitySplit },
    /// Binomial spectrum of the random linear ensemble of rate `rate`.
    RandomCoding { rate: f64 },
}

impl AsymptoticEnsemble {
    pub fn nsra(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(invalid!("repetition factor must be at least 2, got {q}"));
        }
        Ok(AsymptoticEnsemble::Nsra { q })
    }

    pub fn spra(p: usize, q: usize) -> Result<Self> {
        if q < 1 {
            return Err(invalid!("repetition factor must be at least 1"));
        }
        Ok(AsymptoticEnsemble::Spra { p, q, split: ParitySplit::new(p)? })
    }

    pub fn spara(p: usize, q: usize, bypass: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&bypass) {
            return Err(invalid!("bypass fraction must lie in [0, 1], got {bypass}"));
        }
        if q < 1 {
            return Err(invalid!("repetition factor must be at least 1"));
        }
        Ok(AsymptoticEnsemble::Spara { p, q, bypass, split: ParitySplit::new(p)? })
    }

    pub fn random_coding(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(invalid!("rate must lie in (0, 1], got {rate}"));
        }
        Ok(AsymptoticEnsemble::RandomCoding { rate })
    }

    pub fn rate(&self) -> f64 {
        match self {
            AsymptoticEnsemble::Nsra { q } => 1.0 / *q as f64,
            AsymptoticEnsemble::Spra { p, q, .. } | AsymptoticEnsemble::Spara { p, q, .. } => {
                1.0 / (1.0 + *q as f64 / *p as f64)
            }
            AsymptoticEnsemble::RandomCoding { rate } => *rate,
        }
    }

    /// `r(δ)` in nats per symbol.
    pub fn exponent(&self, delta: f64) -> f64 {
        if !(delta > 0.0 && delta <= 1.0 + EDGE) {
            return f64::NEG_INFINITY;
        }
        let delta = delta.min(1.0);
        match self {
            AsymptoticEnsemble::Nsra { q } => {
                let c = 1.0 - 1.0 / *q as f64;
                let hi = (2.0 * delta).min(2.0 * (1.0 - delta)).min(1.0);
                if hi <= 0.0 {
                    return acc_exponent(0.0, delta);
                }
                multistart_max(|w| acc_exponent(w, delta) - c * entropy_nats(w), 0.0, hi, 41, TOL).1
            }
            AsymptoticEnsemble::Spra { p, q, split } => spara_exponent(split, *p, *q, 1.0, delta),
            AsymptoticEnsemble::Spara { p, q, bypass, split } => spara_exponent(split, *p, *q, *bypass, delta),
            AsymptoticEnsemble::RandomCoding { rate } => {
                entropy_nats(delta) - (1.0 - rate) * core::f64::consts::LN_2
            }
        }
    }

    /// Samples the exponent on `grid` as a linearly interpolated curve.
    pub fn sample(&self, grid: &[f64]) -> Result<SpectralExponent> {
        let values = grid.iter().map(|&d| self.exponent(d)).collect();
        SpectralExponent::new(grid.to_vec(), values, Sampling::Linear)
    }
}

/// Per-N exponent of the precoder: `b` bypassed ones, `s - b` accumulated
/// input ones, `v - b` accumulated output ones, maximized over `b`.
fn precoder_exponent(fb: f64, v: f64, s: f64) -> f64 {
    let fa = 1.0 - fb;
    if fa <= EDGE {
        return if (v - s).abs() <= 1e-9 { entropy_nats(s) } else { f64::NEG_INFINITY };
    }
    let part = |b: f64| {
        let bypass = if fb > 0.0 { fb * entropy_nats((b / fb).clamp(0.0, 1.0)) } else { 0.0 };
        bypass + fa * acc_exponent(((s - b) / fa).max(0.0), ((v - b) / fa).clamp(0.0, 1.0))
    };
    let lo = 0.0f64.max(s - fa).max(v - fa).max((s + 2.0 * v - 2.0 * fa) / 3.0);
    let hi = fb.min(s).min(v).min(2.0 * v - s);
    if hi < lo - 1e-12 {
        return f64::NEG_INFINITY;
    }
    if hi <= lo + 1e-12 {
        return part(lo.max(0.0));
    }
    brent_max(part, lo, hi, TOL).1
}

/// Systematic, punctured, optionally precoded RA exponent per transmitted bit.
fn spara_exponent(split: &ParitySplit, p: usize, q: usize, bypass: f64, delta: f64) -> f64 {
    let qp = q as f64 / p as f64;
    let (qf, pf) = (q as f64, p as f64);
    let total = (1.0 + qp) * delta;
    let s_lo = (total - qp).max(0.0);
    let s_hi = total.min(1.0);
    if s_hi < s_lo {
        return f64::NEG_INFINITY;
    }
    let inner = |v: f64, s: f64| {
        let eta = ((total - s) / qp).clamp(0.0, 1.0);
        let pre = if bypass >= 1.0 - EDGE {
            if (v - s).abs() <= 1e-9 {
                entropy_nats(s)
            } else {
                f64::NEG_INFINITY
            }
        } else {
            precoder_exponent(bypass, v, s)
        };
        if pre == f64::NEG_INFINITY {
            return pre;
        }
        pre + qp * punctured_acc_exponent(split, pf * v, eta)
    };
    let best = if bypass >= 1.0 - EDGE {
        // no precoder: v = s
        multistart_max(|s| inner(s, s) - qf * entropy_nats(s), s_lo, s_hi, 41, TOL).1
    } else {
        multistart_max(
            |v| {
                let (lo, hi) = precoded_s_range(bypass, v, s_lo, s_hi);
                if hi < lo {
                    return f64::NEG_INFINITY;
                }
                let g = if hi - lo <= 1e-12 { inner(v, lo) } else { brent_max(|s| inner(v, s), lo, hi, TOL).1 };
                g - qf * entropy_nats(v)
            },
            0.0,
            1.0,
            41,
            TOL,
        )
        .1
    };
    best / (1.0 + qp)
}

/// Input weights `s` compatible with precoder output weight `v`.
fn precoded_s_range(fb: f64, v: f64, s_lo: f64, s_hi: f64) -> (f64, f64) {
    let fa = 1.0 - fb;
    // b bypassed ones; accumulated part has output c = v - b and input at most
    // min(fa, 2c, 2(fa - c))
    let b_lo = (v - fa).max(0.0);
    let b_hi = fb.min(v);
    if b_hi < b_lo {
        return (1.0, 0.0);
    }
    let reach = |b: f64| {
        let c = v - b;
        b + fa.min(2.0 * c).min(2.0 * (fa - c)).max(0.0)
    };
    let top = reach(b_lo).max(reach(b_hi)).max(reach((v - 0.5 * fa).clamp(b_lo, b_hi)));
    (s_lo.max(b_lo), s_hi.min(top))
}
