//! The 1961 Gallager bound for parallel channels.
//!
//! Parameters are `(ρ, s, c)` with `r = s(1 - 1/ρ)`. For a tilting function
//! `f(·;j)`
//!
//! * `G(r;j) = Σ_y p0^{1-r} f^r`
//! * `Z(r;j) = Σ_y (p0 p1)^{(1-r)/2} f^r`
//!
//! and the whole-code bound is
//! `2^{h(ρ)} {Σ_h A_h [ΣαZ(r)]^h [ΣαG(r)]^{n-h}}^ρ [ΣαG(s)]^{n(1-ρ)}`.
//!
//! The optimized tilting function is
//! `f = {[(1-c)(p0^a - p1^a)^2 + 2c (p0 p1)^a] / (p0^{1-s} + p1^{1-s})}^{ρ/s}`
//! with `a = (1-r)/2`. Since `r ρ/s = ρ - 1`, `f^r` and `f^s` are powers of the
//! braced quantity with exponents `ρ - 1` and `ρ` respectively.
//!
//! Outputs where the density entering a sum vanishes are left out of that sum.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::channel::{DensityTable, ParallelDensities};
use crate::error::{contract, invalid, Result};
use crate::optimize::{minimize_coordinate, GridN};
use crate::special::{binary_entropy_bits, LogSum};
use crate::spectra::DistanceSpectrum;

/// `ρ ∈ (0, 1]`, `s > 0`, `c ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G61Params {
    pub rho: f64,
    pub s: f64,
    pub c: f64,
}

impl G61Params {
    pub fn new(rho: f64, s: f64, c: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid!("ρ must lie in (0, 1], got {rho}"));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(invalid!("s must be positive and finite, got {s}"));
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(invalid!("c must lie in [0, 1], got {c}"));
        }
        Ok(G61Params { rho, s, c })
    }

    /// `r = s (1 - 1/ρ) ≤ 0`.
    pub fn r(&self) -> f64 {
        self.s * (1.0 - 1.0 / self.rho)
    }
}

/// Per-channel tilting tables on the density-table outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltingFunction {
    tables: Vec<Vec<f64>>,
}

impl TiltingFunction {
    /// Checks sizes, nonnegativity and evenness under each table's mirror map.
    pub fn new(dens: &ParallelDensities, tables: Vec<Vec<f64>>) -> Result<Self> {
        if tables.len() != dens.len() {
            return Err(contract!("{} tilting tables for {} channels", tables.len(), dens.len()));
        }
        for (j, (t, f)) in dens.tables().iter().zip(&tables).enumerate() {
            if f.len() != t.len() {
                return Err(contract!("tilting table {j} has {} entries, channel has {}", f.len(), t.len()));
            }
            if f.iter().any(|&v| !(v >= 0.0)) {
                return Err(contract!("tilting table {j} has negative or NaN entries"));
            }
            for (i, &m) in t.mirror().iter().enumerate() {
                let (a, b) = (f[i], f[m]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                    return Err(contract!("tilting table {j} is not even at output {i}"));
                }
            }
        }
        Ok(TiltingFunction { tables })
    }

    /// `f ≡ 1`.
    pub fn ones(dens: &ParallelDensities) -> Self {
        TiltingFunction { tables: dens.tables().iter().map(|t| alloc::vec![1.0; t.len()]).collect() }
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }
}

/// Natural logs of `G(r;j)`, `Z(r;j)`, `G(s;j)` and their `α`-mixtures.
#[derive(Debug, Clone, PartialEq)]
pub struct GzEval {
    pub ln_g_r: Vec<f64>,
    pub ln_z_r: Vec<f64>,
    pub ln_g_s: Vec<f64>,
    pub ln_mix_g_r: f64,
    pub ln_mix_z_r: f64,
    pub ln_mix_g_s: f64,
}

/// `x ln v` with `0^0 = 1` and `0^{x<0} = +∞`.
#[inline]
fn pow_ln(ln_v: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if ln_v == f64::NEG_INFINITY {
        if x > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        x * ln_v
    }
}

#[inline]
fn ln0(x: f64) -> f64 {
    if x > 0.0 {
        libm::log(x)
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln` of the braced quantity of the optimized `f` at one output.
fn ln_braced(ln_p0: f64, ln_p1: f64, p: G61Params) -> f64 {
    let a = 0.5 * (1.0 - p.r());
    // ln (p0^a - p1^a)^2, computed from the larger term
    let (hi, lo) = if ln_p0 >= ln_p1 { (ln_p0, ln_p1) } else { (ln_p1, ln_p0) };
    let diff = if hi == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        let t = -libm::expm1(a * (lo - hi));
        2.0 * (a * hi + ln0(t))
    };
    let mut num = LogSum::new();
    if p.c < 1.0 {
        num.add(ln0(1.0 - p.c) + diff);
    }
    if p.c > 0.0 && ln_p0 > f64::NEG_INFINITY && ln_p1 > f64::NEG_INFINITY {
        num.add(libm::log(2.0 * p.c) + a * (ln_p0 + ln_p1));
    }
    let mut den = LogSum::new();
    den.add(pow_ln(ln_p0, 1.0 - p.s));
    den.add(pow_ln(ln_p1, 1.0 - p.s));
    num.value() - den.value()
}

/// The optimized tilting function of one channel.
pub fn optimized_f(table: &DensityTable, params: G61Params) -> Result<Vec<f64>> {
    G61Params::new(params.rho, params.s, params.c)?;
    let e = params.rho / params.s;
    Ok(table.entries().iter().map(|en| libm::exp(e * ln_braced(en.ln_p0, en.ln_p1, params))).collect())
}

/// [`optimized_f`] for every channel of the set.
pub fn optimized_tilting(dens: &ParallelDensities, params: G61Params) -> Result<TiltingFunction> {
    let tables = dens.tables().iter().map(|t| optimized_f(t, params)).collect::<Result<Vec<_>>>()?;
    Ok(TiltingFunction { tables })
}

#[derive(Debug, Clone)]
struct Prepared {
    /// `(ln w, ln p0, ln p1)` of outputs with positive weight.
    entries: Vec<(f64, f64, f64)>,
}

/// Channel data preprocessed for repeated evaluations.
#[derive(Debug, Clone)]
pub struct G61Context {
    chans: Vec<Prepared>,
    ln_alphas: Vec<f64>,
    ln_mixed_gamma: f64,
}

impl G61Context {
    pub fn new(dens: &ParallelDensities) -> Self {
        let chans = dens
            .tables()
            .iter()
            .map(|t| Prepared {
                entries: t.entries().iter().filter(|e| e.weight > 0.0).map(|e| (e.ln_w, e.ln_p0, e.ln_p1)).collect(),
            })
            .collect();
        G61Context {
            chans,
            ln_alphas: dens.alphas().iter().map(|&a| ln0(a)).collect(),
            ln_mixed_gamma: ln0(dens.mixed_bhattacharyya()),
        }
    }

    fn mix(&self, v: &[f64]) -> f64 {
        let mut acc = LogSum::new();
        for (x, la) in v.iter().zip(&self.ln_alphas) {
            acc.add(x + la);
        }
        acc.value()
    }

    fn finish(&self, ln_g_r: Vec<f64>, ln_z_r: Vec<f64>, ln_g_s: Vec<f64>) -> GzEval {
        GzEval {
            ln_mix_g_r: self.mix(&ln_g_r),
            ln_mix_z_r: self.mix(&ln_z_r),
            ln_mix_g_s: self.mix(&ln_g_s),
            ln_g_r,
            ln_z_r,
            ln_g_s,
        }
    }

    /// Sums for `ln f` given per output by `ln_f(j, i)`.
    fn eval_with(&self, p: G61Params, mut ln_f: impl FnMut(usize, usize) -> f64) -> GzEval {
        let r = p.r();
        let a = 0.5 * (1.0 - r);
        let mut gr = Vec::with_capacity(self.chans.len());
        let mut zr = Vec::with_capacity(self.chans.len());
        let mut gs = Vec::with_capacity(self.chans.len());
        for (j, ch) in self.chans.iter().enumerate() {
            let (mut sg, mut sz, mut ss) = (LogSum::new(), LogSum::new(), LogSum::new());
            for (i, &(lw, l0, l1)) in ch.entries.iter().enumerate() {
                if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
                    continue;
                }
                let lf = ln_f(j, i);
                let fr = pow_ln(lf, r);
                if l0 > f64::NEG_INFINITY {
                    sg.add(lw + (1.0 - r) * l0 + fr);
                    ss.add(lw + (1.0 - p.s) * l0 + pow_ln(lf, p.s));
                    if l1 > f64::NEG_INFINITY {
                        sz.add(lw + a * (l0 + l1) + fr);
                    }
                }
            }
            gr.push(sg.value());
            zr.push(sz.value());
            gs.push(ss.value());
        }
        self.finish(gr, zr, gs)
    }

    /// Sums under the optimized `f`, without materializing it.
    fn eval_optimized(&self, p: G61Params) -> GzEval {
        let r = p.r();
        let a = 0.5 * (1.0 - r);
        let mut gr = Vec::with_capacity(self.chans.len());
        let mut zr = Vec::with_capacity(self.chans.len());
        let mut gs = Vec::with_capacity(self.chans.len());
        for ch in &self.chans {
            let (mut sg, mut sz, mut ss) = (LogSum::new(), LogSum::new(), LogSum::new());
            for &(lw, l0, l1) in &ch.entries {
                if l0 == f64::NEG_INFINITY {
                    continue;
                }
                let m = ln_braced(l0, l1, p);
                // f^r = M^{ρ-1}, f^s = M^ρ
                let fr = pow_ln(m, p.rho - 1.0);
                sg.add(lw + (1.0 - r) * l0 + fr);
                ss.add(lw + (1.0 - p.s) * l0 + pow_ln(m, p.rho));
                if l1 > f64::NEG_INFINITY {
                    sz.add(lw + a * (l0 + l1) + fr);
                }
            }
            gr.push(sg.value());
            zr.push(sz.value());
            gs.push(ss.value());
        }
        self.finish(gr, zr, gs)
    }
}

/// `G(r;j)`, `Z(r;j)`, `G(s;j)` for an explicit tilting function.
pub fn eval_gz(dens: &ParallelDensities, params: G61Params, f: &TiltingFunction) -> Result<GzEval> {
    G61Params::new(params.rho, params.s, params.c)?;
    let f = TiltingFunction::new(dens, f.tables.clone())?;
    let ctx = G61Context::new(dens);
    let ln_f: Vec<Vec<f64>> = dens
        .tables()
        .iter()
        .zip(&f.tables)
        .map(|(t, tab)| t.entries().iter().zip(tab).filter(|(e, _)| e.weight > 0.0).map(|(_, &v)| ln0(v)).collect())
        .collect();
    Ok(ctx.eval_with(params, |j, i| ln_f[j][i]))
}

fn h2_nats(rho: f64) -> f64 {
    binary_entropy_bits(rho) * LN_2
}

/// `ρ [r_h + δ ln ΣαZ + (1-δ) ln ΣαG(r)] + (1-ρ) ln ΣαG(s)`.
fn per_symbol(ev: &GzEval, rho: f64, r_h: f64, delta: f64) -> f64 {
    let tail = if delta >= 1.0 { 0.0 } else { (1.0 - delta) * ev.ln_mix_g_r };
    let gs = if rho == 1.0 { 0.0 } else { (1.0 - rho) * ev.ln_mix_g_s };
    rho * (r_h + delta * ev.ln_mix_z_r + tail) + gs
}

fn subcode_value(ev: &GzEval, rho: f64, log_a_h: f64, h: usize, n: usize) -> f64 {
    let nf = n as f64;
    h2_nats(rho) + nf * per_symbol(ev, rho, log_a_h / nf, h as f64 / nf)
}

/// Whole-code bound under one `(ρ, s)` and tilting function, natural log,
/// clamped at 0.
pub fn g61_total_bound(
    dens: &ParallelDensities,
    spectrum: &DistanceSpectrum,
    params: G61Params,
    f: &TiltingFunction,
) -> Result<f64> {
    let ev = eval_gz(dens, params, f)?;
    let n = spectrum.block_length();
    let mut acc = LogSum::new();
    for h in 1..=n {
        let a = spectrum.get(h);
        if a != f64::NEG_INFINITY {
            acc.add(a + h as f64 * ev.ln_mix_z_r + (n - h) as f64 * ev.ln_mix_g_r);
        }
    }
    if acc.value() == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let gs = if params.rho == 1.0 { 0.0 } else { n as f64 * (1.0 - params.rho) * ev.ln_mix_g_s };
    Ok((h2_nats(params.rho) + params.rho * acc.value() + gs).min(0.0))
}

/// Bound on one constant-weight subcode, natural log, clamped at 0.
pub fn g61_subcode_bound(
    dens: &ParallelDensities,
    params: G61Params,
    f: &TiltingFunction,
    log_a_h: f64,
    h: usize,
    n: usize,
) -> Result<f64> {
    if h == 0 || h > n {
        return Err(contract!("subcode weight {h} outside 1..={n}"));
    }
    let ev = eval_gz(dens, params, f)?;
    if log_a_h == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(subcode_value(&ev, params.rho, log_a_h, h, n).min(0.0))
}

/// Search settings over `(ρ, s, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct G61Config {
    /// Axes `ρ`, `s`, `c`, in that order.
    pub grid: GridN,
    pub seeding: bool,
    pub prune_nats: f64,
    /// Use `f ≡ 1` instead of the optimized tilting function; `c` is then
    /// ignored and its axis collapsed.
    pub unit_tilting: bool,
}

impl Default for G61Config {
    fn default() -> Self {
        G61Config {
            grid: GridN::uniform(&[(1e-3, 1.0), (1e-3, 1.0), (0.0, 1.0)], &[11, 11, 6], 1e-6),
            seeding: true,
            prune_nats: 40.0,
            unit_tilting: false,
        }
    }
}

impl G61Config {
    /// The `f ≡ 1` baseline on the same `(ρ, s)` grid.
    pub fn unit(&self) -> Self {
        let mut grid = self.grid.clone();
        grid.ranges[2] = (0.0, 0.0);
        grid.nodes[2] = alloc::vec![0.0];
        G61Config { grid, unit_tilting: true, ..self.clone() }
    }
}

/// Optimized parameters at one `(δ, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct G61Point {
    /// Minimized per-symbol log bound (the exponent from [`g61_exponent`]).
    pub per_symbol: f64,
    pub params: G61Params,
    pub on_boundary: bool,
}

/// Minimizes `prefactor + ρ [r + δ ln ΣαZ + (1-δ) ln ΣαG(r)] + (1-ρ) ln ΣαG(s)`
/// where `prefactor = h(ρ) ln 2 / n` (pass `n = None` for the exponent).
/// Never worse than the Bhattacharyya point `ρ = 1`.
pub fn optimize_point(ctx: &G61Context, r: f64, delta: f64, n: Option<usize>, cfg: &G61Config, seed: Option<&G61Point>) -> G61Point {
    let union_val = r + delta * ctx.ln_mixed_gamma;
    let fallback = G61Point { per_symbol: union_val, params: G61Params { rho: 1.0, s: 1.0, c: 0.0 }, on_boundary: true };
    if r == f64::NEG_INFINITY {
        return G61Point { per_symbol: f64::NEG_INFINITY, ..fallback };
    }
    let pre = n.map_or(0.0, |n| 1.0 / n as f64);
    let unit = cfg.unit_tilting;
    let objective = |x: &[f64]| -> f64 {
        let p = G61Params { rho: x[0], s: x[1], c: x[2] };
        let ev = if unit { ctx.eval_with(p, |_, _| 0.0) } else { ctx.eval_optimized(p) };
        pre * h2_nats(p.rho) + per_symbol(&ev, p.rho, r, delta)
    };
    // at ρ = 1 the objective is flat in s and c, so such a seed would pin the
    // local search
    let seed_pt = seed.filter(|s| cfg.seeding && s.params.rho < 1.0).map(|s| [s.params.rho, s.params.s, s.params.c]);
    let opt = minimize_coordinate(objective, &cfg.grid, seed_pt.as_ref().map(|s| &s[..]));
    if !(opt.value < union_val) {
        return fallback;
    }
    G61Point {
        per_symbol: opt.value,
        params: G61Params { rho: opt.point[0], s: opt.point[1], c: opt.point[2] },
        on_boundary: opt.on_boundary,
    }
}

/// Exponent `-min_{ρ,s,c} {ρ [r(δ) + δ ln ΣαZ + (1-δ) ln ΣαG(r)] + (1-ρ) ln ΣαG(s)}`.
pub fn g61_exponent(dens: &ParallelDensities, r: f64, delta: f64, cfg: &G61Config) -> Result<G61Point> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(contract!("δ must lie in (0, 1], got {delta}"));
    }
    let ctx = G61Context::new(dens);
    let mut pt = optimize_point(&ctx, r, delta, None, cfg, None);
    pt.per_symbol = -pt.per_symbol;
    Ok(pt)
}

/// One constant-weight subcode term.
#[derive(Debug, Clone, PartialEq)]
pub struct G61Term {
    pub h: usize,
    pub log_bound: f64,
    pub point: Option<G61Point>,
    pub pruned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct G61Total {
    pub log_bound: f64,
    pub terms: Vec<G61Term>,
}

impl G61Total {
    pub fn dominant(&self) -> Option<&G61Term> {
        self.terms
            .iter()
            .filter(|t| t.point.is_some())
            .max_by(|a, b| a.log_bound.partial_cmp(&b.log_bound).unwrap_or(core::cmp::Ordering::Equal))
    }
}

/// `ln Σ_h min(1, P_h)` with each subcode optimized over `(ρ, s, c)`.
pub fn g61_total_per_subcode(dens: &ParallelDensities, spectrum: &DistanceSpectrum, cfg: &G61Config) -> G61Total {
    total_with_context(&G61Context::new(dens), spectrum, cfg)
}

pub fn total_with_context(ctx: &G61Context, spectrum: &DistanceSpectrum, cfg: &G61Config) -> G61Total {
    let n = spectrum.block_length();
    let nf = n as f64;
    let mut acc = LogSum::new();
    let mut terms = Vec::new();
    let mut prev: Option<G61Point> = None;
    for h in 1..=n {
        let a = spectrum.get(h);
        if a == f64::NEG_INFINITY {
            continue;
        }
        if acc.value() >= 0.0 {
            break;
        }
        let union_h = (a + h as f64 * ctx.ln_mixed_gamma).min(0.0);
        if union_h == f64::NEG_INFINITY {
            continue;
        }
        if union_h < acc.value() - cfg.prune_nats {
            acc.add(union_h);
            terms.push(G61Term { h, log_bound: union_h, point: None, pruned: true });
            continue;
        }
        let pt = optimize_point(ctx, a / nf, h as f64 / nf, Some(n), cfg, prev.as_ref());
        let lb = (nf * pt.per_symbol).min(union_h).min(0.0);
        acc.add(lb);
        prev = Some(pt.clone());
        terms.push(G61Term { h, log_bound: lb, point: Some(pt), pruned: false });
    }
    G61Total { log_bound: acc.value().min(0.0), terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{MbiosChannel, ParallelChannelSet};
    use crate::quadrature::QuadratureSpec;

    fn set(chs: &[MbiosChannel], alphas: &[f64]) -> ParallelDensities {
        ParallelChannelSet::new(chs.to_vec(), alphas.to_vec()).unwrap().discretize(&QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn r_zero_gives_unit_g_and_bhattacharyya_z() {
        let d = set(&[MbiosChannel::bsc(0.1).unwrap(), MbiosChannel::biawgn(1.0).unwrap()], &[0.5, 0.5]);
        // ρ = 1 makes r = 0
        let p = G61Params::new(1.0, 0.7, 0.3).unwrap();
        let f = optimized_tilting(&d, p).unwrap();
        let ev = eval_gz(&d, p, &f).unwrap();
        for j in 0..2 {
            assert!(ev.ln_g_r[j].abs() < 1e-12);
            assert!((libm::exp(ev.ln_z_r[j]) - d.bhattacharyyas()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn bsc_unit_tilting_r_minus_one() {
        let p = 0.2f64;
        let d = set(&[MbiosChannel::bsc(p).unwrap()], &[1.0]);
        // s = 1, ρ = 1/2 → r = -1
        let prm = G61Params::new(0.5, 1.0, 0.0).unwrap();
        assert!((prm.r() + 1.0).abs() < 1e-15);
        let ev = eval_gz(&d, prm, &TiltingFunction::ones(&d)).unwrap();
        assert!((libm::exp(ev.ln_g_r[0]) - (p * p + (1.0 - p) * (1.0 - p))).abs() < 1e-14);
    }

    #[test]
    fn optimized_f_is_even_and_matches_formula() {
        let d = set(&[MbiosChannel::bsc(0.11).unwrap(), MbiosChannel::biawgn(0.8).unwrap()], &[0.5, 0.5]);
        let p = G61Params::new(0.5, 0.5, 0.3).unwrap();
        let f = optimized_tilting(&d, p).unwrap();
        for (t, tab) in d.tables().iter().zip(f.tables()) {
            for (i, &m) in t.mirror().iter().enumerate() {
                assert!((tab[i] - tab[m]).abs() <= 1e-12 * tab[i].abs().max(1e-300));
                assert!(tab[i] >= 0.0);
            }
        }
        // direct evaluation for BSC(0.11) at y = +
        let (p0, p1): (f64, f64) = (0.89, 0.11);
        let a = 0.5 * (1.0 - p.r());
        let num = 0.7 * libm::pow(libm::pow(p0, a) - libm::pow(p1, a), 2.0) + 0.6 * libm::pow(p0 * p1, a);
        let den = libm::pow(p0, 0.5) + libm::pow(p1, 0.5);
        let want = libm::pow(num / den, 1.0);
        let got = f.tables()[0].iter().copied().fold(0.0, f64::max);
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn useless_symbol_drops_difference_term() {
        // BEC erasure output has p0 = p1
        let d = set(&[MbiosChannel::bec(0.3).unwrap()], &[1.0]);
        let p = G61Params::new(0.6, 0.4, 0.0).unwrap();
        let f = optimized_tilting(&d, p).unwrap();
        let t = &d.tables()[0];
        for (e, &v) in t.entries().iter().zip(&f.tables()[0]) {
            if e.p0 > 0.0 && e.p0 == e.p1 {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn odd_tilting_is_rejected() {
        let d = set(&[MbiosChannel::bsc(0.1).unwrap()], &[1.0]);
        let e = TiltingFunction::new(&d, alloc::vec![alloc::vec![1.0, 2.0]]).unwrap_err();
        assert_eq!(e.code(), "E_CONTRACT");
        assert!(TiltingFunction::new(&d, alloc::vec![alloc::vec![-1.0, -1.0]]).is_err());
    }

    #[test]
    fn rho_one_subcode_is_bhattacharyya_term() {
        let d = set(&[MbiosChannel::bsc(0.11).unwrap()], &[1.0]);
        let p = G61Params::new(1.0, 0.5, 0.0).unwrap();
        let v = g61_subcode_bound(&d, p, &TiltingFunction::ones(&d), 0.0, 3, 3).unwrap();
        let g = 2.0 * libm::sqrt(0.11f64 * 0.89);
        assert!((v - 3.0 * libm::log(g)).abs() < 1e-12);
        let spec = DistanceSpectrum::from_weights(3, 1, [0]).unwrap();
        assert_eq!(g61_total_bound(&d, &spec, p, &TiltingFunction::ones(&d)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn empty_weight_class_has_infinite_exponent() {
        let d = set(&[MbiosChannel::bsc(0.11).unwrap()], &[1.0]);
        let e = g61_exponent(&d, f64::NEG_INFINITY, 0.2, &G61Config::default()).unwrap();
        assert_eq!(e.per_symbol, f64::INFINITY);
    }

    #[test]
    fn optimized_tilting_beats_unit_tilting() {
        let d = set(&[MbiosChannel::biawgn(0.5).unwrap(), MbiosChannel::biawgn(1.2).unwrap()], &[0.5, 0.5]);
        let ctx = G61Context::new(&d);
        let cfg = G61Config::default();
        let opt = optimize_point(&ctx, 0.1, 0.25, Some(100), &cfg, None);
        let unit = optimize_point(&ctx, 0.1, 0.25, Some(100), &cfg.unit(), None);
        assert!(opt.per_symbol <= unit.per_symbol + 1e-12);
    }
}
