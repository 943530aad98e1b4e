//! The DS2 bound for parallel channels with optimized tilting measures.
//!
//! For `ρ < 1` the optimal tilting measure of channel `j` has the form
//! `ψ(y;j) = β_j p(y|0;j) (1 + k L(y;j)^λ)^ρ` with `L = p(y|1;j)/p(y|0;j)`,
//! where `β_j` normalizes `ψ(·;j)` and `k` is shared by all channels. With
//! that form
//!
//! * `B_j = β_j^{1-1/ρ} Σ_y p0 (1 + k L^λ)^{ρ-1}`
//! * `A_j = β_j^{1-1/ρ} Σ_y p0 (1 + k L^λ)^{ρ-1} L^λ`
//! * `k = δ/(1-δ) · Σ_j α_j B_j / Σ_j α_j A_j`
//!
//! and the pair `(k, β)` is found by alternating the last equation with the
//! normalization. Everything is evaluated in the log domain.
//!
//! Outputs with `p(y|0) = 0` carry no tilting mass; their contribution to
//! `A_j` is the limit of the closed form, which is `0` for `λρ < 1` and is
//! taken as `+∞` (a trivially valid bound) otherwise.

use alloc::vec::Vec;

use crate::channel::ParallelDensities;
use crate::error::{contract, invalid, Error, Result};
use crate::optimize::{minimize_2d, Grid2, Optimum};
use crate::special::{log_sum_exp, LogSum};
use crate::spectra::DistanceSpectrum;

/// `λ ≥ 0`, `ρ ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ds2Params {
    pub lambda: f64,
    pub rho: f64,
}

impl Ds2Params {
    pub fn new(lambda: f64, rho: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid!("λ must be finite and nonnegative, got {lambda}"));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid!("ρ must lie in (0, 1], got {rho}"));
        }
        Ok(Ds2Params { lambda, rho })
    }

    /// The Bhattacharyya point `λ = 1/2, ρ = 1`.
    pub fn bhattacharyya() -> Self {
        Ds2Params { lambda: 0.5, rho: 1.0 }
    }
}

/// Fixed point `(k, β_1..β_J)` of the optimized tilting measures.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltingSolution {
    pub k: f64,
    pub betas: Vec<f64>,
    /// `ln k` and `ln β_j`; these stay finite where `k` or `β_j` overflow.
    pub ln_k: f64,
    pub ln_betas: Vec<f64>,
    pub residual_k: f64,
    pub residual_beta: f64,
    pub iterations: usize,
}

impl TiltingSolution {
    /// A point `(k, β)` given directly, with zero residuals recorded.
    pub fn new(k: f64, betas: Vec<f64>) -> Self {
        let ln_betas = betas.iter().map(|&b| ln0(b)).collect();
        TiltingSolution { k, ln_k: ln0(k), betas, ln_betas, residual_k: 0.0, residual_beta: 0.0, iterations: 0 }
    }

    fn from_logs(ln_k: f64, ln_betas: Vec<f64>, residual_k: f64, residual_beta: f64, iterations: usize) -> Self {
        TiltingSolution {
            k: libm::exp(ln_k),
            betas: ln_betas.iter().map(|&b| libm::exp(b)).collect(),
            ln_k,
            ln_betas,
            residual_k,
            residual_beta,
            iterations,
        }
    }
}

/// Per-channel `A_j`, `B_j` (natural logs) and their `α`-mixtures.
#[derive(Debug, Clone, PartialEq)]
pub struct Ds2Eval {
    pub ln_a: Vec<f64>,
    pub ln_b: Vec<f64>,
    pub ln_mix_a: f64,
    pub ln_mix_b: f64,
}

/// Which tilting measure enters `A` and `B`.
#[derive(Debug, Clone, Copy)]
pub enum Tilting<'a> {
    /// `ψ(·;j) = p(·|0;j)`.
    Density,
    /// Explicit per-channel tables on the density-table outputs, each summing
    /// (with quadrature weights) to one.
    Explicit(&'a [Vec<f64>]),
    /// The measures implied by a fixed-point solution.
    Solution(&'a TiltingSolution),
    /// The `k → ∞` limit, optimal for the full-weight subcode `h = n`.
    FullWeight,
}

/// Fixed-point iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub max_iterations: usize,
    /// Plain alternation for this many steps, then updates are averaged with
    /// the previous iterate.
    pub undamped_steps: usize,
    pub damping: f64,
    pub tol: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig { max_iterations: 10_000, undamped_steps: 100, damping: 0.5, tol: 1e-10 }
    }
}

/// Outer search settings for `(λ, ρ)`.
///
/// The search runs over `(λρ, ρ)`: the useful range of `λ` grows like `1/ρ`
/// (the Gallager-bound family maps onto `λρ ∈ [ρ/2, 1/2]`), so a fixed box in
/// `λρ` resolves small and large `ρ` equally well.
#[derive(Debug, Clone, PartialEq)]
pub struct Ds2Config {
    /// `λρ ∈ [0, μ_max]` on the first axis, `ρ ∈ [ρ_min, 1]` on the second.
    pub grid: Grid2,
    pub fixed_point: FixedPointConfig,
    /// Seed each subcode search with the previous subcode's optimum.
    pub seeding: bool,
    /// Subcodes whose Bhattacharyya union term lies this many nats below the
    /// running total keep the union term instead of being optimized.
    pub prune_nats: f64,
}

impl Default for Ds2Config {
    fn default() -> Self {
        Ds2Config {
            grid: Grid2::uniform((0.0, 1.0), 21, (1e-3, 1.0), 11, 1e-6),
            fixed_point: FixedPointConfig::default(),
            seeding: true,
            prune_nats: 40.0,
        }
    }
}

impl Ds2Config {
    /// Upper limit of `λρ`.
    pub fn lambda_rho_max(&self) -> f64 {
        self.grid.x_range.1
    }

    pub fn rho_min(&self) -> f64 {
        self.grid.y_range.0
    }
}

#[derive(Debug, Clone)]
struct Prepared {
    /// `(ln w + ln p0, ln L)` for outputs with `p0 > 0`.
    terms: Vec<(f64, f64)>,
    /// `ln w + ln p1` for outputs with `p0 = 0 < p1`.
    orphans: Vec<f64>,
}

/// Channel data preprocessed for repeated DS2 evaluations.
#[derive(Debug, Clone)]
pub struct Ds2Context {
    chans: Vec<Prepared>,
    ln_alphas: Vec<f64>,
    ln_mixed_gamma: f64,
    sizes: Vec<usize>,
}

impl Ds2Context {
    pub fn new(dens: &ParallelDensities) -> Self {
        let chans = dens
            .tables()
            .iter()
            .map(|t| {
                let mut terms = Vec::new();
                let mut orphans = Vec::new();
                for e in t.entries() {
                    if e.weight <= 0.0 {
                        continue;
                    }
                    if e.p0 > 0.0 {
                        terms.push((e.ln_w + e.ln_p0, e.ln_p1 - e.ln_p0));
                    } else if e.p1 > 0.0 {
                        orphans.push(e.ln_w + e.ln_p1);
                    }
                }
                Prepared { terms, orphans }
            })
            .collect();
        let ln_alphas = dens.alphas().iter().map(|&a| if a > 0.0 { libm::log(a) } else { f64::NEG_INFINITY }).collect();
        let g = dens.mixed_bhattacharyya();
        Ds2Context {
            chans,
            ln_alphas,
            ln_mixed_gamma: if g > 0.0 { libm::log(g) } else { f64::NEG_INFINITY },
            sizes: dens.tables().iter().map(|t| t.len()).collect(),
        }
    }

    pub fn channels(&self) -> usize {
        self.chans.len()
    }

    /// `ln Σ_j α_j γ_j`.
    pub fn ln_mixed_bhattacharyya(&self) -> f64 {
        self.ln_mixed_gamma
    }

    fn mix(&self, ln_vals: &[f64]) -> f64 {
        let mut acc = LogSum::new();
        for (v, la) in ln_vals.iter().zip(&self.ln_alphas) {
            acc.add(v + la);
        }
        acc.value()
    }

    fn orphan_term(&self, j: usize, lambda_rho: f64) -> f64 {
        let o = &self.chans[j].orphans;
        if o.is_empty() || lambda_rho < 1.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }

    /// `ψ = p0`: `A_j = Σ p0^{1-λ} p1^λ`, `B_j = 1`.
    fn eval_density(&self, p: Ds2Params) -> Ds2Eval {
        let ln_a: Vec<f64> = (0..self.chans.len())
            .map(|j| {
                let mut acc = LogSum::new();
                for &(lwp0, ll) in &self.chans[j].terms {
                    acc.add(lwp0 + tilt(p.lambda, ll));
                }
                if !self.chans[j].orphans.is_empty() && p.lambda >= 1.0 {
                    acc.add(f64::INFINITY);
                }
                acc.value()
            })
            .collect();
        let ln_b = alloc::vec![0.0; self.chans.len()];
        self.finish(ln_a, ln_b)
    }

    /// Closed forms at `(k, β)`; with `update_beta` the normalization is
    /// re-solved for `β` first and the new `β` is returned.
    fn eval_closed(&self, p: Ds2Params, ln_k: f64, ln_betas: &mut [f64], update_beta: bool) -> Ds2Eval {
        let rho = p.rho;
        let expo = 1.0 - 1.0 / rho;
        let mut ln_a = Vec::with_capacity(self.chans.len());
        let mut ln_b = Vec::with_capacity(self.chans.len());
        for (j, ch) in self.chans.iter().enumerate() {
            let mut norm = LogSum::new();
            let mut sb = LogSum::new();
            let mut sa = LogSum::new();
            for &(lwp0, ll) in &ch.terms {
                let t = tilt(p.lambda, ll);
                let u = ln1p_exp(ln_k + t);
                norm.add(lwp0 + rho * u);
                let common = lwp0 + (rho - 1.0) * u;
                sb.add(common);
                sa.add(common + t);
            }
            if update_beta {
                ln_betas[j] = -norm.value();
            }
            let lead = expo * ln_betas[j];
            ln_b.push(lead + sb.value());
            let mut a = lead + sa.value();
            if self.orphan_term(j, p.lambda * rho) == f64::INFINITY {
                a = f64::INFINITY;
            }
            ln_a.push(a);
        }
        self.finish(ln_a, ln_b)
    }

    /// `k → ∞`: `A_j = (Σ p0^{1-λρ} p1^{λρ})^{1/ρ}`; `B_j` is not used.
    fn eval_full_weight(&self, p: Ds2Params) -> Ds2Eval {
        let lr = p.lambda * p.rho;
        let ln_a = (0..self.chans.len())
            .map(|j| {
                let mut acc = LogSum::new();
                for &(lwp0, ll) in &self.chans[j].terms {
                    acc.add(lwp0 + tilt(lr, ll));
                }
                acc.add(self.orphan_term(j, lr));
                acc.value() / p.rho
            })
            .collect();
        let ln_b = alloc::vec![f64::NAN; self.chans.len()];
        let mut ev = self.finish(ln_a, ln_b);
        ev.ln_mix_b = f64::NAN;
        ev
    }

    fn finish(&self, ln_a: Vec<f64>, ln_b: Vec<f64>) -> Ds2Eval {
        let ln_mix_a = self.mix(&ln_a);
        let ln_mix_b = self.mix(&ln_b);
        Ds2Eval { ln_a, ln_b, ln_mix_a, ln_mix_b }
    }

    fn eval_explicit(&self, dens: &ParallelDensities, p: Ds2Params, psi: &[Vec<f64>]) -> Result<Ds2Eval> {
        if psi.len() != self.chans.len() {
            return Err(contract!("{} tilting tables for {} channels", psi.len(), self.chans.len()));
        }
        let expo = 1.0 - 1.0 / p.rho;
        let mut ln_a = Vec::new();
        let mut ln_b = Vec::new();
        for (j, (table, psi)) in dens.tables().iter().zip(psi).enumerate() {
            if psi.len() != self.sizes[j] {
                return Err(contract!("tilting table {j} has {} entries, channel has {}", psi.len(), self.sizes[j]));
            }
            if psi.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(contract!("tilting table {j} has negative or non-finite entries"));
            }
            let mass: f64 = table.entries().iter().zip(psi).map(|(e, &v)| e.weight * v).sum();
            if (mass - 1.0).abs() > 1e-9 {
                return Err(contract!("tilting table {j} sums to {mass}, expected 1"));
            }
            let mut sa = LogSum::new();
            let mut sb = LogSum::new();
            for (e, &v) in table.entries().iter().zip(psi) {
                if e.weight <= 0.0 || v <= 0.0 {
                    continue;
                }
                let lead = e.ln_w + if p.rho == 1.0 { 0.0 } else { expo * libm::log(v) };
                // p0^{1/ρ - λ} p1^λ and p0^{1/ρ}, with 0^0 = 1
                let pa = pow_ln(e.ln_p0, 1.0 / p.rho - p.lambda) + pow_ln(e.ln_p1, p.lambda);
                sa.add(lead + pa);
                sb.add(lead + pow_ln(e.ln_p0, 1.0 / p.rho));
            }
            ln_a.push(sa.value());
            ln_b.push(sb.value());
        }
        Ok(self.finish(ln_a, ln_b))
    }
}

/// `x ln L` with `0 · (-∞) = 0`.
#[inline]
fn tilt(x: f64, ln_l: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ln_l
    }
}

/// `e^{x ln v}` in the log domain with `0^0 = 1` and `0^{x<0} = +∞`.
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

/// `ln(1 + e^x)`.
#[inline]
fn ln1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x + libm::exp(-x)
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// `A_j`, `B_j` under the chosen tilting measure.
pub fn eval_ab(dens: &ParallelDensities, params: Ds2Params, tilting: Tilting<'_>) -> Result<Ds2Eval> {
    Ds2Params::new(params.lambda, params.rho)?;
    let ctx = Ds2Context::new(dens);
    eval_with(&ctx, dens, params, tilting)
}

fn eval_with(ctx: &Ds2Context, dens: &ParallelDensities, p: Ds2Params, tilting: Tilting<'_>) -> Result<Ds2Eval> {
    match tilting {
        Tilting::Density => Ok(ctx.eval_density(p)),
        Tilting::Explicit(psi) => ctx.eval_explicit(dens, p, psi),
        Tilting::FullWeight => Ok(ctx.eval_full_weight(p)),
        Tilting::Solution(sol) => {
            if sol.ln_betas.len() != ctx.channels() {
                return Err(contract!("solution has {} β values for {} channels", sol.ln_betas.len(), ctx.channels()));
            }
            if p.rho == 1.0 {
                return Ok(ctx.eval_density(p));
            }
            let mut lb = sol.ln_betas.clone();
            Ok(ctx.eval_closed(p, sol.ln_k, &mut lb, false))
        }
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

/// The tilting measures `ψ(y;j) = β_j p0 (1 + k L^λ)^ρ` as explicit tables.
pub fn psi_tables(dens: &ParallelDensities, params: Ds2Params, sol: &TiltingSolution) -> Vec<Vec<f64>> {
    dens.tables()
        .iter()
        .zip(&sol.ln_betas)
        .map(|(t, &ln_beta)| {
            t.entries()
                .iter()
                .map(|e| {
                    if e.p0 <= 0.0 {
                        return 0.0;
                    }
                    let u = ln1p_exp(sol.ln_k + tilt(params.lambda, e.ln_p1 - e.ln_p0));
                    libm::exp(ln_beta + e.ln_p0 + params.rho * u)
                })
                .collect()
        })
        .collect()
}

/// Solves the coupled equations for `(k, β)` at `(λ, ρ, δ)` from `β_j = init`
/// (default 1).
pub fn tilting_fixed_point(
    dens: &ParallelDensities,
    params: Ds2Params,
    delta: f64,
    init: Option<&[f64]>,
) -> Result<TiltingSolution> {
    Ds2Params::new(params.lambda, params.rho)?;
    let ctx = Ds2Context::new(dens);
    let init = match init {
        Some(b) if b.len() == dens.len() && b.iter().all(|&x| x > 0.0 && x.is_finite()) => {
            Some(b.iter().map(|&x| libm::log(x)).collect::<Vec<_>>())
        }
        Some(_) => return Err(contract!("initial β must be {} positive finite values", dens.len())),
        None => None,
    };
    solve_fixed_point(&ctx, params, delta, init.as_deref(), None, &FixedPointConfig::default())
}

/// Fixed-point solver on a prepared context, started from `ln β` (default 0)
/// and `ln k` (default: the `k` equation evaluated at the starting `β`).
pub fn solve_fixed_point(
    ctx: &Ds2Context,
    p: Ds2Params,
    delta: f64,
    init_ln_betas: Option<&[f64]>,
    init_ln_k: Option<f64>,
    cfg: &FixedPointConfig,
) -> Result<TiltingSolution> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(contract!("δ must lie in (0, 1), got {delta}"));
    }
    let j = ctx.channels();
    if p.rho == 1.0 {
        return Ok(TiltingSolution::new(0.0, alloc::vec![1.0; j]));
    }
    let mut ln_b: Vec<f64> = match init_ln_betas {
        Some(b) if b.len() == j && b.iter().all(|x| x.is_finite()) => b.to_vec(),
        Some(_) => return Err(contract!("initial ln β must be {j} finite values")),
        None => alloc::vec![0.0; j],
    };
    let ln_ratio = libm::log(delta / (1.0 - delta));
    let mut ln_k = match init_ln_k {
        Some(k) if k.is_finite() => k,
        _ => {
            let ev = ctx.eval_closed(p, ln_ratio, &mut ln_b, false);
            ln_ratio + ev.ln_mix_b - ev.ln_mix_a
        }
    };
    let mut res_k = f64::INFINITY;
    let mut res_b = f64::INFINITY;
    let mut scratch = ln_b.clone();
    for it in 1..=cfg.max_iterations {
        // normalization for β at the current k, then the k equation
        let ev = ctx.eval_closed(p, ln_k, &mut scratch, true);
        if !ev.ln_mix_a.is_finite() || !ev.ln_mix_b.is_finite() {
            return Err(Error::NonConvergence { iterations: it, k: libm::exp(ln_k), residual_k: f64::NAN, residual_beta: f64::NAN });
        }
        let mut new_k = ln_ratio + ev.ln_mix_b - ev.ln_mix_a;
        let mut new_b = scratch.clone();
        if it > cfg.undamped_steps {
            let d = cfg.damping;
            new_k = damp_ln(ln_k, new_k, d);
            for (nb, &ob) in new_b.iter_mut().zip(&ln_b) {
                *nb = damp_ln(ob, *nb, d);
            }
        }
        res_k = libm::expm1((new_k - ln_k).abs());
        res_b = new_b.iter().zip(&ln_b).map(|(a, b)| libm::expm1((a - b).abs())).fold(0.0, f64::max);
        ln_k = new_k;
        ln_b.copy_from_slice(&new_b);
        scratch.copy_from_slice(&new_b);
        if res_k < cfg.tol && res_b < cfg.tol {
            // report residuals of both equations at the returned point
            let mut chk = ln_b.clone();
            let ev = ctx.eval_closed(p, ln_k, &mut chk, true);
            let rk = libm::expm1((ln_ratio + ev.ln_mix_b - ev.ln_mix_a - ln_k).abs());
            let rb = chk.iter().zip(&ln_b).map(|(a, b)| libm::expm1((a - b).abs())).fold(0.0, f64::max);
            return Ok(TiltingSolution::from_logs(ln_k, ln_b, rk, rb, it));
        }
    }
    Err(Error::NonConvergence { iterations: cfg.max_iterations, k: libm::exp(ln_k), residual_k: res_k, residual_beta: res_b })
}

/// Damped update `(1-d)·old + d·new` in linear scale, done on logs.
#[inline]
fn damp_ln(old: f64, new: f64, d: f64) -> f64 {
    let m = old.max(new);
    m + libm::log((1.0 - d) * libm::exp(old - m) + d * libm::exp(new - m))
}

/// Per-symbol log bound `ρ [r + δ ln ΣαA + (1-δ) ln ΣαB]` where `r = ln A_h / n`.
fn per_symbol(ev: &Ds2Eval, rho: f64, r: f64, delta: f64) -> f64 {
    if delta >= 1.0 {
        rho * (r + ev.ln_mix_a)
    } else {
        rho * (r + delta * ev.ln_mix_a + (1.0 - delta) * ev.ln_mix_b)
    }
}

/// Natural-log bound on the constant-weight subcode error probability,
/// `ρ ln A_h + hρ ln ΣαA + (n-h)ρ ln ΣαB`, clamped at 0.
pub fn subcode_bound(
    dens: &ParallelDensities,
    params: Ds2Params,
    tilting: Tilting<'_>,
    log_a_h: f64,
    h: usize,
    n: usize,
) -> Result<f64> {
    if h == 0 || h > n {
        return Err(contract!("subcode weight {h} outside 1..={n}"));
    }
    Ds2Params::new(params.lambda, params.rho)?;
    if log_a_h == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let ctx = Ds2Context::new(dens);
    let ev = eval_with(&ctx, dens, params, tilting)?;
    Ok(subcode_value(&ev, params.rho, log_a_h, h, n).min(0.0))
}

fn subcode_value(ev: &Ds2Eval, rho: f64, log_a_h: f64, h: usize, n: usize) -> f64 {
    let tail = if h == n { 0.0 } else { (n - h) as f64 * ev.ln_mix_b };
    rho * (log_a_h + h as f64 * ev.ln_mix_a + tail)
}

/// `ln Σ_h A_h (Σ_j α_j γ_j)^h` over `h ≥ 1`, clamped at 0.
pub fn union_bhattacharyya(dens: &ParallelDensities, spectrum: &DistanceSpectrum) -> f64 {
    let g = dens.mixed_bhattacharyya();
    let lg = ln0(g);
    let mut acc = LogSum::new();
    for h in 1..=spectrum.block_length() {
        let a = spectrum.get(h);
        if a == f64::NEG_INFINITY {
            continue;
        }
        acc.add(a + h as f64 * lg);
    }
    acc.value().min(0.0)
}

/// Whole-code form: one `(λ, ρ, ψ)` for all weights,
/// `ρ ln Σ_h A_h (ΣαA)^h (ΣαB)^{n-h}`, clamped at 0.
pub fn total_bound_single_measure(
    dens: &ParallelDensities,
    spectrum: &DistanceSpectrum,
    params: Ds2Params,
    tilting: Tilting<'_>,
) -> Result<f64> {
    Ds2Params::new(params.lambda, params.rho)?;
    if matches!(tilting, Tilting::FullWeight) {
        return Err(contract!("the full-weight limit only applies to the h = n subcode"));
    }
    let ctx = Ds2Context::new(dens);
    let ev = eval_with(&ctx, dens, params, tilting)?;
    let n = spectrum.block_length();
    let mut terms = Vec::with_capacity(n);
    for h in 1..=n {
        let a = spectrum.get(h);
        if a != f64::NEG_INFINITY {
            terms.push(a + h as f64 * ev.ln_mix_a + (n - h) as f64 * ev.ln_mix_b);
        }
    }
    Ok((params.rho * log_sum_exp(&terms)).min(0.0))
}

/// Optimized exponent or subcode parameters at one `(δ, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ds2Point {
    /// Minimized `ρ [r + δ ln ΣαA + (1-δ) ln ΣαB]` (the negated exponent).
    pub per_symbol: f64,
    pub params: Ds2Params,
    pub solution: TiltingSolution,
    pub on_boundary: bool,
    /// False when every searched point failed and the Bhattacharyya point
    /// was used instead.
    pub converged: bool,
    /// Search points at which the tilting fixed point did not converge.
    pub failed_evaluations: usize,
}

/// Minimizes the per-symbol log bound at `(δ, r)` over `(λ, ρ)`. The result is
/// never worse than the Bhattacharyya point `(λ, ρ) = (½, 1)`.
pub fn optimize_point(ctx: &Ds2Context, r: f64, delta: f64, cfg: &Ds2Config, seed: Option<&Ds2Point>) -> Ds2Point {
    let j = ctx.channels();
    let union_val = r + delta * ctx.ln_mixed_gamma;
    let fallback = Ds2Point {
        per_symbol: union_val,
        params: Ds2Params::bhattacharyya(),
        solution: TiltingSolution::new(0.0, alloc::vec![1.0; j]),
        on_boundary: false,
        converged: true,
        failed_evaluations: 0,
    };
    if r == f64::NEG_INFINITY {
        return Ds2Point { per_symbol: f64::NEG_INFINITY, ..fallback };
    }
    let full = delta >= 1.0;
    let mut warm: Option<TiltingSolution> = seed.map(|s| s.solution.clone()).filter(|s| s.ln_k.is_finite());
    let mut failures = 0usize;
    let mut best_sol: Option<(f64, TiltingSolution)> = None;
    let mut objective = |mu: f64, rho: f64| -> f64 {
        let p = Ds2Params { lambda: mu / rho, rho };
        if full {
            return per_symbol(&ctx.eval_full_weight(p), rho, r, 1.0);
        }
        if rho == 1.0 {
            return per_symbol(&ctx.eval_density(p), rho, r, delta);
        }
        let init_b = warm.as_ref().map(|s| s.ln_betas.clone());
        let init_k = warm.as_ref().map(|s| s.ln_k);
        match solve_fixed_point(ctx, p, delta, init_b.as_deref(), init_k, &cfg.fixed_point) {
            Ok(sol) => {
                let mut lb = sol.ln_betas.clone();
                let ev = ctx.eval_closed(p, sol.ln_k, &mut lb, false);
                let v = per_symbol(&ev, rho, r, delta);
                if best_sol.as_ref().is_none_or(|b| v < b.0) {
                    best_sol = Some((v, sol.clone()));
                }
                warm = Some(sol);
                v
            }
            Err(_) => {
                failures += 1;
                f64::INFINITY
            }
        }
    };
    let seed_pt = seed.map(|s| (s.params.lambda * s.params.rho, s.params.rho));
    let opt: Optimum = minimize_2d(&mut objective, &cfg.grid, if cfg.seeding { seed_pt } else { None });
    if !(opt.value < union_val) {
        return Ds2Point { converged: opt.value.is_finite(), failed_evaluations: failures, ..fallback };
    }
    let p = Ds2Params { lambda: opt.point[0] / opt.point[1], rho: opt.point[1] };
    let solution = if full {
        TiltingSolution::new(f64::INFINITY, alloc::vec![1.0; j])
    } else if p.rho == 1.0 {
        TiltingSolution::new(0.0, alloc::vec![1.0; j])
    } else {
        match best_sol {
            Some((_, s)) => s,
            None => return Ds2Point { converged: false, failed_evaluations: failures, ..fallback },
        }
    };
    Ds2Point {
        per_symbol: opt.value,
        params: p,
        solution,
        on_boundary: opt.on_boundary,
        converged: true,
        failed_evaluations: failures,
    }
}

/// Optimized DS2 exponent `E(δ) = -min_{λ,ρ} ρ [r(δ) + δ ln ΣαA + (1-δ) ln ΣαB]`.
/// An empty weight class (`r = -∞`) has exponent `+∞`.
pub fn ds2_exponent(dens: &ParallelDensities, r: f64, delta: f64, cfg: &Ds2Config) -> Result<Ds2Point> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(contract!("δ must lie in (0, 1], got {delta}"));
    }
    let ctx = Ds2Context::new(dens);
    let mut pt = optimize_point(&ctx, r, delta, cfg, None);
    pt.per_symbol = -pt.per_symbol;
    Ok(pt)
}

/// Optimized bound on one constant-weight subcode.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcodeTerm {
    pub h: usize,
    /// Natural-log bound, clamped at 0.
    pub log_bound: f64,
    pub point: Option<Ds2Point>,
    /// The union term was kept without optimizing.
    pub pruned: bool,
}

/// Result of [`total_bound_per_subcode`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubcodeTotal {
    pub log_bound: f64,
    pub terms: Vec<SubcodeTerm>,
}

impl SubcodeTotal {
    /// The optimized term with the largest contribution.
    pub fn dominant(&self) -> Option<&SubcodeTerm> {
        self.terms
            .iter()
            .filter(|t| t.point.is_some())
            .max_by(|a, b| a.log_bound.partial_cmp(&b.log_bound).unwrap_or(core::cmp::Ordering::Equal))
    }

    pub fn all_converged(&self) -> bool {
        self.terms.iter().filter_map(|t| t.point.as_ref()).all(|p| p.converged)
    }
}

/// `ln Σ_h min(1, P_h)` with each subcode bound optimized separately over
/// `(λ, ρ)` and its own tilting measures.
pub fn total_bound_per_subcode(dens: &ParallelDensities, spectrum: &DistanceSpectrum, cfg: &Ds2Config) -> Result<SubcodeTotal> {
    let ctx = Ds2Context::new(dens);
    Ok(total_with_context(&ctx, spectrum, cfg))
}

pub fn total_with_context(ctx: &Ds2Context, spectrum: &DistanceSpectrum, cfg: &Ds2Config) -> SubcodeTotal {
    let n = spectrum.block_length();
    let nf = n as f64;
    let mut acc = LogSum::new();
    let mut terms = Vec::new();
    let mut prev: Option<Ds2Point> = None;
    for h in 1..=n {
        let a = spectrum.get(h);
        if a == f64::NEG_INFINITY {
            continue;
        }
        if acc.value() >= 0.0 {
            // already trivial
            break;
        }
        let union_h = (a + h as f64 * ctx.ln_mixed_gamma).min(0.0);
        if union_h == f64::NEG_INFINITY {
            continue;
        }
        if union_h < acc.value() - cfg.prune_nats {
            acc.add(union_h);
            terms.push(SubcodeTerm { h, log_bound: union_h, point: None, pruned: true });
            continue;
        }
        let delta = h as f64 / nf;
        let pt = optimize_point(ctx, a / nf, delta, cfg, prev.as_ref());
        let lb = (nf * pt.per_symbol).min(union_h).min(0.0);
        acc.add(lb);
        prev = Some(pt.clone());
        terms.push(SubcodeTerm { h, log_bound: lb, point: Some(pt), pruned: false });
    }
    SubcodeTotal { log_bound: acc.value().min(0.0), terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{MbiosChannel, ParallelChannelSet};
    use crate::quadrature::QuadratureSpec;

    fn set(chs: &[MbiosChannel], alphas: &[f64]) -> ParallelDensities {
        ParallelChannelSet::new(chs.to_vec(), alphas.to_vec()).unwrap().discretize(&QuadratureSpec::default()).unwrap()
    }

    fn bsc(p: f64) -> MbiosChannel {
        MbiosChannel::bsc(p).unwrap()
    }

    #[test]
    fn rho_one_lambda_zero_gives_unit_values() {
        let d = set(&[bsc(0.1), MbiosChannel::biawgn(0.7).unwrap()], &[0.5, 0.5]);
        let ev = eval_ab(&d, Ds2Params::new(0.0, 1.0).unwrap(), Tilting::Density).unwrap();
        for j in 0..2 {
            assert!(ev.ln_a[j].abs() < 1e-9 && ev.ln_b[j].abs() < 1e-9);
        }
    }

    #[test]
    fn rho_one_half_lambda_is_bhattacharyya() {
        let p = 0.11f64;
        let d = set(&[bsc(p)], &[1.0]);
        let ev = eval_ab(&d, Ds2Params::bhattacharyya(), Tilting::Density).unwrap();
        assert!((libm::exp(ev.ln_a[0]) - 2.0 * libm::sqrt(p * (1.0 - p))).abs() < 1e-14);
    }

    #[test]
    fn two_output_hand_computation() {
        // ψ uniform on {+,-}, ρ = λ = 1/2: A = Σ ψ^{-1} p0^{3/2} p1^{1/2}, B = Σ ψ^{-1} p0^2
        let p = 0.11f64;
        let d = set(&[bsc(p)], &[1.0]);
        let psi = alloc::vec![alloc::vec![0.5, 0.5]];
        let ev = eval_ab(&d, Ds2Params::new(0.5, 0.5).unwrap(), Tilting::Explicit(&psi)).unwrap();
        let q = 1.0 - p;
        let a = 2.0 * (q * libm::sqrt(q * p) + p * libm::sqrt(p * q));
        let b = 2.0 * (q * q + p * p);
        assert!((libm::exp(ev.ln_a[0]) - a).abs() < 1e-12 * a);
        assert!((libm::exp(ev.ln_b[0]) - b).abs() < 1e-12 * b);
    }

    #[test]
    fn unnormalized_psi_is_rejected() {
        let d = set(&[bsc(0.1)], &[1.0]);
        let psi = alloc::vec![alloc::vec![0.5, 0.6]];
        let e = eval_ab(&d, Ds2Params::new(0.5, 0.5).unwrap(), Tilting::Explicit(&psi)).unwrap_err();
        assert_eq!(e.code(), "E_CONTRACT");
    }

    #[test]
    fn zero_k_gives_density_measure() {
        let d = set(&[bsc(0.2), bsc(0.05)], &[0.3, 0.7]);
        let sol = TiltingSolution::new(0.0, alloc::vec![1.0, 1.0]);
        let p = Ds2Params::new(0.7, 0.4).unwrap();
        let psi = psi_tables(&d, p, &sol);
        for (t, ps) in d.tables().iter().zip(&psi) {
            for (e, &v) in t.entries().iter().zip(ps) {
                assert!((v - e.p0).abs() < 1e-15);
            }
        }
        let a = eval_ab(&d, p, Tilting::Solution(&sol)).unwrap();
        let b = eval_ab(&d, p, Tilting::Density).unwrap();
        for j in 0..2 {
            assert!((a.ln_a[j] - b.ln_a[j]).abs() < 1e-12);
            assert!((a.ln_b[j] - b.ln_b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_residuals_and_normalization() {
        let d = set(&[bsc(0.05), bsc(0.2)], &[0.5, 0.5]);
        let p = Ds2Params::new(0.6, 0.5).unwrap();
        let sol = tilting_fixed_point(&d, p, 0.3, None).unwrap();
        assert!(sol.residual_k < 1e-10 && sol.residual_beta < 1e-10, "{sol:?}");
        for (t, ps) in d.tables().iter().zip(psi_tables(&d, p, &sol)) {
            let mass: f64 = t.entries().iter().zip(&ps).map(|(e, v)| e.weight * v).sum();
            assert!((mass - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fixed_point_rejects_bad_delta() {
        let d = set(&[bsc(0.05)], &[1.0]);
        assert!(tilting_fixed_point(&d, Ds2Params::new(0.5, 0.5).unwrap(), 1.0, None).is_err());
        assert!(tilting_fixed_point(&d, Ds2Params::new(0.5, 0.5).unwrap(), 0.0, None).is_err());
    }

    #[test]
    fn subcode_examples() {
        let d = set(&[bsc(0.11)], &[1.0]);
        let p = Ds2Params::bhattacharyya();
        assert_eq!(subcode_bound(&d, p, Tilting::Density, f64::NEG_INFINITY, 2, 3).unwrap(), f64::NEG_INFINITY);
        let v = subcode_bound(&d, p, Tilting::Density, 0.0, 3, 3).unwrap();
        let g = 2.0 * libm::sqrt(0.11f64 * 0.89);
        assert!((v - 3.0 * libm::log(g)).abs() < 1e-12);
        assert!((v + 1.40627).abs() < 1e-4);
    }

    #[test]
    fn union_examples() {
        let spec = DistanceSpectrum::from_weights(3, 1, [0, 3]).unwrap();
        let d = set(&[bsc(0.11)], &[1.0]);
        assert!((union_bhattacharyya(&d, &spec) + 1.40627).abs() < 1e-4);
        let d0 = set(&[bsc(0.0)], &[1.0]);
        assert_eq!(union_bhattacharyya(&d0, &spec), f64::NEG_INFINITY);
        let d2 = set(&[MbiosChannel::bec(0.2).unwrap(), MbiosChannel::bec(0.4).unwrap()], &[0.5, 0.5]);
        let mut la = alloc::vec![f64::NEG_INFINITY; 4];
        la[0] = 0.0;
        la[2] = libm::log(3.0);
        let spec = DistanceSpectrum::new(3, 2, crate::spectra::Weighting::Block, la).unwrap();
        assert!((union_bhattacharyya(&d2, &spec) - libm::log(3.0 * 0.09)).abs() < 1e-12);
    }

    #[test]
    fn single_measure_examples() {
        let spec = DistanceSpectrum::from_weights(3, 1, [0, 3]).unwrap();
        let d = set(&[bsc(0.11)], &[1.0]);
        let v = total_bound_single_measure(&d, &spec, Ds2Params::bhattacharyya(), Tilting::Density).unwrap();
        let g = 2.0 * libm::sqrt(0.11f64 * 0.89);
        assert!((v - libm::log(g * g * g)).abs() < 1e-12);
    }

    #[test]
    fn full_weight_limit_matches_large_k() {
        let d = set(&[bsc(0.07), MbiosChannel::biawgn(0.5).unwrap()], &[0.4, 0.6]);
        let p = Ds2Params::new(0.8, 0.6).unwrap();
        let lim = eval_ab(&d, p, Tilting::FullWeight).unwrap();
        // β re-solved for a large k
        let ctx = Ds2Context::new(&d);
        let mut lb = alloc::vec![0.0, 0.0];
        let ev = ctx.eval_closed(p, libm::log(1e12), &mut lb, true);
        for j in 0..2 {
            assert!((ev.ln_a[j] - lim.ln_a[j]).abs() < 1e-6, "{} {}", ev.ln_a[j], lim.ln_a[j]);
        }
    }

    #[test]
    fn optimized_subcode_not_worse_than_union() {
        let d = set(&[bsc(0.11)], &[1.0]);
        let ctx = Ds2Context::new(&d);
        let cfg = Ds2Config::default();
        let pt = optimize_point(&ctx, 0.05, 0.3, &cfg, None);
        assert!(pt.per_symbol <= 0.05 + 0.3 * ctx.ln_mixed_bhattacharyya() + 1e-15);
        assert!(pt.converged);
    }
}
