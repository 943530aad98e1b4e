//! Attainable channel regions under ML decoding.
//!
//! A channel point is declared attainable for an ensemble when
//!
//! 1. the optimized bound exponent `E(δ)` stays positive on `[δ_min, 1]`,
//! 2. `limsup_{δ→0} r(δ)/δ < -ln Σ_j α_j γ_j`,
//! 3. and 4. the ensemble declares the required growth and uniform
//!    convergence of its spectrum.
//!
//! Condition 2's limit is estimated by the largest `r(δ)/δ` over the smallest
//! decade of the δ grid, sampled ten times more finely than the grid.

use alloc::string::String;
use alloc::vec::Vec;

use crate::channel::{MbiosChannel, ParallelChannelSet, ParallelDensities};
use crate::ds2::{self, Ds2Config, Ds2Context, Ds2Point};
use crate::error::{contract, invalid, Error, Result};
use crate::g61::{self, G61Config, G61Context, G61Point};
use crate::optimize::brent_min_closed;
use crate::quadrature::QuadratureSpec;
use crate::spectra::SpectralExponent;

/// Which bound supplies the exponent of condition 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Ds2,
    G61,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::Ds2 => "ds2",
            BoundKind::G61 => "g61",
        }
    }
}

/// A set of parallel channels together with the code rate (bits per symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPoint {
    pub set: ParallelChannelSet,
    pub rate: f64,
}

impl ChannelPoint {
    pub fn new(set: ParallelChannelSet, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(invalid!("rate must lie in (0, 1], got {rate}"));
        }
        Ok(ChannelPoint { set, rate })
    }

    /// BiAWGN channels at the given `E_b/N_0` values (dB).
    pub fn biawgn_ebno_db(ebno_db: &[f64], alphas: &[f64], rate: f64) -> Result<Self> {
        let chans = ebno_db.iter().map(|&e| MbiosChannel::biawgn_ebno_db(e, rate)).collect::<Result<Vec<_>>>()?;
        Self::new(ParallelChannelSet::new(chans, alphas.to_vec())?, rate)
    }
}

/// δ grid and search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionConfig {
    /// Number of δ samples, log-spaced on `[delta_min, 1]`.
    pub delta_points: usize,
    pub delta_min: f64,
    pub quadrature: QuadratureSpec,
    pub ds2: Ds2Config,
    pub g61: G61Config,
    /// Stop scanning δ once condition 1 is known to fail.
    pub early_exit: bool,
    /// Boundary bisection tolerance in dB.
    pub tol_db: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            delta_points: 200,
            delta_min: 1e-3,
            quadrature: QuadratureSpec::default(),
            ds2: Ds2Config::default(),
            g61: G61Config::default(),
            early_exit: false,
            tol_db: 0.01,
        }
    }
}

impl RegionConfig {
    /// The condition-1 δ grid.
    pub fn delta_grid(&self) -> Vec<f64> {
        log_grid(self.delta_min, 1.0, self.delta_points)
    }

    /// Points of the smallest decade at ten times the grid density.
    pub fn small_delta_grid(&self) -> Vec<f64> {
        let per_decade = (self.delta_points as f64 - 1.0) / -libm::log10(self.delta_min);
        let pts = libm::ceil(10.0 * per_decade) as usize + 1;
        log_grid(self.delta_min, 10.0 * self.delta_min, pts.max(2))
    }

    /// Both grids merged, for sampling an exponent once.
    pub fn sampling_grid(&self) -> Vec<f64> {
        let mut g = self.delta_grid();
        g.extend(self.small_delta_grid());
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        g.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        g
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![hi];
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    let mut g: Vec<f64> = (0..n).map(|i| libm::exp(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Outcome of the attainability test at one channel point.
#[derive(Debug, Clone, PartialEq)]
pub struct AttainabilityReport {
    /// `min_δ E(δ)` over the scanned δ (an upper estimate of the infimum when
    /// the scan stopped early).
    pub margin_cond1: f64,
    pub argmin_delta: f64,
    /// Estimated `limsup r(δ)/δ`.
    pub slope_cond2: f64,
    /// `-ln Σ α_j γ_j`.
    pub threshold_cond2: f64,
    pub margin_cond2: f64,
    pub cond3_declared: bool,
    pub cond4_declared: bool,
    pub bound: BoundKind,
    pub attainable: bool,
}

enum Ctx {
    Ds2(Ds2Context),
    G61(G61Context),
}

enum Seed {
    None,
    Ds2(Ds2Point),
    G61(G61Point),
}

impl Ctx {
    fn new(dens: &ParallelDensities, bound: BoundKind) -> Self {
        match bound {
            BoundKind::Ds2 => Ctx::Ds2(Ds2Context::new(dens)),
            BoundKind::G61 => Ctx::G61(G61Context::new(dens)),
        }
    }

    /// Maximized exponent at `δ`; updates the warm start.
    fn exponent(&self, r: f64, delta: f64, cfg: &RegionConfig, seed: &mut Seed) -> f64 {
        if r == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        match self {
            Ctx::Ds2(c) => {
                let s = if let Seed::Ds2(p) = seed { Some(&*p) } else { None };
                let pt = ds2::optimize_point(c, r, delta, &cfg.ds2, s);
                let e = -pt.per_symbol;
                *seed = Seed::Ds2(pt);
                e
            }
            Ctx::G61(c) => {
                let s = if let Seed::G61(p) = seed { Some(&*p) } else { None };
                let pt = g61::optimize_point(c, r, delta, None, &cfg.g61, s);
                let e = -pt.per_symbol;
                *seed = Seed::G61(pt);
                e
            }
        }
    }
}

/// Attainability test with the exponent sampled as a [`SpectralExponent`].
/// `declared` states whether the ensemble declares conditions 3 and 4.
pub fn check_point(
    point: &ChannelPoint,
    exponent: &SpectralExponent,
    bound: BoundKind,
    declared: bool,
    cfg: &RegionConfig,
) -> Result<AttainabilityReport> {
    let (lo, hi) = exponent.coverage();
    if lo > cfg.delta_min * (1.0 + 1e-9) || hi < 1.0 - 1e-9 {
        return Err(contract!("exponent covers δ ∈ [{lo}, {hi}], need [{}, 1]", cfg.delta_min));
    }
    check_point_with(point, |d| exponent.at(d).unwrap_or(f64::NEG_INFINITY), bound, declared, cfg)
}

/// Attainability test with `r(δ)` supplied as a function.
pub fn check_point_with(
    point: &ChannelPoint,
    r: impl Fn(f64) -> f64,
    bound: BoundKind,
    declared: bool,
    cfg: &RegionConfig,
) -> Result<AttainabilityReport> {
    let dens = point.set.discretize(&cfg.quadrature)?;
    let gamma = dens.mixed_bhattacharyya();
    let threshold = if gamma > 0.0 { -libm::log(gamma) } else { f64::INFINITY };

    // condition 2
    let slope = cfg
        .small_delta_grid()
        .iter()
        .map(|&d| r(d) / d)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin2 = if threshold == f64::INFINITY { f64::INFINITY } else { threshold - slope };

    // condition 1; the union exponent -r - δ ln Σαγ bounds E from below, so
    // points whose union exponent exceeds the running minimum are skipped
    let ctx = Ctx::new(&dens, bound);
    let grid = cfg.delta_grid();
    let mut seed = Seed::None;
    let mut best = (f64::INFINITY, grid[grid.len() - 1], usize::MAX);
    for (i, &d) in grid.iter().enumerate() {
        let rd = r(d);
        let union_e = -rd + d * threshold;
        if union_e >= best.0 {
            continue;
        }
        let e = ctx.exponent(rd, d, cfg, &mut seed);
        if e < best.0 {
            best = (e, d, i);
        }
        if cfg.early_exit && best.0 <= 0.0 {
            break;
        }
    }
    // refine the minimum between the neighbouring grid points
    if best.2 != usize::MAX && best.0.is_finite() && !(cfg.early_exit && best.0 <= 0.0) {
        let i = best.2;
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        if b > a {
            let (d, e) = brent_min_closed(|d| ctx.exponent(r(d), d, cfg, &mut seed), a, b, 1e-6 * b);
            if e < best.0 {
                best = (e, d, i);
            }
        }
    }
    let attainable = best.0 > 0.0 && margin2 > 0.0 && declared;
    Ok(AttainabilityReport {
        margin_cond1: best.0,
        argmin_delta: best.1,
        slope_cond2: slope,
        threshold_cond2: threshold,
        margin_cond2: margin2,
        cond3_declared: declared,
        cond4_declared: declared,
        bound,
        attainable,
    })
}

/// Outer-bound reference verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceVerdict {
    Attainable,
    Unattainable,
    Inconclusive,
}

/// Unattainable when `Σ α_j C_j < R`.
pub fn capacity_converse(point: &ChannelPoint) -> ReferenceVerdict {
    if point.set.average_capacity_bits() < point.rate {
        ReferenceVerdict::Unattainable
    } else {
        ReferenceVerdict::Inconclusive
    }
}

/// Attainable (by the cutoff-rate argument) when `Σ α_j R_0(γ_j) ≥ R`.
pub fn cutoff_reference(point: &ChannelPoint) -> ReferenceVerdict {
    if point.set.average_cutoff_rate_bits() >= point.rate {
        ReferenceVerdict::Attainable
    } else {
        ReferenceVerdict::Inconclusive
    }
}

/// Smallest `x ∈ [lo, hi]` (within `tol`) with `verdict(x)` true, assuming
/// verdicts switch once from false to true. Returns `None` when `hi` is not
/// attainable and `Some(lo)` when `lo` already is. A three-point probe at
/// `lo`, the midpoint and `hi` rejects rays that switch back.
pub fn bisect_boundary(
    label: &str,
    lo: f64,
    hi: f64,
    tol: f64,
    mut verdict: impl FnMut(f64) -> Result<bool>,
) -> Result<Option<f64>> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(invalid!("bisection needs lo < hi and tol > 0"));
    }
    let mid = 0.5 * (lo + hi);
    let (vl, vm, vh) = (verdict(lo)?, verdict(mid)?, verdict(hi)?);
    if (vl && !vm) || (vm && !vh) {
        return Err(Error::NonMonotone(alloc::format!("{label}: verdicts at {lo}, {mid}, {hi} are {vl}, {vm}, {vh}")));
    }
    if vl {
        return Ok(Some(lo));
    }
    if !vh {
        return Ok(None);
    }
    let (mut a, mut b) = if vm { (lo, mid) } else { (mid, hi) };
    while b - a > tol {
        let m = 0.5 * (a + b);
        if verdict(m)? {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(Some(b))
}

/// One row of a traced region boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRow {
    pub ebno1_db: f64,
    /// `None` when the row is not attainable anywhere in the search range.
    pub ebno2_db: Option<f64>,
    /// Report at the returned boundary point.
    pub report: Option<AttainabilityReport>,
}

/// Two-BiAWGN region scan: for each `E_b/N_0` of channel 1, bisects channel 2
/// over `range` for the attainability boundary.
#[allow(clippy::too_many_arguments)]
pub fn boundary_trace(
    rows: &[f64],
    range: (f64, f64),
    alphas: &[f64],
    rate: f64,
    r: &dyn Fn(f64) -> f64,
    bound: BoundKind,
    declared: bool,
    cfg: &RegionConfig,
) -> Result<Vec<BoundaryRow>> {
    rows.iter().map(|&e1| trace_row(e1, range, alphas, rate, r, bound, declared, cfg)).collect()
}

/// A single row of [`boundary_trace`].
#[allow(clippy::too_many_arguments)]
pub fn trace_row(
    ebno1_db: f64,
    range: (f64, f64),
    alphas: &[f64],
    rate: f64,
    r: &dyn Fn(f64) -> f64,
    bound: BoundKind,
    declared: bool,
    cfg: &RegionConfig,
) -> Result<BoundaryRow> {
    let mut quick = cfg.clone();
    quick.early_exit = true;
    let label = alloc::format!("row (E_b/N_0)_1 = {ebno1_db} dB");
    let found = bisect_boundary(&label, range.0, range.1, cfg.tol_db, |e2| {
        let p = ChannelPoint::biawgn_ebno_db(&[ebno1_db, e2], alphas, rate)?;
        Ok(check_point_with(&p, r, bound, declared, &quick)?.attainable)
    })?;
    let report = match found {
        Some(e2) => {
            let p = ChannelPoint::biawgn_ebno_db(&[ebno1_db, e2], alphas, rate)?;
            Some(check_point_with(&p, r, bound, declared, cfg)?)
        }
        None => None,
    };
    Ok(BoundaryRow { ebno1_db, ebno2_db: found, report })
}

/// Which reference curve [`reference_row`] traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Capacity,
    Cutoff,
}

/// Boundary of a reference curve on one row.
pub fn reference_row(ebno1_db: f64, range: (f64, f64), alphas: &[f64], rate: f64, which: Reference, tol_db: f64) -> Result<Option<f64>> {
    let label: String = alloc::format!("{which:?} row (E_b/N_0)_1 = {ebno1_db} dB");
    bisect_boundary(&label, range.0, range.1, tol_db, |e2| {
        let p = ChannelPoint::biawgn_ebno_db(&[ebno1_db, e2], alphas, rate)?;
        Ok(match which {
            Reference::Capacity => capacity_converse(&p) != ReferenceVerdict::Unattainable,
            Reference::Cutoff => cutoff_reference(&p) == ReferenceVerdict::Attainable,
        })
    })
}

/// Boundary on the diagonal `(E_b/N_0)_1 = (E_b/N_0)_2 = x` for `verdict(x)`.
pub fn diagonal_boundary(range: (f64, f64), tol_db: f64, verdict: impl FnMut(f64) -> Result<bool>) -> Result<Option<f64>> {
    bisect_boundary("diagonal", range.0, range.1, tol_db, verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::asymptotic::AsymptoticEnsemble;

    #[test]
    fn grids() {
        let c = RegionConfig::default();
        let g = c.delta_grid();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[199], 1.0);
        let s = c.small_delta_grid();
        assert!(s.len() > 600 && s[0] == 1e-3 && (s[s.len() - 1] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn converse_examples() {
        let bsc = |p| MbiosChannel::bsc(p).unwrap();
        let useless = ChannelPoint::new(ParallelChannelSet::new(alloc::vec![bsc(0.5), bsc(0.5)], alloc::vec![0.5, 0.5]).unwrap(), 1.0 / 3.0).unwrap();
        assert_eq!(capacity_converse(&useless), ReferenceVerdict::Unattainable);
        let bec = |e| MbiosChannel::bec(e).unwrap();
        let mixed = ChannelPoint::new(ParallelChannelSet::new(alloc::vec![bec(0.0), bec(1.0)], alloc::vec![0.5, 0.5]).unwrap(), 1.0 / 3.0).unwrap();
        assert_eq!(capacity_converse(&mixed), ReferenceVerdict::Inconclusive);
        let perfect = ChannelPoint::new(ParallelChannelSet::new(alloc::vec![bec(0.0), bec(0.0)], alloc::vec![0.5, 0.5]).unwrap(), 1.0).unwrap();
        assert_eq!(cutoff_reference(&perfect), ReferenceVerdict::Attainable);
    }

    #[test]
    fn perfect_channel_is_attainable() {
        let nsra = AsymptoticEnsemble::nsra(3).unwrap();
        let p = ChannelPoint::new(ParallelChannelSet::single(MbiosChannel::bec(0.0).unwrap()), 1.0 / 3.0).unwrap();
        let rep = check_point_with(&p, |d| nsra.exponent(d), BoundKind::Ds2, true, &RegionConfig::default()).unwrap();
        assert!(rep.attainable, "{rep:?}");
    }

    #[test]
    fn bisection_and_monotonicity() {
        let b = bisect_boundary("t", 0.0, 4.0, 1e-3, |x| Ok(x >= 1.2345)).unwrap().unwrap();
        assert!((b - 1.2345).abs() <= 1e-3);
        assert_eq!(bisect_boundary("t", 0.0, 4.0, 1e-3, |_| Ok(false)).unwrap(), None);
        assert_eq!(bisect_boundary("t", 0.0, 4.0, 1e-3, |_| Ok(true)).unwrap(), Some(0.0));
        let e = bisect_boundary("row 7", 0.0, 4.0, 1e-3, |x| Ok(x < 3.0)).unwrap_err();
        assert_eq!(e.code(), "E_MONOTONE");
    }

    #[test]
    fn missing_coverage_is_rejected() {
        let e = SpectralExponent::from_fn(&[0.01, 0.5, 1.0], |d| d).unwrap();
        let p = ChannelPoint::new(ParallelChannelSet::single(MbiosChannel::bsc(0.01).unwrap()), 0.5).unwrap();
        let err = check_point(&p, &e, BoundKind::Ds2, true, &RegionConfig::default()).unwrap_err();
        assert_eq!(err.code(), "E_CONTRACT");
    }
}
