//! Memoryless binary-input output-symmetric channels and their density tables.
//!
//! Every channel, discrete or continuous, is reduced to a [`DensityTable`]: a
//! weighted point set carrying `p(y|0)` and `p(y|1)`. All bound functionals are
//! weighted sums over such a table, so BSC, BEC and quadrature-discretized
//! BiAWGN share one evaluation path.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use crate::error::{contract, invalid, Result};
use crate::quadrature::{gauss_legendre, QuadratureSpec};

const NORMALIZATION_TOL: f64 = 1e-9;

/// One output point of a discretized channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEntry {
    pub y: f64,
    /// Quadrature weight (1 for discrete alphabets).
    pub weight: f64,
    pub p0: f64,
    pub p1: f64,
    pub ln_w: f64,
    pub ln_p0: f64,
    pub ln_p1: f64,
}

impl DensityEntry {
    fn new(y: f64, weight: f64, p0: f64, p1: f64) -> Self {
        DensityEntry { y, weight, p0, p1, ln_w: ln0(weight), ln_p0: ln0(p0), ln_p1: ln0(p1) }
    }

    fn from_logs(y: f64, weight: f64, ln_p0: f64, ln_p1: f64) -> Self {
        DensityEntry {
            y,
            weight,
            p0: libm::exp(ln_p0),
            p1: libm::exp(ln_p1),
            ln_w: ln0(weight),
            ln_p0,
            ln_p1,
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

/// Discretized output density pair of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    entries: Vec<DensityEntry>,
    /// `mirror[i]` is the index of the output `-y_i`.
    mirror: Vec<usize>,
}

impl DensityTable {
    /// Builds a table from `(y, weight, p0, p1)` rows and the output involution.
    pub fn new(rows: &[(f64, f64, f64, f64)], mirror: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid!("density table needs at least one output"));
        }
        if mirror.len() != rows.len() {
            return Err(invalid!("mirror map has {} entries for {} outputs", mirror.len(), rows.len()));
        }
        for (i, &(_, w, p0, p1)) in rows.iter().enumerate() {
            if !(w >= 0.0 && p0 >= 0.0 && p1 >= 0.0) || !w.is_finite() || !p0.is_finite() || !p1.is_finite() {
                return Err(invalid!("output {i}: weights and densities must be finite and nonnegative"));
            }
        }
        let entries = rows.iter().map(|&(y, w, p0, p1)| DensityEntry::new(y, w, p0, p1)).collect();
        let table = DensityTable { entries, mirror };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        let n = self.entries.len();
        for (i, &m) in self.mirror.iter().enumerate() {
            if m >= n || self.mirror[m] != i {
                return Err(invalid!("mirror map is not an involution at output {i}"));
            }
            let (a, b) = (&self.entries[i], &self.entries[m]);
            let tol = 1e-12 * (a.p0.max(b.p1)).max(1e-300);
            if (a.p0 - b.p1).abs() > tol || (a.weight - b.weight).abs() > 1e-12 * a.weight.max(1e-300) {
                return Err(invalid!("output {i}: p(y|0) != p(-y|1), channel is not output-symmetric"));
            }
        }
        let (s0, s1) = self.masses();
        if (s0 - 1.0).abs() > NORMALIZATION_TOL || (s1 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(invalid!("densities do not normalize: sum p0 = {s0}, sum p1 = {s1}"));
        }
        Ok(())
    }

    pub fn entries(&self) -> &[DensityEntry] {
        &self.entries
    }

    pub fn mirror(&self) -> &[usize] {
        &self.mirror
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(Σ w p0, Σ w p1)`.
    pub fn masses(&self) -> (f64, f64) {
        self.entries.iter().fold((0.0, 0.0), |(a, b), e| (a + e.weight * e.p0, b + e.weight * e.p1))
    }

    /// Same channel with the roles of the inputs exchanged.
    pub fn swapped(&self) -> DensityTable {
        let entries = self
            .entries
            .iter()
            .map(|e| DensityEntry { p0: e.p1, p1: e.p0, ln_p0: e.ln_p1, ln_p1: e.ln_p0, ..*e })
            .collect();
        DensityTable { entries, mirror: self.mirror.clone() }
    }

    /// Bhattacharyya constant `Σ_y sqrt(p(y|0) p(y|1))`.
    pub fn bhattacharyya(&self) -> f64 {
        let g: f64 = self
            .entries
            .iter()
            .filter(|e| e.p0 > 0.0 && e.p1 > 0.0)
            .map(|e| e.weight * libm::exp(0.5 * (e.ln_p0 + e.ln_p1)))
            .sum();
        g.clamp(0.0, 1.0)
    }

    /// Uniform-input mutual information in bits per channel use.
    pub fn capacity_bits(&self) -> f64 {
        let mut acc = 0.0;
        for e in &self.entries {
            let mix = 0.5 * (e.p0 + e.p1);
            if mix <= 0.0 {
                continue;
            }
            let ln_mix = libm::log(mix);
            if e.p0 > 0.0 {
                acc += 0.5 * e.weight * e.p0 * (e.ln_p0 - ln_mix);
            }
            if e.p1 > 0.0 {
                acc += 0.5 * e.weight * e.p1 * (e.ln_p1 - ln_mix);
            }
        }
        (acc / LN_2).clamp(0.0, 1.0)
    }

    /// Cutoff rate `1 - log2(1 + γ)` in bits.
    pub fn cutoff_rate_bits(&self) -> f64 {
        1.0 - libm::log2(1.0 + self.bhattacharyya())
    }
}

/// A memoryless binary-input output-symmetric channel.
#[derive(Debug, Clone, PartialEq)]
pub enum MbiosChannel {
    Bsc { p: f64 },
    Bec { eps: f64 },
    /// BPSK over AWGN with symbol SNR `E_s/N_0` (linear).
    BiAwgn { esno: f64 },
    Tabulated(DensityTable),
}

impl MbiosChannel {
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(invalid!("BSC crossover probability must lie in [0, 1/2], got {p}"));
        }
        Ok(MbiosChannel::Bsc { p })
    }

    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(invalid!("BEC erasure probability must lie in [0, 1], got {eps}"));
        }
        Ok(MbiosChannel::Bec { eps })
    }

    pub fn biawgn(esno: f64) -> Result<Self> {
        if !(esno > 0.0) || !esno.is_finite() {
            return Err(invalid!("BiAWGN symbol SNR must be positive, got {esno}"));
        }
        Ok(MbiosChannel::BiAwgn { esno })
    }

    /// BiAWGN parameterized by `E_b/N_0` in dB at code rate `rate`.
    pub fn biawgn_ebno_db(ebno_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(invalid!("code rate must lie in (0, 1], got {rate}"));
        }
        Self::biawgn(ebno_to_esno(ebno_db, rate))
    }

    pub fn tabulated(table: DensityTable) -> Self {
        MbiosChannel::Tabulated(table)
    }

    /// Realizes the channel as a density table. Discrete kinds ignore `quad`.
    pub fn density_table(&self, quad: &QuadratureSpec) -> Result<DensityTable> {
        match *self {
            MbiosChannel::Bsc { p } => {
                DensityTable::new(&[(1.0, 1.0, 1.0 - p, p), (-1.0, 1.0, p, 1.0 - p)], alloc::vec![1, 0])
            }
            MbiosChannel::Bec { eps } => DensityTable::new(
                &[(1.0, 1.0, 1.0 - eps, 0.0), (0.0, 1.0, eps, eps), (-1.0, 1.0, 0.0, 1.0 - eps)],
                alloc::vec![2, 1, 0],
            ),
            MbiosChannel::BiAwgn { esno } => biawgn_table(esno, quad),
            MbiosChannel::Tabulated(ref t) => Ok(t.clone()),
        }
    }

    /// Bhattacharyya constant using the default quadrature for continuous kinds.
    pub fn bhattacharyya(&self) -> f64 {
        match *self {
            MbiosChannel::Bsc { p } => 2.0 * libm::sqrt(p * (1.0 - p)),
            MbiosChannel::Bec { eps } => eps,
            _ => self.table_or_default().bhattacharyya(),
        }
    }

    pub fn capacity_bits(&self) -> f64 {
        match *self {
            MbiosChannel::Bsc { p } => 1.0 - crate::special::binary_entropy_bits(p),
            MbiosChannel::Bec { eps } => 1.0 - eps,
            _ => self.table_or_default().capacity_bits(),
        }
    }

    pub fn cutoff_rate_bits(&self) -> f64 {
        1.0 - libm::log2(1.0 + self.bhattacharyya())
    }

    fn table_or_default(&self) -> DensityTable {
        // Constructors validate parameters, so realization cannot fail here.
        self.density_table(&QuadratureSpec::default()).expect("validated channel")
    }
}

fn biawgn_table(esno: f64, quad: &QuadratureSpec) -> Result<DensityTable> {
    quad.validate()?;
    let mean = libm::sqrt(2.0 * esno);
    let half_width = mean + quad.half_width_sigmas;
    // one Gauss–Legendre panel per half-line, mirrored through the origin
    let m = quad.nodes / 2;
    let (x, w) = gauss_legendre(m);
    let ln_norm = -0.5 * libm::log(2.0 * PI);
    let scale = 0.5 * half_width;
    let mut ys = Vec::with_capacity(2 * m);
    for i in (0..m).rev() {
        ys.push((-scale * (x[i] + 1.0), scale * w[i]));
    }
    for i in 0..m {
        ys.push((scale * (x[i] + 1.0), scale * w[i]));
    }
    let n = ys.len();
    let entries = ys
        .into_iter()
        .map(|(y, wt)| {
            let d0 = y - mean;
            let d1 = y + mean;
            DensityEntry::from_logs(y, wt, ln_norm - 0.5 * d0 * d0, ln_norm - 0.5 * d1 * d1)
        })
        .collect();
    let mirror = (0..n).rev().collect();
    let table = DensityTable { entries, mirror };
    table.validate()?;
    Ok(table)
}

/// `E_s/N_0 = R · E_b/N_0`, linear.
pub fn ebno_to_esno(ebno_db: f64, rate: f64) -> f64 {
    rate * libm::pow(10.0, ebno_db / 10.0)
}

/// Inverse of [`ebno_to_esno`], in dB.
pub fn esno_to_ebno_db(esno: f64, rate: f64) -> f64 {
    10.0 * libm::log10(esno / rate)
}

/// `J` channels and the probabilities with which a code bit is mapped to each.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelChannelSet {
    channels: Vec<MbiosChannel>,
    alphas: Vec<f64>,
}

impl ParallelChannelSet {
    pub fn new(channels: Vec<MbiosChannel>, alphas: Vec<f64>) -> Result<Self> {
        if channels.is_empty() {
            return Err(invalid!("a channel set needs at least one channel"));
        }
        if channels.len() != alphas.len() {
            return Err(invalid!("{} channels but {} assignment probabilities", channels.len(), alphas.len()));
        }
        if alphas.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(invalid!("assignment probabilities must be nonnegative"));
        }
        let total: f64 = alphas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid!("assignment probabilities sum to {total}, expected 1"));
        }
        Ok(ParallelChannelSet { channels, alphas })
    }

    pub fn single(channel: MbiosChannel) -> Self {
        ParallelChannelSet { channels: alloc::vec![channel], alphas: alloc::vec![1.0] }
    }

    pub fn channels(&self) -> &[MbiosChannel] {
        &self.channels
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn discretize(&self, quad: &QuadratureSpec) -> Result<ParallelDensities> {
        let tables = self.channels.iter().map(|c| c.density_table(quad)).collect::<Result<Vec<_>>>()?;
        ParallelDensities::new(tables, self.alphas.clone())
    }

    /// `Σ_j α_j C_j` in bits.
    pub fn average_capacity_bits(&self) -> f64 {
        self.channels.iter().zip(&self.alphas).map(|(c, a)| a * c.capacity_bits()).sum()
    }

    /// `Σ_j α_j R0_j` in bits.
    pub fn average_cutoff_rate_bits(&self) -> f64 {
        self.channels.iter().zip(&self.alphas).map(|(c, a)| a * c.cutoff_rate_bits()).sum()
    }
}

/// Density tables of a channel set, ready for bound evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelDensities {
    tables: Vec<DensityTable>,
    alphas: Vec<f64>,
}

impl ParallelDensities {
    pub fn new(tables: Vec<DensityTable>, alphas: Vec<f64>) -> Result<Self> {
        if tables.is_empty() || tables.len() != alphas.len() {
            return Err(contract!("need one assignment probability per table"));
        }
        let total: f64 = alphas.iter().sum();
        if (total - 1.0).abs() > 1e-12 || alphas.iter().any(|&a| a < 0.0) {
            return Err(invalid!("assignment probabilities must be nonnegative and sum to 1"));
        }
        Ok(ParallelDensities { tables, alphas })
    }

    pub fn tables(&self) -> &[DensityTable] {
        &self.tables
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn bhattacharyyas(&self) -> Vec<f64> {
        self.tables.iter().map(DensityTable::bhattacharyya).collect()
    }

    /// `Σ_j α_j γ_j`.
    pub fn mixed_bhattacharyya(&self) -> f64 {
        self.tables.iter().zip(&self.alphas).map(|(t, a)| a * t.bhattacharyya()).sum()
    }

    /// Same set with channel order permuted: `perm[i]` is the old index of new channel `i`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        ParallelDensities {
            tables: perm.iter().map(|&i| self.tables[i].clone()).collect(),
            alphas: perm.iter().map(|&i| self.alphas[i]).collect(),
        }
    }
}
