//! The five subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use parbound_core::ds2::{self, Ds2Config, Ds2Context};
use parbound_core::g61::{self, G61Config, G61Context};
use parbound_core::oracle::{exhaustive_iowe, Assignment, ExplicitCode, MlSimulator, MlTrialResult};
use parbound_core::regions::{
    diagonal_boundary, reference_row, trace_row, BoundKind, ChannelPoint, Reference, RegionConfig,
};
use parbound_core::spectra::{exponent_of, to_distance, DEFAULT_CELL_BUDGET};
use parbound_core::{DistanceSpectrum, Iowe, MbiosChannel, SpectralExponent, Weighting};
use rayon::prelude::*;

use crate::config::{
    self, fixed_map, AssignmentMode, AssignmentSpec, BoundConfig, BoundType, ChannelSetConfig, CodeSpec,
    ExponentSource, OracleConfig, RegionScanConfig, SpectrumConfig,
};
use crate::error::{CliError, Result};
use crate::output::{self, db, fixed, log10p, sci, Manifest, RunManifest, Table};

/// Trials per parallel work unit of the oracle.
pub const ORACLE_CHUNK: u64 = 4096;

/// Unstable threshold of the Richardson extrapolation, nats per symbol.
pub const RICHARDSON_UNSTABLE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Channels,
    Spectrum,
    Bound,
    Region,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Channels => "channels",
            Command::Spectrum => "spectrum",
            Command::Bound => "bound",
            Command::Region => "region",
            Command::Oracle => "oracle",
        }
    }
}

/// Command line overrides of the oracle configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleOverrides {
    pub code: Option<PathBuf>,
    pub channels: Option<PathBuf>,
    pub trials: Option<u64>,
    pub assignment: Option<AssignmentMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub oracle: OracleOverrides,
}

impl Invocation {
    pub fn new(command: Command, config: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Invocation { command, config: config.into(), out: out.into(), seed: None, oracle: OracleOverrides::default() }
    }

    fn base(&self) -> PathBuf {
        self.config.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        if let Some(s) = self.seed {
            o.push(("seed", s.to_string()));
        }
        let x = &self.oracle;
        if let Some(p) = &x.code {
            o.push(("code", p.display().to_string()));
        }
        if let Some(p) = &x.channels {
            o.push(("channels", p.display().to_string()));
        }
        if let Some(t) = x.trials {
            o.push(("trials", t.to_string()));
        }
        if let Some(a) = x.assignment {
            o.push(("assignment", format!("{a:?}").to_lowercase()));
        }
        o
    }
}

/// Runs one command; returns the written files, the run manifest last.
pub fn run(inv: &Invocation) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    std::fs::create_dir_all(&inv.out).map_err(|e| CliError::io(&inv.out, e))?;
    let bytes = std::fs::read(&inv.config).map_err(|e| CliError::io(&inv.config, e))?;
    let manifest = Manifest::new(inv.command.name(), &bytes, &inv.overrides());
    let tables = match inv.command {
        Command::Channels => channels(inv, &bytes, &manifest)?,
        Command::Spectrum => spectrum(inv, &bytes, &manifest)?,
        Command::Bound => bound(inv, &bytes, &manifest)?,
        Command::Region => region(inv, &bytes, &manifest)?,
        Command::Oracle => oracle(inv, &bytes, &manifest)?,
    };
    let mut written = Vec::with_capacity(tables.len() + 1);
    for (name, table) in tables {
        let p = inv.out.join(name);
        table.write(&p)?;
        written.push(p);
    }
    let m = RunManifest::new(&manifest, start.elapsed(), &written).write(&inv.out)?;
    written.push(m);
    Ok(written)
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| CliError::config(path, e))
}

fn channels(inv: &Invocation, bytes: &[u8], m: &Manifest) -> Result<Vec<(String, Table)>> {
    let cfg: ChannelSetConfig = parse(&inv.config, bytes)?;
    let set = cfg.build(None)?;
    let mut t = Table::new(m, &["j", "kind", "alpha", "esno_db", "gamma", "capacity_bits", "cutoff_rate_bits"]);
    for (j, ((spec, ch), &a)) in cfg.channels.iter().zip(set.channels()).zip(set.alphas()).enumerate() {
        let esno_db = match ch {
            MbiosChannel::BiAwgn { esno } => 10.0 * esno.log10(),
            _ => f64::NAN,
        };
        t.row(vec![
            (j + 1).to_string(),
            spec.kind().into(),
            fixed(a),
            db(esno_db),
            fixed(ch.bhattacharyya()),
            fixed(ch.capacity_bits()),
            fixed(ch.cutoff_rate_bits()),
        ]);
    }
    t.comment(format!(
        "average capacity_bits={} cutoff_rate_bits={}",
        fixed(set.average_capacity_bits()),
        fixed(set.average_cutoff_rate_bits())
    ));
    Ok(vec![("channels.csv".into(), t)])
}

/// Distance spectrum of a code description, and its IOWE where defined.
pub fn code_spectrum(
    spec: &CodeSpec,
    base: &Path,
    weighting: Weighting,
    budget: Option<u128>,
) -> Result<(DistanceSpectrum, Option<Iowe>)> {
    if let CodeSpec::Ensemble(e) = spec {
        let iowe = e.ensemble()?.iowe(budget.unwrap_or(DEFAULT_CELL_BUDGET))?;
        return Ok((to_distance(&iowe, weighting), Some(iowe)));
    }
    if let CodeSpec::Generator { generator } = spec {
        let rows = generator
            .iter()
            .map(|s| config::parse_bits(s).map_err(|e| CliError::config(base, e)))
            .collect::<Result<Vec<_>>>()?;
        let code = ExplicitCode::from_generator(&rows)?;
        let (k, n) = (rows.len(), code.block_length());
        let iowe = exhaustive_iowe(k, n, |u| {
            let mut c = vec![0u8; n];
            for (row, &b) in rows.iter().zip(u) {
                if b == 1 {
                    c.iter_mut().zip(row).for_each(|(x, &g)| *x ^= g);
                }
            }
            Ok(c)
        })?;
        return Ok((to_distance(&iowe, weighting), Some(iowe)));
    }
    let code = spec.explicit(base)?.expect("explicit code variant");
    if weighting == Weighting::Bit {
        return Err(CliError::config(base, "bit weighting needs an encoder: give a generator or an ensemble"));
    }
    Ok((code.spectrum()?, None))
}

fn spectrum(inv: &Invocation, bytes: &[u8], m: &Manifest) -> Result<Vec<(String, Table)>> {
    let cfg: SpectrumConfig = parse(&inv.config, bytes)?;
    let (s, iowe) = code_spectrum(&cfg.code, &inv.base(), cfg.weighting.weighting(), cfg.cell_budget)?;
    let mut out = vec![("spectrum.csv".to_string(), output::spectrum_table(m, &s))];
    if cfg.iowe {
        let iowe = iowe.ok_or_else(|| CliError::config(&inv.config, "no IOWE for a code given by its codewords"))?;
        out.push(("iowe.csv".into(), output::iowe_table(m, &iowe)));
    }
    Ok(out)
}

/// Search settings of both optimized bounds after applying `optimizer`.
pub fn bound_configs(cfg: &BoundConfig) -> (Ds2Config, G61Config) {
    let mut d = Ds2Config::default();
    let mut g = G61Config::default();
    if let Some(o) = cfg.optimizer {
        if let Some(t) = o.tol {
            d.grid.tol = t;
            g.grid.tol = t;
        }
        if let Some(t) = o.fixed_point_tol {
            d.fixed_point.tol = t;
        }
        if let Some(p) = o.prune_nats {
            d.prune_nats = p;
            g.prune_nats = p;
        }
    }
    (d, g)
}

/// One sweep point of the `bound` command.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub sweep_value: f64,
    pub union: Option<f64>,
    pub ds2: Option<ds2::SubcodeTotal>,
    pub g61: Option<g61::G61Total>,
}

/// Evaluates the requested bounds at every sweep point, in parallel over points.
pub fn bound_rows(
    channels: &ChannelSetConfig,
    spectrum: &DistanceSpectrum,
    sweep: Option<(usize, Vec<f64>)>,
    types: &[BoundType],
    d2: &Ds2Config,
    gc: &G61Config,
) -> parbound_core::Result<Vec<BoundRow>> {
    let rate = spectrum.info_length() as f64 / spectrum.block_length() as f64;
    let quad = channels.quadrature_spec()?;
    let (idx, values) = match sweep {
        Some((i, v)) => (i, v),
        None => (0, vec![channels.channels[0].value()]),
    };
    if idx >= channels.channels.len() {
        return Err(parbound_core::Error::InvalidParameter(format!(
            "sweep channel {} of {}",
            idx + 1,
            channels.channels.len()
        )));
    }
    values
        .par_iter()
        .map(|&v| {
            let mut c = channels.clone();
            c.channels[idx] = c.channels[idx].with_value(v);
            let dens = c.build(Some(rate))?.discretize(&quad)?;
            let union = types.contains(&BoundType::Union).then(|| ds2::union_bhattacharyya(&dens, spectrum));
            let ds2 = types.contains(&BoundType::Ds2).then(|| ds2::total_with_context(&Ds2Context::new(&dens), spectrum, d2));
            let g61 = types.contains(&BoundType::G61).then(|| g61::total_with_context(&G61Context::new(&dens), spectrum, gc));
            Ok(BoundRow { sweep_value: v, union, ds2, g61 })
        })
        .collect()
}

fn bound(inv: &Invocation, bytes: &[u8], m: &Manifest) -> Result<Vec<(String, Table)>> {
    let cfg: BoundConfig = parse(&inv.config, bytes)?;
    let base = inv.base();
    let channels = cfg.channels.resolve(&base)?;
    let weighting = cfg.error.weighting();
    let spectrum = match (&cfg.code, &cfg.spectrum) {
        (Some(code), None) => code_spectrum(code, &base, weighting, cfg.cell_budget)?.0,
        (None, Some(p)) => {
            let s = output::read_spectrum(&base.join(p))?;
            if s.weighting() != weighting {
                return Err(CliError::config(p, format!("spectrum is {}-weighted", output::weighting_name(s.weighting()))));
            }
            s
        }
        _ => return Err(CliError::config(&inv.config, "give exactly one of `code` and `spectrum`")),
    };
    let sweep = match &cfg.sweep {
        Some(s) => {
            if s.channel == 0 {
                return Err(CliError::config(&inv.config, "sweep channels are numbered from 1"));
            }
            Some((s.channel - 1, s.values.values().map_err(|e| CliError::config(&inv.config, e))?))
        }
        None => None,
    };
    let types = cfg.bound_type.to_vec();
    let (d2, gc) = bound_configs(&cfg);
    let rows = bound_rows(&channels, &spectrum, sweep, &types, &d2, &gc)?;
    let j = channels.channels.len();
    let info = format!("n={} K={} error={}", spectrum.block_length(), spectrum.info_length(), cfg.error.name());
    let mut out = Vec::new();
    for ty in types {
        let mut header = vec!["sweep_value".to_string(), "log10_bound".to_string()];
        match ty {
            BoundType::Union => {}
            BoundType::Ds2 => {
                header.extend(["lambda", "rho", "k"].map(String::from));
                header.extend((1..=j).map(|i| format!("beta_{i}")));
                header.push("converged".into());
            }
            BoundType::G61 => header.extend(["rho", "s", "c", "converged"].map(String::from)),
        }
        let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut t = Table::new(m, &hdr);
        t.comment(format!("type={} {info}", ty.name()));
        for r in &rows {
            let mut f = vec![sweep_field(&channels, sweep_index(&cfg), r.sweep_value)];
            match ty {
                BoundType::Union => f.push(log10p(r.union.unwrap())),
                BoundType::Ds2 => {
                    let total = r.ds2.as_ref().unwrap();
                    f.push(log10p(total.log_bound));
                    match total.dominant().and_then(|t| t.point.as_ref()) {
                        Some(p) => {
                            f.extend([fixed(p.params.lambda), fixed(p.params.rho), sci(p.solution.k)]);
                            f.extend(p.solution.betas.iter().map(|&b| sci(b)));
                        }
                        None => f.extend(std::iter::repeat_n("nan".to_string(), 3 + j)),
                    }
                    f.push(total.all_converged().to_string());
                }
                BoundType::G61 => {
                    let total = r.g61.as_ref().unwrap();
                    f.push(log10p(total.log_bound));
                    match total.dominant().and_then(|t| t.point.as_ref()) {
                        Some(p) => f.extend([fixed(p.params.rho), fixed(p.params.s), fixed(p.params.c)]),
                        None => f.extend(std::iter::repeat_n("nan".to_string(), 3)),
                    }
                    f.push("true".into());
                }
            }
            t.row(f);
        }
        out.push((format!("bound_{}.csv", ty.name()), t));
    }
    Ok(out)
}

fn sweep_index(cfg: &BoundConfig) -> usize {
    cfg.sweep.as_ref().map_or(0, |s| s.channel - 1)
}

/// dB sweeps print with 4 decimals, probabilities with 6.
fn sweep_field(channels: &ChannelSetConfig, idx: usize, v: f64) -> String {
    match channels.channels.get(idx) {
        Some(config::ChannelSpec::Biawgn { .. }) => db(v),
        _ => fixed(v),
    }
}

/// `r(δ)` for the region test and the extrapolation residual, if any.
pub fn region_exponent(cfg: &RegionScanConfig, grid: &[f64]) -> Result<(SpectralExponent, Option<f64>)> {
    match cfg.exponent {
        ExponentSource::Asymptotic => Ok((cfg.ensemble.asymptotic()?.sample(grid)?, None)),
        ExponentSource::Richardson { n } => {
            let curve = |len: usize| -> Result<SpectralExponent> {
                let iowe = cfg.ensemble.with_length(len).ensemble()?.iowe(DEFAULT_CELL_BUDGET)?;
                Ok(exponent_of(&to_distance(&iowe, Weighting::Block)))
            };
            let (coarse, fine) = (curve(n)?, curve(2 * n)?);
            let (e, residual) = SpectralExponent::richardson(&coarse, &fine, grid, RICHARDSON_UNSTABLE)?;
            Ok((e, Some(residual)))
        }
    }
}

pub fn region_config(cfg: &RegionScanConfig) -> Result<RegionConfig> {
    Ok(RegionConfig {
        delta_points: cfg.delta_points,
        delta_min: cfg.delta_min,
        quadrature: config::QuadratureConfig::spec(cfg.quadrature)?,
        tol_db: cfg.tol_db,
        ..RegionConfig::default()
    })
}

fn bound_kind(path: &Path, t: BoundType) -> Result<BoundKind> {
    match t {
        BoundType::Ds2 => Ok(BoundKind::Ds2),
        BoundType::G61 => Ok(BoundKind::G61),
        BoundType::Union => Err(CliError::config(path, "region scans use the ds2 or g61 bound")),
    }
}

fn opt_db(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), db)
}

fn region(inv: &Invocation, bytes: &[u8], m: &Manifest) -> Result<Vec<(String, Table)>> {
    let cfg: RegionScanConfig = parse(&inv.config, bytes)?;
    let kind = bound_kind(&inv.config, cfg.bound_type)?;
    let rc = region_config(&cfg)?;
    let asym = cfg.ensemble.asymptotic()?;
    let rate = cfg.rate.unwrap_or_else(|| asym.rate());
    let declared = cfg.ensemble.declares_regular_growth();
    let (exponent, residual) = region_exponent(&cfg, &rc.sampling_grid())?;
    let (lo, hi) = exponent.coverage();
    if lo > rc.delta_min * (1.0 + 1e-9) || hi < 1.0 - 1e-9 {
        return Err(parbound_core::Error::Contract(format!("exponent covers δ ∈ [{lo}, {hi}]")).into());
    }
    let range = (cfg.range[0], cfg.range[1]);
    let r = |d: f64| exponent.at(d).unwrap_or(f64::NEG_INFINITY);
    let rows = cfg
        .rows
        .par_iter()
        .map(|&e1| trace_row(e1, range, &cfg.alphas, rate, &r, kind, declared, &rc))
        .collect::<parbound_core::Result<Vec<_>>>()?;

    let source = match residual {
        Some(res) => format!("exponent=richardson residual={}", sci(res)),
        None => "exponent=asymptotic".to_string(),
    };
    let mut t = Table::new(m, &["ebno1_db", "ebno2_db_boundary", "margin_cond1", "margin_cond2", "argmin_delta"]);
    t.comment(format!("type={} rate={} {source}", kind.name(), fixed(rate)));
    for row in &rows {
        let (m1, m2, d) = row.report.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |r| {
            (r.margin_cond1, r.margin_cond2, r.argmin_delta)
        });
        t.row(vec![db(row.ebno1_db), opt_db(row.ebno2_db), sci(m1), sci(m2), fixed(d)]);
    }

    let refs = cfg
        .rows
        .par_iter()
        .map(|&e1| {
            let cap = reference_row(e1, range, &cfg.alphas, rate, Reference::Capacity, rc.tol_db)?;
            let cut = reference_row(e1, range, &cfg.alphas, rate, Reference::Cutoff, rc.tol_db)?;
            Ok((e1, cap, cut))
        })
        .collect::<parbound_core::Result<Vec<_>>>()?;
    let mut rt = Table::new(m, &["ebno1_db", "capacity_db", "cutoff_db"]);
    for (e1, cap, cut) in refs {
        rt.row(vec![db(e1), opt_db(cap), opt_db(cut)]);
    }
    let mut out = vec![(format!("region_{}.csv", kind.name()), t), ("region_reference.csv".into(), rt)];

    if let Some(dg) = &cfg.diagonal {
        let tol = dg.tol_db.unwrap_or(rc.tol_db);
        let d = diagonal(&cfg.alphas, rate, (dg.range[0], dg.range[1]), tol, &r, kind, declared, &rc)?;
        let mut dt = Table::new(m, &["boundary_db", "capacity_db", "gap_db", "gap_below_0.05_db"]);
        dt.comment(format!("type={} {source}", kind.name()));
        dt.row(vec![opt_db(d.boundary), opt_db(d.capacity), opt_db(d.gap()), d.gap().map_or("nan".into(), |g| (g < 0.05).to_string())]);
        out.push(("region_diagonal.csv".into(), dt));
    }
    Ok(out)
}

/// Equal-`E_b/N_0` boundary of an ensemble and of the capacity limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagonal {
    pub boundary: Option<f64>,
    pub capacity: Option<f64>,
}

impl Diagonal {
    pub fn gap(&self) -> Option<f64> {
        Some(self.boundary? - self.capacity?)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn diagonal(
    alphas: &[f64],
    rate: f64,
    range: (f64, f64),
    tol_db: f64,
    r: &(dyn Fn(f64) -> f64 + Sync),
    kind: BoundKind,
    declared: bool,
    rc: &RegionConfig,
) -> parbound_core::Result<Diagonal> {
    let point = |e: f64| ChannelPoint::biawgn_ebno_db(&vec![e; alphas.len()], alphas, rate);
    let capacity = diagonal_boundary(range, tol_db, |e| {
        Ok(parbound_core::regions::capacity_converse(&point(e)?) != parbound_core::regions::ReferenceVerdict::Unattainable)
    })?;
    let mut quick = rc.clone();
    quick.early_exit = true;
    let boundary = diagonal_boundary(range, tol_db, |e| {
        Ok(parbound_core::regions::check_point_with(&point(e)?, r, kind, declared, &quick)?.attainable)
    })?;
    Ok(Diagonal { boundary, capacity })
}

fn oracle(inv: &Invocation, bytes: &[u8], m: &Manifest) -> Result<Vec<(String, Table)>> {
    let mut cfg: OracleConfig = parse(&inv.config, bytes)?;
    let base = inv.base();
    let x = &inv.oracle;
    if let Some(p) = &x.code {
        cfg.code = CodeSpec::File { code_file: p.clone() };
    }
    if let Some(p) = &x.channels {
        cfg.channels = config::Inline::Path(p.clone());
    }
    if let Some(t) = x.trials {
        cfg.trials = t;
    }
    if let Some(a) = x.assignment {
        cfg.assignment = AssignmentSpec::Mode(a);
    }
    let code = match (&x.code, cfg.code.explicit(&base)?) {
        (Some(p), _) => config::read_code_file(p)?,
        (None, Some(c)) => c,
        (None, None) => return Err(CliError::config(&inv.config, "the oracle needs an explicit code")),
    };
    let channels = match &x.channels {
        Some(p) => config::load::<ChannelSetConfig>(p)?.0,
        None => cfg.channels.resolve(&base)?,
    };
    let set = channels.build(Some(code.rate()))?;
    let assignment = match &cfg.assignment {
        AssignmentSpec::Mode(AssignmentMode::Random) => Assignment::Random,
        AssignmentSpec::Mode(AssignmentMode::Fixed) => Assignment::Fixed(fixed_map(set.alphas(), code.block_length())),
        AssignmentSpec::Map(v) => Assignment::Fixed(v.clone()),
    };
    let seed = inv.seed.or(cfg.seed).unwrap_or(0);
    let result = simulate(code, &set, assignment, cfg.trials, seed)?;
    let mut t = Table::new(m, &["trials", "errors", "estimate", "ci_lo", "ci_hi"]);
    t.comment(format!("seed={seed}"));
    t.row(vec![
        result.trials.to_string(),
        result.errors.to_string(),
        sci(result.estimate),
        sci(result.ci_lo),
        sci(result.ci_hi),
    ]);
    Ok(vec![("oracle.csv".into(), t)])
}

/// Monte-Carlo ML decoding, parallel over fixed chunks of trials.
pub fn simulate(
    code: ExplicitCode,
    set: &parbound_core::ParallelChannelSet,
    assignment: Assignment,
    trials: u64,
    seed: u64,
) -> Result<MlTrialResult> {
    let sim = MlSimulator::new(code, set, assignment, seed)?;
    let chunks = trials.div_ceil(ORACLE_CHUNK);
    let errors: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| sim.count(c * ORACLE_CHUNK..((c + 1) * ORACLE_CHUNK).min(trials)))
        .sum();
    Ok(MlTrialResult::from_counts(trials, errors))
}
