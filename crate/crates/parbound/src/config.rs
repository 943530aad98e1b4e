//! JSON configuration files.

use std::path::{Path, PathBuf};

use parbound_core::oracle::ExplicitCode;
use parbound_core::spectra::asymptotic::AsymptoticEnsemble;
use parbound_core::spectra::ensembles::Ensemble;
use parbound_core::spectra::Fsm;
use parbound_core::{MbiosChannel, ParallelChannelSet, QuadratureSpec, Weighting};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const DEFAULT_TURBO_GENERATOR: &str = "[1,(1+D^4)/(1+D+D^2+D^3+D^4)]";

/// Reads and parses a JSON file; returns the value and the raw bytes.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::config(path, e))?;
    Ok((value, bytes))
}

/// Either an inline value or a path to a JSON file holding it, resolved
/// against the directory of the referring file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Inline<T> {
    Path(PathBuf),
    Value(T),
}

impl<T: DeserializeOwned + Clone> Inline<T> {
    pub fn resolve(&self, base: &Path) -> Result<T> {
        match self {
            Inline::Value(v) => Ok(v.clone()),
            Inline::Path(p) => Ok(load(&base.join(p))?.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Biawgn {
        #[serde(default)]
        ebno_db: Option<f64>,
        #[serde(default)]
        esno_db: Option<f64>,
    },
    Bsc {
        p: f64,
    },
    Bec {
        eps: f64,
    },
}

impl ChannelSpec {
    pub fn build(&self, rate: Option<f64>) -> parbound_core::Result<MbiosChannel> {
        match *self {
            ChannelSpec::Bsc { p } => MbiosChannel::bsc(p),
            ChannelSpec::Bec { eps } => MbiosChannel::bec(eps),
            ChannelSpec::Biawgn { ebno_db: Some(e), esno_db: None } => match rate {
                Some(r) => MbiosChannel::biawgn_ebno_db(e, r),
                None => Err(parbound_core::Error::InvalidParameter("E_b/N_0 needs a code rate".into())),
            },
            ChannelSpec::Biawgn { ebno_db: None, esno_db: Some(e) } => MbiosChannel::biawgn(10f64.powf(e / 10.0)),
            ChannelSpec::Biawgn { .. } => {
                Err(parbound_core::Error::InvalidParameter("give exactly one of ebno_db and esno_db".into()))
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChannelSpec::Biawgn { .. } => "biawgn",
            ChannelSpec::Bsc { .. } => "bsc",
            ChannelSpec::Bec { .. } => "bec",
        }
    }

    /// The parameter a sweep varies: `ebno_db`, `esno_db`, `p` or `eps`.
    pub fn with_value(&self, v: f64) -> ChannelSpec {
        match *self {
            ChannelSpec::Biawgn { esno_db: Some(_), .. } => ChannelSpec::Biawgn { ebno_db: None, esno_db: Some(v) },
            ChannelSpec::Biawgn { .. } => ChannelSpec::Biawgn { ebno_db: Some(v), esno_db: None },
            ChannelSpec::Bsc { .. } => ChannelSpec::Bsc { p: v },
            ChannelSpec::Bec { .. } => ChannelSpec::Bec { eps: v },
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            ChannelSpec::Biawgn { ebno_db, esno_db } => ebno_db.or(esno_db).unwrap_or(f64::NAN),
            ChannelSpec::Bsc { p } => p,
            ChannelSpec::Bec { eps } => eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub nodes: usize,
    #[serde(default = "default_width")]
    pub half_width_sigmas: f64,
}

fn default_width() -> f64 {
    QuadratureSpec::default().half_width_sigmas
}

impl QuadratureConfig {
    pub fn spec(q: Option<QuadratureConfig>) -> parbound_core::Result<QuadratureSpec> {
        let mut s = QuadratureSpec::default();
        if let Some(q) = q {
            s.nodes = q.nodes;
            s.half_width_sigmas = q.half_width_sigmas;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSetConfig {
    pub channels: Vec<ChannelSpec>,
    /// Defaults to equal fractions.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    /// Code rate used to convert `E_b/N_0` to `E_s/N_0`.
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
}

impl ChannelSetConfig {
    pub fn alphas(&self) -> Vec<f64> {
        self.alphas.clone().unwrap_or_else(|| vec![1.0 / self.channels.len() as f64; self.channels.len()])
    }

    /// `rate` is used when the file does not fix one.
    pub fn build(&self, rate: Option<f64>) -> parbound_core::Result<ParallelChannelSet> {
        let rate = self.rate.or(rate);
        let chans = self.channels.iter().map(|c| c.build(rate)).collect::<parbound_core::Result<Vec<_>>>()?;
        ParallelChannelSet::new(chans, self.alphas())
    }

    pub fn quadrature_spec(&self) -> parbound_core::Result<QuadratureSpec> {
        QuadratureConfig::spec(self.quadrature)
    }
}

/// Ensemble description, e.g. `{"ensemble":"spra","N":1024,"p":3,"q":6}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "ensemble", rename_all = "lowercase", deny_unknown_fields)]
pub enum EnsembleSpec {
    Nsra {
        #[serde(rename = "N")]
        n: usize,
        q: usize,
    },
    Spra {
        #[serde(rename = "N")]
        n: usize,
        p: usize,
        q: usize,
    },
    Spara {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "M")]
        m: usize,
        p: usize,
        q: usize,
    },
    Turbo {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "G", default)]
        g: Option<String>,
    },
    /// Binomial spectrum of random linear codes; regions only.
    #[serde(rename = "random")]
    RandomCoding { rate: f64 },
}

impl EnsembleSpec {
    pub fn ensemble(&self) -> parbound_core::Result<Ensemble> {
        Ok(match self {
            &EnsembleSpec::Nsra { n, q } => Ensemble::Nsra { n, q },
            &EnsembleSpec::Spra { n, p, q } => Ensemble::Spra { n, p, q },
            &EnsembleSpec::Spara { n, m, p, q } => Ensemble::Spara { n, m, p, q },
            EnsembleSpec::Turbo { n, g } => {
                Ensemble::Turbo { k: *n, rsc: Fsm::from_generator_str(g.as_deref().unwrap_or(DEFAULT_TURBO_GENERATOR))? }
            }
            EnsembleSpec::RandomCoding { .. } => {
                return Err(parbound_core::Error::InvalidParameter(
                    "the random-coding ensemble has no finite-length enumerator".into(),
                ))
            }
        })
    }

    pub fn asymptotic(&self) -> parbound_core::Result<AsymptoticEnsemble> {
        match *self {
            EnsembleSpec::RandomCoding { rate } => AsymptoticEnsemble::random_coding(rate),
            _ => self.ensemble()?.asymptotic(),
        }
    }

    /// Whether the region test may take conditions 3 and 4 as given.
    pub fn declares_regular_growth(&self) -> bool {
        match self {
            EnsembleSpec::RandomCoding { .. } => true,
            _ => self.ensemble().map(|e| e.declares_regular_growth()).unwrap_or(false),
        }
    }

    pub fn with_length(&self, len: usize) -> EnsembleSpec {
        let mut e = self.clone();
        match &mut e {
            EnsembleSpec::Nsra { n, .. } | EnsembleSpec::Spra { n, .. } | EnsembleSpec::Turbo { n, .. } => *n = len,
            EnsembleSpec::Spara { n, m, .. } => {
                *m = (*m as f64 * len as f64 / *n as f64).round() as usize;
                *n = len;
            }
            EnsembleSpec::RandomCoding { .. } => {}
        }
        e
    }
}

/// A code given as an ensemble, a generator matrix, explicit codewords or a
/// code file (one codeword per line, `0`/`1` text).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CodeSpec {
    Ensemble(EnsembleSpec),
    Generator {
        generator: Vec<String>,
    },
    Codewords {
        codewords: Vec<String>,
    },
    File {
        code_file: PathBuf,
    },
}

pub fn parse_bits(line: &str) -> std::result::Result<Vec<u8>, String> {
    line.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(format!("unexpected character '{c}' in codeword")),
        })
        .collect()
}

/// Reads a code file: one codeword per line, blank lines and `#` comments
/// ignored.
pub fn read_code_file(path: &Path) -> Result<ExplicitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let words = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_bits)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|m| CliError::config(path, m))?;
    Ok(ExplicitCode::new(words)?)
}

impl CodeSpec {
    /// The explicit code, for every variant but ensembles.
    pub fn explicit(&self, base: &Path) -> Result<Option<ExplicitCode>> {
        let rows = |v: &[String]| -> Result<Vec<Vec<u8>>> {
            v.iter().map(|s| parse_bits(s).map_err(|m| CliError::config(base, m))).collect()
        };
        Ok(match self {
            CodeSpec::Ensemble(_) => None,
            CodeSpec::Generator { generator } => Some(ExplicitCode::from_generator(&rows(generator)?)?),
            CodeSpec::Codewords { codewords } => Some(ExplicitCode::new(rows(codewords)?)?),
            CodeSpec::File { code_file } => Some(read_code_file(&base.join(code_file))?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorType {
    Block,
    Bit,
}

impl ErrorType {
    pub fn weighting(self) -> Weighting {
        match self {
            ErrorType::Block => Weighting::Block,
            ErrorType::Bit => Weighting::Bit,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorType::Block => "block",
            ErrorType::Bit => "bit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub code: CodeSpec,
    #[serde(default = "block", alias = "error")]
    pub weighting: ErrorType,
    /// Also write the input-output weight enumerator.
    #[serde(default)]
    pub iowe: bool,
    #[serde(default)]
    pub cell_budget: Option<u128>,
}

fn block() -> ErrorType {
    ErrorType::Block
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundType {
    Union,
    Ds2,
    G61,
}

impl BoundType {
    pub fn name(self) -> &'static str {
        match self {
            BoundType::Union => "union",
            BoundType::Ds2 => "ds2",
            BoundType::G61 => "g61",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Values of the swept parameter: an explicit list or `from..=to` by `step`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    List(Vec<f64>),
    Range { from: f64, to: f64, step: f64 },
}

impl SweepValues {
    pub fn values(&self) -> std::result::Result<Vec<f64>, String> {
        match *self {
            SweepValues::List(ref v) => Ok(v.clone()),
            SweepValues::Range { from, to, step } => {
                if !(step > 0.0) || !(to >= from) {
                    return Err("sweep range needs step > 0 and to >= from".into());
                }
                let count = ((to - from) / step + 1e-9).floor() as usize + 1;
                Ok((0..count).map(|i| from + step * i as f64).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// 1-based index of the swept channel.
    pub channel: usize,
    pub values: SweepValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Search tolerance in the optimized parameters.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Fixed-point tolerance for the tilting measures.
    #[serde(default)]
    pub fixed_point_tol: Option<f64>,
    #[serde(default)]
    pub prune_nats: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    #[serde(default)]
    pub code: Option<CodeSpec>,
    /// Spectrum CSV written by the `spectrum` command.
    #[serde(default)]
    pub spectrum: Option<PathBuf>,
    pub channels: Inline<ChannelSetConfig>,
    #[serde(default = "block")]
    pub error: ErrorType,
    #[serde(rename = "type", default = "all_bounds")]
    pub bound_type: OneOrMany<BoundType>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub optimizer: Option<OptimizerConfig>,
    #[serde(default)]
    pub cell_budget: Option<u128>,
}

fn all_bounds() -> OneOrMany<BoundType> {
    OneOrMany::Many(vec![BoundType::Union, BoundType::Ds2, BoundType::G61])
}

/// How the region test obtains `r(δ)`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ExponentSource {
    /// Large-N closed form of the ensemble.
    Asymptotic,
    /// `2 r_{2N} - r_N` from exact spectra at `N` and `2N`.
    Richardson { n: usize },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalConfig {
    pub range: [f64; 2],
    #[serde(default)]
    pub tol_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionScanConfig {
    pub ensemble: EnsembleSpec,
    #[serde(rename = "type", default = "ds2")]
    pub bound_type: BoundType,
    #[serde(default = "asymptotic")]
    pub exponent: ExponentSource,
    #[serde(default = "halves")]
    pub alphas: Vec<f64>,
    /// Defaults to the ensemble rate.
    #[serde(default)]
    pub rate: Option<f64>,
    /// Channel-1 `E_b/N_0` values (dB), one row each.
    #[serde(default)]
    pub rows: Vec<f64>,
    /// Channel-2 bisection range (dB).
    pub range: [f64; 2],
    #[serde(default = "tol_db")]
    pub tol_db: f64,
    #[serde(default = "delta_points")]
    pub delta_points: usize,
    #[serde(default = "delta_min")]
    pub delta_min: f64,
    #[serde(default)]
    pub diagonal: Option<DiagonalConfig>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
}

fn ds2() -> BoundType {
    BoundType::Ds2
}
fn asymptotic() -> ExponentSource {
    ExponentSource::Asymptotic
}
fn halves() -> Vec<f64> {
    vec![0.5, 0.5]
}
fn tol_db() -> f64 {
    0.01
}
fn delta_points() -> usize {
    200
}
fn delta_min() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AssignmentSpec {
    Mode(AssignmentMode),
    Map(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentMode {
    /// Consecutive blocks of positions in proportion to the fractions.
    Fixed,
    /// Each position drawn independently per trial.
    Random,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub code: CodeSpec,
    pub channels: Inline<ChannelSetConfig>,
    #[serde(default = "random_assignment")]
    pub assignment: AssignmentSpec,
    #[serde(default = "trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn random_assignment() -> AssignmentSpec {
    AssignmentSpec::Mode(AssignmentMode::Random)
}
fn trials() -> u64 {
    100_000
}

/// Positions `0..n` split into consecutive runs of sizes `round(α_j n)`,
/// adjusted so the runs cover exactly `n` positions.
pub fn fixed_map(alphas: &[f64], n: usize) -> Vec<usize> {
    let mut map = Vec::with_capacity(n);
    let mut cum = 0.0;
    for (j, &a) in alphas.iter().enumerate() {
        cum += a;
        let end = if j + 1 == alphas.len() { n } else { ((cum * n as f64).round() as usize).min(n) };
        while map.len() < end {
            map.push(j);
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_channel_sets() {
        let c: ChannelSetConfig = serde_json::from_str(
            r#"{"channels":[{"kind":"biawgn","ebno_db":0.0},{"kind":"bsc","p":0.11},{"kind":"bec","eps":0.3}],
                "alphas":[0.5,0.25,0.25],"rate":0.3333333333}"#,
        )
        .unwrap();
        assert_eq!(c.channels[1], ChannelSpec::Bsc { p: 0.11 });
        let set = c.build(None).unwrap();
        assert_eq!(set.len(), 3);
        let bad = serde_json::from_str::<ChannelSetConfig>(r#"{"channels":[{"kind":"bsc","q":0.1}]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn parses_ensembles() {
        let e: CodeSpec = serde_json::from_str(r#"{"ensemble":"spara","N":15,"M":6,"p":3,"q":6}"#).unwrap();
        assert_eq!(e, CodeSpec::Ensemble(EnsembleSpec::Spara { n: 15, m: 6, p: 3, q: 6 }));
        let t: EnsembleSpec = serde_json::from_str(r#"{"ensemble":"turbo","N":8}"#).unwrap();
        assert!(t.ensemble().is_ok());
        let g: CodeSpec = serde_json::from_str(r#"{"generator":["111"]}"#).unwrap();
        assert_eq!(g.explicit(Path::new(".")).unwrap().unwrap().size(), 2);
    }

    #[test]
    fn sweep_ranges() {
        let s = SweepValues::Range { from: 0.0, to: 3.0, step: 0.25 };
        let v = s.values().unwrap();
        assert_eq!(v.len(), 13);
        assert_eq!(v[12], 3.0);
    }

    #[test]
    fn fixed_maps_cover_the_block() {
        assert_eq!(fixed_map(&[0.5, 0.5], 7), vec![0, 0, 0, 0, 1, 1, 1]);
        assert_eq!(fixed_map(&[1.0], 3), vec![0, 0, 0]);
        assert_eq!(fixed_map(&[0.3, 0.7], 10).iter().filter(|&&j| j == 0).count(), 3);
    }
}
