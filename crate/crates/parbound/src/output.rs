//! CSV artifacts with a `#` manifest header and the run manifest file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use parbound_core::spectra::{DistanceSpectrum, Iowe, Weighting};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identity of a run: the command, the digest of its configuration bytes and
/// of any overrides given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub command: String,
    pub digest: String,
}

impl Manifest {
    pub fn new(command: &str, config: &[u8], overrides: &[(&str, String)]) -> Self {
        let mut h = Sha256::new();
        h.update(config);
        for (k, v) in overrides {
            h.update(format!("\n{k}={v}").as_bytes());
        }
        Manifest { command: command.to_string(), digest: hex::encode(h.finalize()) }
    }

    pub fn comment(&self) -> String {
        format!("# parbound {VERSION} command={} config_sha256={}", self.command, self.digest)
    }
}

/// The JSON record written next to the CSV files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(m: &Manifest, wall: Duration, outputs: &[PathBuf]) -> Self {
        RunManifest {
            command: m.command.clone(),
            config_sha256: m.digest.clone(),
            version: VERSION.to_string(),
            wall_time_s: wall.as_secs_f64(),
            outputs: outputs
                .iter()
                .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
                .collect(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::config(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// A CSV table under construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    comments: Vec<String>,
    records: Vec<Vec<String>>,
}

impl Table {
    pub fn new(manifest: &Manifest, header: &[&str]) -> Self {
        Table { comments: vec![manifest.comment()], records: vec![header.iter().map(|s| s.to_string()).collect()] }
    }

    pub fn comment(&mut self, text: impl Into<String>) -> &mut Self {
        self.comments.push(format!("# {}", text.into()));
        self
    }

    pub fn row(&mut self, fields: Vec<String>) -> &mut Self {
        self.records.push(fields);
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for c in &self.comments {
            out.extend_from_slice(c.as_bytes());
            out.push(b'\n');
        }
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        for r in &self.records {
            // writing into memory cannot fail
            w.write_record(r).expect("in-memory csv write");
        }
        w.into_inner().expect("in-memory csv flush")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| CliError::io(path, e))
    }
}

fn special(x: f64) -> Option<String> {
    if x.is_nan() {
        Some("nan".into())
    } else if x == f64::INFINITY {
        Some("inf".into())
    } else if x == f64::NEG_INFINITY {
        Some("-inf".into())
    } else {
        None
    }
}

/// dB values: 4 decimals.
pub fn db(x: f64) -> String {
    special(x).unwrap_or_else(|| format!("{x:.4}"))
}

/// log10 probabilities: 6 decimals.
pub fn log10p(ln_p: f64) -> String {
    let v = ln_p / std::f64::consts::LN_10;
    special(v).unwrap_or_else(|| format!("{:.6}", if v == 0.0 { 0.0 } else { v }))
}

/// Other parameters: 6 decimals.
pub fn fixed(x: f64) -> String {
    special(x).unwrap_or_else(|| format!("{x:.6}"))
}

/// Quantities spanning many decades.
pub fn sci(x: f64) -> String {
    special(x).unwrap_or_else(|| format!("{x:.6e}"))
}

/// Round-trip representation, for spectra read back by `bound`.
pub fn exact(x: f64) -> String {
    special(x).unwrap_or_else(|| format!("{x:e}"))
}

pub fn weighting_name(w: Weighting) -> &'static str {
    match w {
        Weighting::Block => "block",
        Weighting::Bit => "bit",
    }
}

/// `n,K,weighting` then `h,logA` over the nonempty weights.
pub fn spectrum_table(manifest: &Manifest, s: &DistanceSpectrum) -> Table {
    let mut t = Table::new(manifest, &["n", "K", "weighting"]);
    t.row(vec![s.block_length().to_string(), s.info_length().to_string(), weighting_name(s.weighting()).into()]);
    t.row(vec!["h".into(), "logA".into()]);
    for h in 0..=s.block_length() {
        let a = s.get(h);
        if a != f64::NEG_INFINITY {
            t.row(vec![h.to_string(), exact(a)]);
        }
    }
    t
}

/// `w,h,logA` over the nonempty cells.
pub fn iowe_table(manifest: &Manifest, iowe: &Iowe) -> Table {
    let mut t = Table::new(manifest, &["w", "h", "logA"]);
    for w in 0..=iowe.input_len() {
        for h in 0..=iowe.output_len() {
            let a = iowe.get(w, h);
            if a != f64::NEG_INFINITY {
                t.row(vec![w.to_string(), h.to_string(), exact(a)]);
            }
        }
    }
    t
}

/// Reads a spectrum file written by [`spectrum_table`].
pub fn read_spectrum(path: &Path) -> Result<DistanceSpectrum> {
    let bad = |m: &str| CliError::config(path, m);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::config(path, e))?;
    let mut records = Vec::new();
    for r in rdr.records() {
        records.push(r.map_err(|e| CliError::config(path, e))?);
    }
    if records.len() < 3 || &records[0][0] != "n" || &records[2][0] != "h" {
        return Err(bad("expected the header rows `n,K,weighting` and `h,logA`"));
    }
    let meta = &records[1];
    let parse_usize = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("malformed integer"));
    let n = parse_usize(&meta[0])?;
    let k = parse_usize(meta.get(1).ok_or_else(|| bad("missing K"))?)?;
    let weighting = match meta.get(2).map(str::trim) {
        Some("block") => Weighting::Block,
        Some("bit") => Weighting::Bit,
        _ => return Err(bad("weighting must be block or bit")),
    };
    let mut log_a = vec![f64::NEG_INFINITY; n + 1];
    for r in &records[3..] {
        let h = parse_usize(&r[0])?;
        let v: f64 = r.get(1).ok_or_else(|| bad("missing logA"))?.trim().parse().map_err(|_| bad("malformed logA"))?;
        if h > n {
            return Err(bad("weight exceeds block length"));
        }
        log_a[h] = v;
    }
    Ok(DistanceSpectrum::new(n, k, weighting, log_a)?)
}
