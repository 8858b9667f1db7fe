//! Artifact writing: JSON envelopes, CSV tables and digests.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hypergroup::measure::RadialMeasure;
use hypergroup::spectral::SpectralSymbol;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Rounds every float in `value` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses");
            *value = json!(r);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Where one command writes, plus the digests stamped on its envelope.
pub struct Sink {
    pub dir: PathBuf,
    pub config_digest: String,
    pub seed: u64,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: PathBuf, config_digest: String, seed: u64) -> Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir, config_digest, seed, written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.path(name);
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let mut w = self.create(name)?;
        w.write_all(bytes)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `<command>.json` with the standard envelope around `report`.
    pub fn write_envelope(&mut self, command: &str, calibration_digest: Option<&str>, report: &impl Serialize) -> Result<()> {
        let mut envelope = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_digest": self.config_digest,
            "calibration_digest": calibration_digest,
            "seed": self.seed,
            "report": serde_json::to_value(report)?,
        });
        round_floats(&mut envelope);
        let mut text = serde_json::to_string_pretty(&envelope)?;
        text.push('\n');
        self.write_bytes(&format!("{command}.json"), text.as_bytes())
    }

    /// Writes `<stem>.csv` (density) and `<stem>_atoms.csv`.
    pub fn write_measure(&mut self, stem: &str, measure: &RadialMeasure) -> Result<()> {
        let mut w = self.create(&format!("{stem}.csv"))?;
        measure.write_density_csv(&mut w)?;
        w.flush()?;
        let mut w = self.create(&format!("{stem}_atoms.csv"))?;
        measure.write_atoms_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `<stem>.csv` with `lambda,re,im` rows.
    pub fn write_symbol(&mut self, stem: &str, symbol: &SpectralSymbol) -> Result<()> {
        let mut w = self.create(&format!("{stem}.csv"))?;
        writeln!(w, "lambda,re,im")?;
        for (l, v) in symbol.lambda_grid.iter().zip(&symbol.values) {
            writeln!(w, "{l:.12e},{:.12e},{:.12e}", v.re, v.im)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn display_paths(paths: &[PathBuf], base: &Path) -> Vec<String> {
    paths.iter().map(|p| p.strip_prefix(base).unwrap_or(p).display().to_string()).collect()
}
