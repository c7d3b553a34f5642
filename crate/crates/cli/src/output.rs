//! Artifact writing: provenance header, CSV rows and JSON documents.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL: &str = "psmet";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            config_sha256: config.hash(),
            seed: config.seed,
        }
    }

    pub fn comment_lines(&self) -> String {
        format!(
            "# {} {}\n# config_sha256 {}\n# seed {}\n",
            self.tool, self.version, self.config_sha256, self.seed
        )
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(provenance: &Provenance, header: &[&str]) -> Self {
        let mut text = provenance.comment_lines();
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// A JSON report; provenance travels as the `provenance` field so the file stays valid JSON.
#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub provenance: &'a Provenance,
    pub command: &'static str,
    #[serde(flatten)]
    pub body: &'a T,
}

pub fn json_document<T: Serialize>(provenance: &Provenance, command: &'static str, body: &T) -> String {
    let doc = Document {
        provenance,
        command,
        body,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("writing {}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("writing stdout: {e}"))),
    }
}

/// `run.csv` -> `run.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, std::f64::consts::PI, -1.0e-300, 2.0, 6.02214076e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn summary_path_swaps_extension() {
        assert_eq!(summary_path(Path::new("out/run.csv")), PathBuf::from("out/run.summary.json"));
        assert_eq!(summary_path(Path::new("run")), PathBuf::from("run.summary.json"));
    }
}
