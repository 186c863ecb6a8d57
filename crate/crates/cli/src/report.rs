//! Canonical report emission.
//!
//! Every command prints exactly one report on stdout. Reports are
//! deterministic: keys are sorted, no timestamps or absolute paths appear in
//! the payload, and re-running a command on identical inputs yields
//! byte-identical output.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Serialize)]
pub struct Report {
    /// The subcommand path, e.g. `gog stature`.
    pub command: String,
    /// Content digest of every file read, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    /// Command-specific payload.
    pub results: Value,
    /// Window, truncation, and reliability warnings.
    pub caveats: Vec<String>,
    /// Proof-search log, present only under `--trace`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
}

/// `sha256:<hex>` digest of raw file bytes.
pub fn digest(data: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let d = Sha256::digest(data);
    let hex: String = d.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Render a report. JSON output re-serializes through `Value` so that all
/// object keys (including the report's own fields) come out sorted.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let v = serde_json::to_value(report).expect("report serializes");
            let mut s = serde_json::to_string_pretty(&v).expect("report prints");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!("# mf {}\n", report.command);
            for (path, dig) in &report.inputs {
                s.push_str(&format!("input {path} {dig}\n"));
            }
            for c in &report.caveats {
                s.push_str(&format!("caveat {c}\n"));
            }
            if let Some(trace) = &report.trace {
                for t in trace {
                    s.push_str(&format!("trace {t}\n"));
                }
            }
            s.push_str(&serde_json::to_string_pretty(&report.results).expect("results print"));
            s.push('\n');
            s
        }
    }
}
