//! Error type, output headers and file writing.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("property violated: {0}")]
    Violation(String),
    #[error(transparent)]
    Library(#[from] gradproj::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 2,
            _ => 3,
        }
    }
}

/// Metadata embedded in every output.
#[derive(Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub config: Value,
    pub config_sha256: String,
    pub tolerances: Value,
}

impl Meta {
    pub fn new(config: &Value, tolerances: Value) -> Self {
        let bytes = serde_json::to_vec(config).expect("config serializes");
        let hash = Sha256::digest(&bytes);
        Meta {
            version: gradproj::VERSION,
            config: config.clone(),
            config_sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
            tolerances,
        }
    }

    /// `#`-prefixed header lines for TSV outputs.
    pub fn tsv_header(&self) -> String {
        format!(
            "# gradproj {}\n# config {}\n# config_sha256 {}\n# tolerances {}\n",
            self.version, self.config, self.config_sha256, self.tolerances
        )
    }

    /// `{"meta": ..., key: body}` as pretty JSON.
    pub fn wrap_json(&self, key: &str, body: impl Serialize) -> String {
        let mut v = json!({ "meta": self });
        v[key] = serde_json::to_value(body).expect("output serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("output serializes");
        s.push('\n');
        s
    }
}

pub fn no_tolerances() -> Value {
    json!({})
}

/// Writes to `path`, or stdout when no path is given.
pub fn emit(path: Option<&str>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {p}: {e}"))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
