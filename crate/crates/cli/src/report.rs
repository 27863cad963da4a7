//! Report emission helpers. Every human-readable report opens with an echo
//! of the resolved run parameters so a report is traceable back to the
//! exact configuration and seed that produced it. Output is a pure function
//! of (config, fixtures, seed): no timestamps, no machine state.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::Resolved;
use crate::Failure;

pub struct Report {
    body: String,
}

impl Report {
    pub fn new(subcommand: &str, resolved: &Resolved, params: &[(&str, String)]) -> Self {
        let mut body = String::new();
        let _ = writeln!(body, "# botwatch {subcommand}");
        let _ = writeln!(body, "# config: {}", resolved.config_path.display());
        let _ = writeln!(body, "# fixture_root: {}", resolved.fixture_root.display());
        let _ = writeln!(body, "# seed: {}", resolved.seed);
        for (key, value) in params {
            let _ = writeln!(body, "# {key}: {value}");
        }
        let _ = writeln!(body);
        Report { body }
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.body, "{}", text.as_ref());
    }

    pub fn blank(&mut self) {
        let _ = writeln!(self.body);
    }

    pub fn write(self, path: &Path) -> Result<(), Failure> {
        write_file(path, self.body.as_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::Other(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, bytes)
        .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))
}

/// Fixed-precision float for reports; stable across runs.
pub fn fmt_metric(value: f64) -> String {
    format!("{value:.6}")
}
