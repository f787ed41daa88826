//! Run manifests: the resolved configuration plus run metadata, written as
//! flat `dotted.key = value` lines. The format is valid TOML, so a manifest
//! can be passed back to `run`.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::table::format_float;

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub wall_time_s: f64,
    pub total_shots: u64,
    pub failure: Option<String>,
    pub table_file: String,
    /// Headline numbers of the run, in insertion order.
    pub results: Vec<(String, f64)>,
}

fn render(value: &toml::Value) -> String {
    match value {
        toml::Value::Float(f) => {
            let s = format_float(*f);
            // Keep floats typed as floats when read back.
            if s.chars().all(|c| c.is_ascii_digit() || c == '-') {
                format!("{s}.0")
            } else {
                s
            }
        }
        toml::Value::Array(items) => format!(
            "[{}]",
            items.iter().map(render).collect::<Vec<_>>().join(", ")
        ),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<String>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        v => out.push(format!("{prefix} = {}", render(v))),
    }
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut lines = Vec::new();
        flatten("", &self.config.to_toml_value(), &mut lines);
        lines.push(format!(
            "manifest.code_version = {}",
            quoted(&self.code_version)
        ));
        lines.push(format!(
            "manifest.wall_time_s = {}",
            render(&toml::Value::Float(self.wall_time_s))
        ));
        lines.push(format!("manifest.total_shots = {}", self.total_shots));
        lines.push(format!("manifest.partial = {}", self.failure.is_some()));
        if let Some(f) = &self.failure {
            lines.push(format!("manifest.failure = {}", quoted(f)));
        }
        lines.push(format!("manifest.table = {}", quoted(&self.table_file)));
        for (k, v) in &self.results {
            lines.push(format!("result.{k} = {}", render(&toml::Value::Float(*v))));
        }
        lines.join("\n") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(CliError::io(path))
    }

    /// Reads back the headline results of a manifest.
    pub fn read_results(path: &Path) -> Result<Vec<(String, f64)>> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse {
            path: path.to_path_buf(),
            message: e.message().into(),
        })?;
        let Some(toml::Value::Table(results)) = table.get("result") else {
            return Ok(vec![]);
        };
        Ok(results
            .iter()
            .filter_map(|(k, v)| v.as_float().map(|f| (k.clone(), f)))
            .collect())
    }
}
