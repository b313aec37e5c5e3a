//! Structured run reports with deterministic serialization.
//!
//! Reports serialize to JSON with sorted keys so that identical runs give
//! byte-identical files; complex scalars appear as `[re, im]` pairs. The
//! optional CSV format additionally writes one file per series.

use histate::linalg::Complex64;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Series {
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub version: String,
    /// Only populated with `--timing`; keeps default output deterministic.
    pub wall_time_ms: Option<u128>,
    pub results: BTreeMap<String, Value>,
    pub series: BTreeMap<String, Series>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str, config_hash: String) -> Self {
        Self {
            command: command.to_string(),
            config_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: None,
            results: BTreeMap::new(),
            series: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    /// Named scalar with the tolerance it was (or will be) compared at.
    pub fn scalar(&mut self, name: &str, value: f64, tolerance: f64) {
        self.results.insert(name.into(), json!({ "value": value, "tolerance": tolerance }));
    }

    pub fn plain(&mut self, name: &str, value: Value) {
        self.results.insert(name.into(), value);
    }

    pub fn complex(&mut self, name: &str, value: Complex64, tolerance: f64) {
        self.results
            .insert(name.into(), json!({ "value": [value.re, value.im], "tolerance": tolerance }));
    }

    pub fn series(&mut self, name: &str, series: Series) {
        self.series.insert(name.into(), series);
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check { name: name.into(), pass, detail });
    }

    /// Record a check that compares a value against a tolerance.
    pub fn check_tol(&mut self, name: &str, value: f64, tolerance: f64) {
        self.check(name, value.abs() <= tolerance, format!("|{value:e}| <= {tolerance:e}"));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Drop results not named in `outputs` (checks and series always stay).
    pub fn filter_outputs(&mut self, outputs: &[String]) {
        if outputs.is_empty() {
            return;
        }
        self.results.retain(|k, _| outputs.iter().any(|o| k.starts_with(o.as_str())));
    }

    pub fn to_value(&self) -> Value {
        let mut meta = Map::new();
        meta.insert("command".into(), json!(self.command));
        meta.insert("config_hash".into(), json!(self.config_hash));
        meta.insert("version".into(), json!(self.version));
        if let Some(ms) = self.wall_time_ms {
            meta.insert("wall_time_ms".into(), json!(ms as u64));
        }
        let series: BTreeMap<String, Value> = self
            .series
            .iter()
            .map(|(k, s)| {
                (
                    k.clone(),
                    json!({
                        "x_label": s.x_label,
                        "y_label": s.y_label,
                        "x": s.x,
                        "y": s.y,
                    }),
                )
            })
            .collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
            .collect();
        json!({
            "meta": Value::Object(meta),
            "results": self.results,
            "series": series,
            "checks": checks,
        })
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        out.push('\n');
        out
    }

    /// Write the JSON report, plus one `<stem>.<series>.csv` per series in
    /// CSV mode.
    pub fn write(&self, out: Option<&Path>, csv: bool) -> std::io::Result<()> {
        let text = self.to_json();
        match out {
            Some(path) => std::fs::write(path, &text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        if csv {
            let stem = out.ok_or_else(|| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    "--format csv needs --out to name the series files",
                )
            })?;
            for (name, s) in &self.series {
                let mut csv_text = format!("{},{}\n", s.x_label, s.y_label);
                for (x, y) in s.x.iter().zip(&s.y) {
                    csv_text.push_str(&format!("{x},{y}\n"));
                }
                let path = stem.with_extension(format!("{name}.csv"));
                std::fs::write(path, csv_text)?;
            }
        }
        Ok(())
    }
}

/// Hex SHA-256 of the canonical (sorted-keys, compact) config encoding.
pub fn config_hash(config_value: &Value) -> String {
    use sha2::{Digest, Sha256};
    let canonical = serde_json::to_string(config_value).expect("config re-serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}
