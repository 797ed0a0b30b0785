//! CSV tables and the JSON run manifest.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

pub const MANIFEST: &str = "manifest.json";

/// Shortest decimal form that round-trips: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Table {
    header: &'static str,
    rows: Vec<String>,
}

impl Table {
    pub fn new(header: &'static str) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub results: Value,
}

/// Collects outputs in memory; everything is written at the end by one writer.
pub struct Run {
    dir: PathBuf,
    files: Vec<(PathBuf, String)>,
    pub manifest: RunManifest,
}

impl Run {
    pub fn new(dir: &Path, command: &str, parameters: impl Serialize) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            manifest: RunManifest {
                command: command.to_string(),
                parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp: chrono::Utc::now().to_rfc3339(),
                outputs: Vec::new(),
                warnings: Vec::new(),
                results: Value::Null,
            },
        }
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.manifest.warnings.push(message.into());
    }

    pub fn table(&mut self, name: &str, table: Table) {
        let mut body = String::with_capacity(table.rows.iter().map(|r| r.len() + 1).sum::<usize>() + 64);
        body.push_str(table.header);
        body.push('\n');
        for row in table.rows {
            body.push_str(&row);
            body.push('\n');
        }
        self.files.push((self.dir.join(name), body));
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> io::Result<()> {
        let body = serde_json::to_string_pretty(value)? + "\n";
        self.files.push((self.dir.join(name), body));
        Ok(())
    }

    pub fn write(mut self) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        self.manifest.outputs = self.files.iter().map(|(path, _)| path.clone()).collect();
        self.manifest.outputs.push(self.dir.join(MANIFEST));
        for (path, body) in &self.files {
            fs::File::create(path)?.write_all(body.as_bytes())?;
        }
        let manifest = serde_json::to_string_pretty(&self.manifest)? + "\n";
        fs::write(self.dir.join(MANIFEST), manifest)
    }
}
