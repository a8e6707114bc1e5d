use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::error::{CliError, Result};

pub const SCHEMA: &str = "hofer-spectrum/1";

/// Output directory of one run.
pub struct Output {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, body).map_err(|source| CliError::Write { path: p, source })
    }

    /// Writes `{"schema", "command", "params", ...body}` as pretty JSON.
    pub fn report(&mut self, name: &str, command: &str, s: &Settings, body: Value) -> Result<()> {
        let mut doc = json!({
            "schema": SCHEMA,
            "command": command,
            "params": params(s),
        });
        if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
            d.extend(b);
        }
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        text.push('\n');
        self.text(name, &text)
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<()> {
        let p = self.path(name);
        let io = |e: csv::Error| CliError::Write {
            path: p.clone(),
            source: e.into(),
        };
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&p)
            .map_err(io)?;
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.serialize(r).map_err(io)?;
        }
        w.flush().map_err(|source| CliError::Write {
            path: p.clone(),
            source,
        })
    }
}

fn params(s: &Settings) -> Value {
    json!({
        "A": s.a,
        "levels": s.levels().ok(),
        "grid": s.grid,
        "slabs": s.slabs,
        "step": s.step,
        "seed": s.seed,
    })
}
