//! Model loading, thread cap, and JSON/CSV emission with manifest sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use asianjump_core::{fixtures, ModelSpec};

/// Loads a model document from disk, falling back to the bundled sets
/// (`mjd`, `kou`, `vg`, with or without a `.json` suffix).
pub fn load_model(arg: &str) -> Result<(ModelSpec, String)> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        let model = ModelSpec::from_json(&text).with_context(|| format!("parsing {arg}"))?;
        return Ok((model, arg.to_string()));
    }
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or(arg)
        .trim_end_matches(".json");
    match fixtures::by_name(name) {
        Some(m) => Ok((m, format!("bundled:{name}"))),
        None => bail!("model `{arg}` is neither a readable file nor a bundled name (mjd, kou, vg)"),
    }
}

/// MC worker cap from `ASIANJUMP_THREADS` (0 or unset: rayon default).
pub fn thread_cap() -> usize {
    std::env::var("ASIANJUMP_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub model_path: Option<String>,
    pub params: Value,
    pub outputs: Vec<String>,
    pub timestamp: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest(out: &Path, command: &str, model_path: Option<&str>, params: Value) -> Result<()> {
    let m = RunManifest {
        command: command.to_string(),
        model_path: model_path.map(str::to_string),
        params,
        outputs: vec![out.display().to_string()],
        timestamp: chrono::Utc::now().to_rfc3339(),
    };
    let path = manifest_path(out);
    fs::write(&path, serde_json::to_string_pretty(&m)? + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Prints `value` as JSON and, with `out`, also writes it with a manifest.
pub fn emit_json<T: Serialize>(
    value: &T,
    out: Option<&Path>,
    command: &str,
    model_path: Option<&str>,
    params: Value,
) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    print!("{text}");
    if let Some(out) = out {
        fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
        write_manifest(out, command, model_path, params)?;
    }
    Ok(())
}

/// A CSV table held as strings so that every cell keeps full precision.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes the table to `out` (with manifest) or stdout.
pub fn emit_csv(
    table: &Table,
    out: Option<&Path>,
    command: &str,
    model_path: Option<&str>,
    params: Value,
) -> Result<()> {
    let text = table.to_csv()?;
    match out {
        Some(out) => {
            fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
            write_manifest(out, command, model_path, params)?;
            eprintln!("wrote {} ({} rows)", out.display(), table.rows.len());
        }
        None => print!("{text}"),
    }
    Ok(())
}
