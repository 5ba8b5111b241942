use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::svg;
use crate::error::{Error, Result};

/// Output file kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];

    /// Parses a comma-separated list such as `csv,json`.
    pub fn parse_list(text: &str) -> Result<BTreeSet<Format>> {
        let mut out = BTreeSet::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            out.insert(match item {
                "csv" => Format::Csv,
                "json" => Format::Json,
                "svg" => Format::Svg,
                other => return Err(Error::Config(format!("unknown output format `{other}`"))),
            });
        }
        if out.is_empty() {
            return Err(Error::Config("no output format selected".into()));
        }
        Ok(out)
    }
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &str) -> Self {
        Self {
            name: name.into(),
            header: header.split(',').map(String::from).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Values print in shortest round-trip form, so equal inputs give
    /// byte-identical files.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// One named curve of a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A chart: several curves against time, drawn on a log-scaled y axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub lines: Vec<Line>,
}

/// Everything an experiment produces besides its summary.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    /// Extra JSON files, e.g. snapshot sidecars, written with the CSVs.
    pub sidecars: Vec<(String, serde_json::Value)>,
    pub series: Vec<Series>,
}

/// Writes the run directory. Files go to a sibling staging directory first,
/// which then replaces `dir` in one rename.
///
/// * `csv`: every table as `<name>.csv`, sidecars as `<name>.json` and the
///   config echo as `config.toml`;
/// * `json`: `summary.json`, which embeds the config and its hash;
/// * `svg`: one `<series>.svg` chart per series.
pub fn emit_outputs(
    dir: &Path,
    summary: &serde_json::Value,
    artifacts: &Artifacts,
    config_echo: &str,
    formats: &BTreeSet<Format>,
) -> Result<Vec<PathBuf>> {
    let name = dir
        .file_name()
        .ok_or_else(|| Error::Config(format!("output directory `{}` has no final component", dir.display())))?
        .to_string_lossy()
        .into_owned();
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    let staging = parent.join(format!(".{name}.staging"));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    fs::create_dir(&staging).map_err(|e| Error::io(&staging, e))?;

    let mut files = Vec::new();
    let mut put = |file: String, bytes: Vec<u8>| -> Result<()> {
        let path = staging.join(&file);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        files.push(dir.join(file));
        Ok(())
    };
    if formats.contains(&Format::Csv) {
        put("config.toml".into(), config_echo.as_bytes().to_vec())?;
        for t in &artifacts.tables {
            let mut buf = Vec::new();
            t.write(&mut buf).map_err(|e| Error::io(staging.join(&t.name), e))?;
            put(format!("{}.csv", t.name), buf)?;
        }
        for (n, v) in &artifacts.sidecars {
            put(format!("{n}.json"), pretty(v)?)?;
        }
    }
    if formats.contains(&Format::Json) {
        put("summary.json".into(), pretty(summary)?)?;
    }
    if formats.contains(&Format::Svg) {
        for s in &artifacts.series {
            put(format!("{}.svg", s.name), svg::render(s).into_bytes())?;
        }
    }

    replace_dir(&staging, dir)?;
    files.sort();
    Ok(files)
}

fn pretty(v: &serde_json::Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Serde(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Moves `staging` to `dir`. An existing `dir` is only replaced when it
/// holds nothing but files this module writes.
fn replace_dir(staging: &Path, dir: &Path) -> Result<()> {
    if dir.exists() {
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let path = entry.path();
            let ours = path.is_file()
                && matches!(
                    path.extension().and_then(|e| e.to_str()),
                    Some("csv" | "json" | "svg" | "toml")
                );
            if !ours {
                return Err(Error::io(
                    &path,
                    std::io::Error::other("refusing to replace a directory with foreign content"),
                ));
            }
        }
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::rename(staging, dir).map_err(|e| Error::io(dir, e))
}
