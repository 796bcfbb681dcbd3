//! CSV tables: `# key=value` metadata lines, then a header row and data rows.

use std::path::{Path, PathBuf};

use sphclass_core::bench::{ResultTable, Table};
use sphclass_core::net::EpochStats;

use crate::error::{Error, Result};
use crate::formats::write_file_atomic as write_atomic;

fn csv_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Csv { path: path.to_path_buf(), message: e.to_string() }
}

pub fn table_to_csv(table: &Table) -> std::result::Result<String, csv::Error> {
    let mut out = String::new();
    for (k, v) in &table.metadata {
        // Line breaks would end the comment early.
        let v = v.replace(['\n', '\r'], " ");
        out.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    out.push_str(&String::from_utf8(bytes).expect("csv output of UTF-8 cells"));
    Ok(out)
}

pub fn csv_to_table(text: &str) -> std::result::Result<Table, String> {
    let mut metadata = Vec::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix('#') else { break };
        let rest = rest.trim_end_matches(['\n', '\r']).strip_prefix(' ').unwrap_or(rest.trim_end_matches(['\n', '\r']));
        let (k, v) = rest.split_once('=').ok_or_else(|| format!("metadata line without '=': {rest:?}"))?;
        metadata.push((k.to_string(), v.to_string()));
        body_start += line.len();
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text[body_start..].as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| e.to_string())?;
    Ok(Table { metadata, header, rows })
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let text = table_to_csv(table).map_err(|e| csv_err(path, e))?;
    write_atomic(path, text.as_bytes())
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| csv_err(path, e))?;
    csv_to_table(&text).map_err(|e| csv_err(path, e))
}

pub fn read_result_table(path: &Path) -> Result<ResultTable> {
    Ok(ResultTable::from_table(&read_csv(path)?)?)
}

/// `<dir>/<experiment>-<unix seconds>.csv`, with a numeric suffix if taken.
pub fn timestamped_path(dir: &Path, experiment: &str) -> PathBuf {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut path = dir.join(format!("{experiment}-{secs}.csv"));
    let mut n = 1;
    while path.exists() {
        path = dir.join(format!("{experiment}-{secs}-{n}.csv"));
        n += 1;
    }
    path
}

pub fn history_table(history: &[EpochStats], metadata: Vec<(String, String)>) -> Table {
    Table {
        metadata,
        header: ["epoch", "lr", "loss", "train_accuracy"].map(String::from).to_vec(),
        rows: history
            .iter()
            .map(|s| vec![s.epoch.to_string(), format!("{:e}", s.lr), format!("{:e}", s.loss), format!("{:.6}", s.train_accuracy)])
            .collect(),
    }
}
