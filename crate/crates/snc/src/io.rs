//! CSV input and JSON output.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use snc_core::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: row {row}, column {col}: cannot parse {value:?} as a number")]
    Parse { path: PathBuf, row: usize, col: usize, value: String },
    #[error("{path}: no data rows")]
    Empty { path: PathBuf },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Shape { path: PathBuf, source: snc_core::Error },
}

fn open(path: &Path) -> Result<File, IoError> {
    File::open(path).map_err(|source| IoError::File { path: path.into(), source })
}

fn records(path: &Path) -> Result<Vec<csv::StringRecord>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(BufReader::new(open(path)?));
    reader
        .records()
        .filter(|r| !matches!(r, Ok(rec) if rec.iter().all(str::is_empty)))
        .collect::<Result<_, _>>()
        .map_err(|source| IoError::Csv { path: path.into(), source })
}

/// Reads a numeric CSV table, one point per row. A first row that does not
/// parse as numbers is taken as a header and skipped.
pub fn read_matrix(path: &Path) -> Result<Matrix, IoError> {
    let recs = records(path)?;
    let numeric = |r: &csv::StringRecord| r.iter().all(|v| v.parse::<f64>().is_ok());
    let skip = usize::from(recs.first().is_some_and(|r| !numeric(r)));
    let mut rows = Vec::with_capacity(recs.len());
    for (row, rec) in recs.iter().enumerate().skip(skip) {
        let values = rec
            .iter()
            .enumerate()
            .map(|(col, v)| {
                v.parse::<f64>().map_err(|_| IoError::Parse {
                    path: path.into(),
                    row: row + 1,
                    col: col + 1,
                    value: v.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(IoError::Empty { path: path.into() });
    }
    Matrix::from_rows(&rows).map_err(|source| IoError::Shape { path: path.into(), source })
}

/// Reads one label per row from the first column. Integer labels are kept;
/// any other label set is numbered in order of first appearance. A header
/// row is recognized by the name `label`.
pub fn read_labels(path: &Path) -> Result<Vec<i64>, IoError> {
    let recs = records(path)?;
    let mut raw: Vec<String> = recs.iter().map(|r| r.get(0).unwrap_or("").to_string()).collect();
    if raw.first().is_some_and(|s| s.eq_ignore_ascii_case("label")) {
        raw.remove(0);
    }
    if raw.is_empty() {
        return Err(IoError::Empty { path: path.into() });
    }
    if let Ok(ints) = raw.iter().map(|s| s.parse::<i64>()).collect::<Result<Vec<_>, _>>() {
        return Ok(ints);
    }
    let mut ids: HashMap<&str, i64> = HashMap::new();
    Ok(raw
        .iter()
        .map(|s| {
            let next = ids.len() as i64;
            *ids.entry(s.as_str()).or_insert(next)
        })
        .collect())
}

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let file = File::create(path).map_err(|source| IoError::File { path: path.into(), source })?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value).map_err(|source| IoError::Json { path: path.into(), source })?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|source| IoError::File { path: path.into(), source })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    serde_json::from_reader(BufReader::new(open(path)?)).map_err(|source| IoError::Json { path: path.into(), source })
}

/// Writes a numeric table as CSV without a header.
pub fn write_matrix(path: &Path, m: &Matrix) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|source| IoError::Csv { path: path.into(), source })?;
    for row in m.iter_rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|source| IoError::Csv { path: path.into(), source })?;
    }
    w.flush().map_err(|source| IoError::File { path: path.into(), source })
}
