//! Window-indexed CSV tables (feature and prediction files) and output
//! plumbing.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;

use gazecast::{Error, FeatureVector, Result};
use tempfile::NamedTempFile;

const SPAN_COLUMNS: [&str; 2] = ["window_start_ms", "window_end_ms"];

/// Rows keyed by window span, with named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub spans: Vec<(f64, f64)>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_features(spans: Vec<(f64, f64)>, vectors: &[FeatureVector]) -> Self {
        Table {
            columns: gazecast::feature_names().iter().map(|s| s.to_string()).collect(),
            spans,
            rows: vectors.iter().map(|v| v.as_slice().to_vec()).collect(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Reorders columns to `names`. Missing columns are a schema error.
    pub fn project(&self, names: &[String]) -> Result<Vec<Vec<f64>>> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::MissingColumn { column: n.clone() })
            })
            .collect::<Result<_>>()?;
        Ok(self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&SPAN_COLUMNS.join(","));
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for ((s, e), row) in self.spans.iter().zip(&self.rows) {
            let _ = write!(out, "{s},{e}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Opens `path` for buffered reading; the error names the file.
pub fn open(path: &Path) -> io::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| csv_error(0, e))?.clone();
    for (i, want) in SPAN_COLUMNS.iter().enumerate() {
        if headers.get(i) != Some(*want) {
            return Err(Error::MissingColumn {
                column: want.to_string(),
            });
        }
    }
    let columns: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut spans = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(row, e))?;
        let mut values = Vec::with_capacity(record.len());
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                row,
                column: headers.get(j).unwrap_or("?").to_string(),
                value: cell.to_string(),
            })?;
            values.push(v);
        }
        spans.push((values[0], values[1]));
        rows.push(values.split_off(2));
    }
    if rows.is_empty() {
        return Err(Error::Empty { what: "table" });
    }
    Ok(Table { columns, spans, rows })
}

fn csv_error(row: usize, err: csv::Error) -> Error {
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(io) => return Error::Io(io),
            _ => unreachable!(),
        }
    }
    Error::MalformedRecord {
        row,
        message: err.to_string(),
    }
}

/// Writes via a temporary file in the destination directory, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}
