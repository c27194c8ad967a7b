//! File formats.
//!
//! Matrices and vectors are headerless CSV, one row per line. Vectors and
//! label files have a single column. Floats are written with 17 significant
//! digits so that a write/read cycle reproduces every value exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use dantzig_core::bench::{AggregateRow, BenchRecord, Method, RecordStatus};
use dantzig_core::Matrix;
use thiserror::Error;

pub const RECORD_HEADER: [&str; 10] = [
    "method",
    "m",
    "sigma",
    "replicate",
    "rho_raw",
    "rho_post",
    "iterations",
    "wall_seconds",
    "feas_violation",
    "termination",
];

pub const AGGREGATE_HEADER: [&str; 6] = ["method", "m", "sigma", "metric", "mean", "std"];

pub const CLASSIFY_HEADER: [&str; 4] = ["delta", "misdiagnoses", "iterations", "wall_seconds"];

pub const RAW_SCORES_HEADER: [&str; 4] = ["delta", "row", "y_raw", "label"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}, line {line}: {reason}", path.display())]
    Parse { path: PathBuf, line: u64, reason: String },
    #[error("{}: {reason}", path.display())]
    Shape { path: PathBuf, reason: String },
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn open(path: &Path) -> Result<File, IoError> {
    File::open(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File, IoError> {
    File::create(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    rec: &csv::StringRecord,
    idx: usize,
    what: &str,
) -> Result<T, IoError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| IoError::Parse {
        path: path.to_path_buf(),
        line: line_of(rec),
        reason: format!("cannot parse {what} from {raw:?}"),
    })
}

fn headerless<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader)
}

/// Reads a dense matrix. `path` is only used in error messages.
pub fn read_matrix_from<R: Read>(reader: R, path: &Path) -> Result<Matrix, IoError> {
    let mut rdr = headerless(reader);
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        if rows == 0 {
            cols = rec.len();
        } else if rec.len() != cols {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line: line_of(&rec),
                reason: format!("expected {cols} fields, found {}", rec.len()),
            });
        }
        for j in 0..rec.len() {
            data.push(parse_field::<f64>(path, &rec, j, "a number")?);
        }
        rows += 1;
    }
    if rows == 0 || cols == 0 {
        return Err(IoError::Shape {
            path: path.to_path_buf(),
            reason: "file holds no data".into(),
        });
    }
    Ok(Matrix::from_row_major(rows, cols, data).expect("row lengths checked above"))
}

pub fn read_matrix(path: &Path) -> Result<Matrix, IoError> {
    read_matrix_from(open(path)?, path)
}

/// Reads a single-column file of numbers.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, IoError> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(IoError::Shape {
            path: path.to_path_buf(),
            reason: format!("expected one column, found {}", m.ncols()),
        });
    }
    Ok(m.column(0))
}

/// Reads a single-column file of 0/1 labels.
pub fn read_labels(path: &Path) -> Result<Vec<u8>, IoError> {
    let mut rdr = headerless(open(path)?);
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        if rec.len() != 1 {
            return Err(IoError::Shape {
                path: path.to_path_buf(),
                reason: format!("expected one column, found {}", rec.len()),
            });
        }
        match parse_field::<u8>(path, &rec, 0, "a 0/1 label")? {
            l @ (0 | 1) => labels.push(l),
            other => {
                return Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line: line_of(&rec),
                    reason: format!("label {other} is not 0 or 1"),
                })
            }
        }
    }
    if labels.is_empty() {
        return Err(IoError::Shape {
            path: path.to_path_buf(),
            reason: "file holds no labels".into(),
        });
    }
    Ok(labels)
}

fn finish<W: Write>(mut wtr: csv::Writer<W>, path: &Path) -> Result<(), IoError> {
    wtr.flush().map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_matrix_to<W: Write>(writer: W, m: &Matrix, path: &Path) -> Result<(), IoError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in m.rows() {
        wtr.write_record(row.iter().map(|v| format_f64(*v)))
            .map_err(csv_err(path))?;
    }
    finish(wtr, path)
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<(), IoError> {
    write_matrix_to(create(path)?, m, path)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<(), IoError> {
    let m = Matrix::from_row_major(v.len(), 1, v.to_vec()).expect("one column");
    write_matrix(path, &m)
}

pub fn write_labels(path: &Path, labels: &[u8]) -> Result<(), IoError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    for l in labels {
        wtr.write_record([l.to_string()]).map_err(csv_err(path))?;
    }
    finish(wtr, path)
}

fn record_fields(r: &BenchRecord) -> [String; 10] {
    [
        r.method.as_str().to_string(),
        r.m.to_string(),
        format_f64(r.sigma),
        r.replicate.to_string(),
        format_f64(r.rho_raw),
        format_f64(r.rho_post),
        r.iterations.to_string(),
        format_f64(r.wall_seconds),
        format_f64(r.feasibility_violation),
        r.termination.as_str().to_string(),
    ]
}

pub fn write_records_to<W: Write>(writer: W, records: &[BenchRecord], path: &Path) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(RECORD_HEADER).map_err(csv_err(path))?;
    for r in records {
        wtr.write_record(record_fields(r)).map_err(csv_err(path))?;
    }
    finish(wtr, path)
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<(), IoError> {
    write_records_to(create(path)?, records, path)
}

/// Reads a results file. The `error` field is not stored and comes back as
/// `None`.
pub fn read_records_from<R: Read>(reader: R, path: &Path) -> Result<Vec<BenchRecord>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(IoError::Shape {
            path: path.to_path_buf(),
            reason: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = |reason: String| IoError::Parse {
            path: path.to_path_buf(),
            line: line_of(&rec),
            reason,
        };
        let method = Method::parse(&rec[0]).ok_or_else(|| bad(format!("unknown method {:?}", &rec[0])))?;
        let termination =
            RecordStatus::parse(&rec[9]).ok_or_else(|| bad(format!("unknown termination {:?}", &rec[9])))?;
        out.push(BenchRecord {
            method,
            m: parse_field(path, &rec, 1, "m")?,
            sigma: parse_field(path, &rec, 2, "sigma")?,
            replicate: parse_field(path, &rec, 3, "replicate")?,
            rho_raw: parse_field(path, &rec, 4, "rho_raw")?,
            rho_post: parse_field(path, &rec, 5, "rho_post")?,
            iterations: parse_field(path, &rec, 6, "iterations")?,
            wall_seconds: parse_field(path, &rec, 7, "wall_seconds")?,
            feasibility_violation: parse_field(path, &rec, 8, "feas_violation")?,
            termination,
            error: None,
        });
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>, IoError> {
    read_records_from(open(path)?, path)
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    wtr.write_record(AGGREGATE_HEADER).map_err(csv_err(path))?;
    for r in rows {
        wtr.write_record([
            r.method.as_str().to_string(),
            r.m.to_string(),
            format_f64(r.sigma),
            r.metric.to_string(),
            format_f64(r.mean),
            format_f64(r.std),
        ])
        .map_err(csv_err(path))?;
    }
    finish(wtr, path)
}

/// Outcome of training and testing at one `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyRow {
    pub delta: f64,
    pub misdiagnoses: usize,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

pub fn write_classify(path: &Path, rows: &[ClassifyRow]) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    wtr.write_record(CLASSIFY_HEADER).map_err(csv_err(path))?;
    for r in rows {
        wtr.write_record([
            format_f64(r.delta),
            r.misdiagnoses.to_string(),
            r.iterations.to_string(),
            format_f64(r.wall_seconds),
        ])
        .map_err(csv_err(path))?;
    }
    finish(wtr, path)
}

/// Long-format dump of the test scores, one line per `(δ, row)`.
pub fn write_raw_scores(path: &Path, rows: &[ClassifyRow]) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    wtr.write_record(RAW_SCORES_HEADER).map_err(csv_err(path))?;
    for r in rows {
        for (i, (s, l)) in r.scores.iter().zip(&r.labels).enumerate() {
            wtr.write_record([format_f64(r.delta), i.to_string(), format_f64(*s), l.to_string()])
                .map_err(csv_err(path))?;
        }
    }
    finish(wtr, path)
}
