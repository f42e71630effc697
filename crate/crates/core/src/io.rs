//! Plain-text exchange formats.
//!
//! Matrices and vectors are comma-separated numbers preceded by one header
//! line, for example `# rows=50,cols=200,kind=toeplitz-gaussian,seed=7`.
//! Vectors are stored as a single column. Numbers use the shortest
//! representation that parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub rows: usize,
    pub cols: usize,
    pub kind: String,
    pub seed: Option<u64>,
}

impl MatrixHeader {
    pub fn new(rows: usize, cols: usize, kind: impl Into<String>, seed: Option<u64>) -> Self {
        MatrixHeader {
            rows,
            cols,
            kind: kind.into(),
            seed,
        }
    }

    fn render(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("# rows={},cols={},kind={},seed={}", self.rows, self.cols, self.kind, seed)
    }

    fn parse(line: &str) -> std::result::Result<Self, String> {
        let body = line.strip_prefix('#').ok_or("missing '#' header line")?.trim();
        let (mut rows, mut cols, mut kind, mut seed) = (None, None, None, None);
        for field in body.split(',') {
            let (key, value) = field.split_once('=').ok_or_else(|| format!("malformed header field '{field}'"))?;
            let value = value.trim();
            match key.trim() {
                "rows" => rows = Some(value.parse::<usize>().map_err(|e| format!("rows: {e}"))?),
                "cols" => cols = Some(value.parse::<usize>().map_err(|e| format!("cols: {e}"))?),
                "kind" => kind = Some(value.to_string()),
                "seed" if value == "none" => seed = None,
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| format!("seed: {e}"))?),
                other => return Err(format!("unknown header field '{other}'")),
            }
        }
        Ok(MatrixHeader {
            rows: rows.ok_or("header lacks rows")?,
            cols: cols.ok_or("header lacks cols")?,
            kind: kind.unwrap_or_else(|| "dense".into()),
            seed,
        })
    }
}

pub fn format_matrix(m: &DMatrix<f64>, kind: &str, seed: Option<u64>) -> String {
    let header = MatrixHeader::new(m.nrows(), m.ncols(), kind, seed);
    let mut out = header.render();
    out.push('\n');
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", m[(r, c)]);
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<(DMatrix<f64>, MatrixHeader)> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let header = MatrixHeader::parse(first).map_err(|m| parse_err(1, m))?;
    let mut data = Vec::with_capacity(header.rows * header.cols);
    let mut rows = 0;
    for (idx, line) in lines {
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| parse_err(idx + 1, format!("'{}': {e}", v.trim()))))
            .collect::<Result<_>>()?;
        if values.len() != header.cols {
            return Err(parse_err(idx + 1, format!("expected {} columns, found {}", header.cols, values.len())));
        }
        data.extend(values);
        rows += 1;
    }
    if rows != header.rows {
        return Err(parse_err(1, format!("header says {} rows, found {rows}", header.rows)));
    }
    Ok((DMatrix::from_row_slice(header.rows, header.cols, &data), header))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>, kind: &str, seed: Option<u64>) -> Result<()> {
    write_text(path, &format_matrix(m, kind, seed))
}

pub fn read_matrix(path: &Path) -> Result<(DMatrix<f64>, MatrixHeader)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn write_vector(path: &Path, v: &[f64], kind: &str, seed: Option<u64>) -> Result<()> {
    write_matrix(path, &DMatrix::from_column_slice(v.len(), 1, v), kind, seed)
}

/// Reads a single-row or single-column matrix as a vector.
pub fn read_vector(path: &Path) -> Result<(Vec<f64>, MatrixHeader)> {
    let (m, header) = read_matrix(path)?;
    if m.ncols() != 1 && m.nrows() != 1 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected a vector, found a {}x{} matrix", m.nrows(), m.ncols()),
        });
    }
    Ok((m.iter().copied().collect(), header))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Writes `text`, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
