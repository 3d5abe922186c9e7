//! Reading numeric matrices and label files from delimited text.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::LabelVector;
use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, Matrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// One row per sample.
    #[default]
    SamplesByFeatures,
    /// One row per feature, e.g. a genes x samples microarray export.
    FeaturesBySamples,
}

/// Where and how to read a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub path: PathBuf,
    /// `None` sniffs the first line for `,`, tab or `;`.
    pub delimiter: Option<u8>,
    pub orientation: Orientation,
    /// `None` treats the first row as a header when any cell is non-numeric.
    pub header: Option<bool>,
}

impl MatrixFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into(), delimiter: None, orientation: Orientation::default(), header: None }
    }

    pub fn read(&self) -> Result<DataMatrix> {
        read_matrix(self)
    }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), msg: msg.into() }
}

fn sniff_delimiter(path: &Path) -> Result<u8> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok([b',', b'\t', b';'].into_iter().find(|&d| first.as_bytes().contains(&d)).unwrap_or(b','))
}

/// Reads a rectangular numeric table. Empty lines are skipped.
pub fn read_matrix(spec: &MatrixFile) -> Result<DataMatrix> {
    let path = spec.path.as_path();
    let delimiter = match spec.delimiter {
        Some(d) => d,
        None => sniff_delimiter(path)?,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, e.to_string()))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => {
                if let Some(bad) = v.iter().position(|x| !x.is_finite()) {
                    return Err(parse_err(path, format!("row {}: non-finite value in column {}", line + 1, bad + 1)));
                }
                rows.push(v);
            }
            Err(_) if line == 0 && spec.header != Some(false) => {}
            Err(_) => {
                let cell = record.iter().find(|c| c.parse::<f64>().is_err()).unwrap_or_default();
                return Err(parse_err(path, format!("row {}: `{cell}` is not a number", line + 1)));
            }
        }
        if line == 0 && spec.header == Some(true) && rows.len() == 1 {
            rows.pop();
        }
    }
    if rows.is_empty() {
        return Err(parse_err(path, "no numeric rows"));
    }
    let width = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(parse_err(path, format!("row {} has {} cells, expected {width}", i + 1, rows[i].len())));
    }
    let m = Matrix::from_rows(&rows)?;
    let m = match spec.orientation {
        Orientation::SamplesByFeatures => m,
        Orientation::FeaturesBySamples => m.transpose(),
    };
    DataMatrix::new(m)
}

/// One integer label per line, `1..=k`; a non-numeric first line is a header.
/// `k` defaults to the largest label.
pub fn read_labels(path: &Path, k: Option<usize>) -> Result<LabelVector> {
    let mut labels = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<usize>() {
            Ok(v) => labels.push(v),
            Err(_) if i == 0 => {}
            Err(_) => return Err(parse_err(path, format!("line {}: `{cell}` is not a positive integer label", i + 1))),
        }
    }
    let k = k.unwrap_or_else(|| labels.iter().copied().max().unwrap_or(0));
    LabelVector::new(labels, k).map_err(|e| parse_err(path, e.to_string()))
}

/// One label per line, with a `label` header.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "label")?;
    for l in labels {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    Ok(())
}
