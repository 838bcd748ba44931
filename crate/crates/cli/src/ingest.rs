//! CSV ingestion: header row required, every column numeric, no missing cells.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sitscreen::Dataset;

use crate::error::{CliError, Result};

/// Which column holds the response: a header name or `#<0-based index>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseSelector {
    Name(String),
    Index(usize),
}

impl FromStr for ResponseSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.strip_prefix('#') {
            Some(idx) => idx
                .parse()
                .map(Self::Index)
                .map_err(|_| format!("bad column index {s:?}")),
            None if s.is_empty() => Err("empty response name".into()),
            None => Ok(Self::Name(s.to_string())),
        }
    }
}

impl fmt::Display for ResponseSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Name(s) => write!(f, "{s:?}"),
            Self::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    pub response_name: String,
    /// Column position of the response in the file.
    pub response_index: usize,
}

pub fn ingest_csv(path: &Path, response: &ResponseSelector, standardize: bool) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    ingest_reader(file, response, standardize)
}

pub fn ingest_reader<R: Read>(
    input: R,
    response: &ResponseSelector,
    standardize: bool,
) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(e, "<header>"))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let response_index = match response {
        ResponseSelector::Name(name) => header.iter().position(|h| h == name),
        ResponseSelector::Index(i) => (*i < header.len()).then_some(*i),
    }
    .ok_or_else(|| CliError::MissingResponse(response.to_string()))?;
    if header.len() < 2 {
        return Err(CliError::Config(
            "input needs at least one covariate besides the response".into(),
        ));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(e, "<row>"))?;
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(CliError::Parse {
                    row,
                    column: header[j].clone(),
                    message: "missing value".into(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| CliError::NonNumericColumn {
                column: header[j].clone(),
                row,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(CliError::Parse {
                    row,
                    column: header[j].clone(),
                    message: format!("non-finite value {cell}"),
                });
            }
            columns[j].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(CliError::EmptyData);
    }

    let y = columns.remove(response_index);
    let mut names = header;
    let response_name = names.remove(response_index);
    if standardize {
        columns.iter_mut().for_each(|c| standardize_column(c));
    }
    let dataset = Dataset::from_columns(columns, y, Some(names))?;
    Ok(Ingested {
        dataset,
        response_name,
        response_index,
    })
}

fn csv_error(e: csv::Error, column: &str) -> CliError {
    let row = e.position().map_or(0, |p| p.line() as usize);
    CliError::Parse {
        row,
        column: column.to_string(),
        message: e.to_string(),
    }
}

/// Centers to mean 0 and scales to sample variance 1. Constant columns are
/// only centered.
pub fn standardize_column(col: &mut [f64]) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    col.iter_mut().for_each(|v| *v -= mean);
    let var = col.iter().map(|v| v * v).sum::<f64>() / (n - 1.0);
    if var > 0.0 {
        let sd = var.sqrt();
        col.iter_mut().for_each(|v| *v /= sd);
    }
}
