//! CSV emission and re-parsing for every table the harness produces.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{ExpError, Result};

/// Writes one row per record, header from the field names.
pub fn write_records<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

/// A numeric table with named columns; empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(headers: Vec<String>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ExpError::config(format!("no column named {name:?}")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let j = self.column_index(name)?;
        Ok(self.rows.iter().map(|row| row[j]).collect())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(
                row.iter()
                    .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|cell| {
                    if cell.trim().is_empty() {
                        Ok(None)
                    } else {
                        cell.trim()
                            .parse::<f64>()
                            .map(Some)
                            .map_err(|_| ExpError::config(format!("non-numeric cell {cell:?}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }
}
