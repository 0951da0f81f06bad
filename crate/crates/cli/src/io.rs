//! CSV ingestion and emission.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// A CSV file held in memory with its header and digest.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub sha256: String,
    pub name: String,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        Table::parse(&bytes, &name)
    }

    pub fn parse(bytes: &[u8], name: &str) -> Result<Table, CliError> {
        let sha256 = hex::encode(Sha256::digest(bytes));
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(bytes);
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::Input(format!("{name}: cannot read header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(CliError::Input(format!("{name}: missing header row")));
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Input(format!("{name}: row {}: {e}", i + 1)))?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(Table { headers, rows, sha256, name: name.to_string() })
    }

    pub fn column_index(&self, column: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == column)
    }

    fn require(&self, column: &str) -> Result<usize, CliError> {
        self.column_index(column).ok_or_else(|| {
            CliError::Input(format!("{}: missing column '{column}' (found: {})", self.name, self.headers.join(", ")))
        })
    }

    /// Parses a numeric column; errors name the 1-based data row and column.
    pub fn floats(&self, column: &str) -> Result<Vec<f64>, CliError> {
        let j = self.require(column)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let cell = row.get(j).map_or("", String::as_str);
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(CliError::Input(format!(
                        "{}: row {}, column '{column}': expected a finite number, got '{cell}'",
                        self.name,
                        i + 1
                    ))),
                }
            })
            .collect()
    }

    /// Keeps only rows whose `split` column equals `name`.
    pub fn filter_split(mut self, name: Option<&str>) -> Result<Table, CliError> {
        let Some(name) = name else { return Ok(self) };
        let j = self.require("split")?;
        self.rows.retain(|r| r.get(j).map(String::as_str) == Some(name));
        if self.rows.is_empty() {
            return Err(CliError::Input(format!("{}: no rows with split = '{name}'", self.name)));
        }
        Ok(self)
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, headers: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, headers, rows)?;
    fs::write(path, buf).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_csv_to<W: Write>(out: W, headers: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Input(format!("cannot write CSV: {e}"));
    w.write_record(headers).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Input(format!("cannot write CSV: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_name_row_and_column() {
        let t = Table::parse(b"y,f_hat\n1,2\n3,abc\n", "t.csv").unwrap();
        let err = t.floats("f_hat").unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("f_hat") && err.contains("abc"), "{err}");
        assert!(t.floats("nope").is_err());
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02e23, 5e-324] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn split_filter() {
        let t = Table::parse(b"y,split\n1,train\n2,calib\n", "t.csv").unwrap();
        let t = t.filter_split(Some("calib")).unwrap();
        assert_eq!(t.floats("y").unwrap(), vec![2.0]);
    }
}
