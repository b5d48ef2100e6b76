use super::HarnessError;
use crate::operators::LatticeSpec;
use std::path::Path;

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Csv(e.to_string())
}

/// One column with a header row. Values use the shortest representation
/// that round-trips exactly.
pub fn write_signal_csv(path: &Path, header: &str, values: &[f64]) -> Result<(), HarnessError> {
    write_columns_csv(path, &[header], &[values])
}

/// Several equal-length columns.
pub fn write_columns_csv(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<(), HarnessError> {
    if headers.len() != columns.len() {
        return Err(HarnessError::Invalid("one header per column required".into()));
    }
    let rows = columns.first().map(|c| c.len()).unwrap_or(0);
    if columns.iter().any(|c| c.len() != rows) {
        return Err(HarnessError::Invalid("columns must have equal length".into()));
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(headers).map_err(csv_err)?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| c[i].to_string())).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// First column of a CSV file with a header row.
pub fn read_signal_csv(path: &Path) -> Result<Vec<f64>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = rec.get(0).ok_or_else(|| HarnessError::Csv(format!("line {line}: empty record")))?;
        let v: f64 = field
            .trim()
            .parse()
            .map_err(|_| HarnessError::Csv(format!("line {line}: '{field}' is not a number")))?;
        out.push(v);
    }
    Ok(out)
}

/// Every column of a CSV file with a header row, all of equal length.
pub fn read_columns_csv(path: &Path) -> Result<Vec<Vec<f64>>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let width = r.headers().map_err(csv_err)?.len();
    let mut cols = vec![Vec::new(); width];
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != width {
            return Err(HarnessError::Csv(format!("line {line}: {} fields, header has {width}", rec.len())));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| HarnessError::Csv(format!("line {line}: '{field}' is not a number")))?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

/// A stacked image as a `k × n` table, one lattice row per CSV record and
/// headers `c0 … c{n−1}`.
pub fn write_image_csv(path: &Path, lattice: LatticeSpec, stacked: &[f64]) -> Result<(), HarnessError> {
    if stacked.len() != lattice.len() {
        return Err(HarnessError::Invalid(format!("image has {} values, lattice needs {}", stacked.len(), lattice.len())));
    }
    let headers: Vec<String> = (0..lattice.cols()).map(|j| format!("c{j}")).collect();
    let headers: Vec<&str> = headers.iter().map(String::as_str).collect();
    let k = lattice.rows();
    let columns: Vec<&[f64]> = stacked.chunks(k).collect();
    write_columns_csv(path, &headers, &columns)
}
