use std::path::Path;

use manifold_vb::models::Dataset;
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};
use crate::output::write_table;

/// Reads a numeric CSV with a header row. When `required` is non-empty,
/// every listed column must be present.
pub fn load_csv_dataset(path: &Path, required: &[String]) -> CliResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    for r in required {
        if !names.contains(r) {
            return Err(CliError::Csv {
                path: path.into(),
                line: 1,
                message: format!("missing column {r:?} (found {})", names.join(", ")),
            });
        }
    }
    let mut values = vec![];
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (cell, name) in record.iter().zip(&names) {
            let v: f64 = cell.parse().map_err(|_| CliError::Csv {
                path: path.into(),
                line,
                message: format!("column {name:?}: cannot parse {cell:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(CliError::Csv {
                    path: path.into(),
                    line,
                    message: format!("column {name:?}: non-finite value {cell:?}"),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(CliError::Csv { path: path.into(), line: 2, message: "no data rows".into() });
    }
    let matrix = DMatrix::from_row_slice(rows, names.len(), &values);
    Ok(Dataset::new(matrix, names)?)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Io(io) => return CliError::io(path, std::io::Error::new(io.kind(), io.to_string())),
        _ => e.to_string(),
    };
    CliError::Csv { path: path.into(), line, message }
}

pub fn write_csv_dataset(path: &Path, data: &Dataset) -> CliResult<()> {
    let rows = data.observations.row_iter().map(|r| r.iter().copied().collect());
    write_table(path, &data.column_names, rows)
}
