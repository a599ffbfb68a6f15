//! CSV ingestion: header required, UTF-8, '.' decimal separator, rows in
//! time order. Missing or non-numeric cells are hard errors that name the
//! offending column and 1-based data row; no imputation.

use std::path::Path;

use condind::{lag_embed, TimeSeriesSample};

use crate::CliError;

pub struct CsvTable {
    headers: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Input(format!("cannot read '{}': {e}", path.display())))?;
        let headers: Vec<String> =
            reader.headers().map_err(|e| CliError::Input(e.to_string()))?.iter().map(String::from).collect();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
        for (row_idx, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Input(e.to_string()))?;
            if record.len() != headers.len() {
                return Err(CliError::Input(format!(
                    "row {} has {} fields, expected {}",
                    row_idx + 1,
                    record.len(),
                    headers.len()
                )));
            }
            for (col_idx, cell) in record.iter().enumerate() {
                let value: f64 = cell.parse().map_err(|_| {
                    CliError::Input(format!(
                        "non-numeric value '{}' at row {}, column '{}'",
                        cell,
                        row_idx + 1,
                        headers[col_idx]
                    ))
                })?;
                if !value.is_finite() {
                    return Err(CliError::Input(format!(
                        "non-finite value '{}' at row {}, column '{}'",
                        cell,
                        row_idx + 1,
                        headers[col_idx]
                    )));
                }
                columns[col_idx].push(value);
            }
        }
        if columns.first().is_none_or(|c| c.is_empty()) {
            return Err(CliError::Input(format!("'{}' contains no data rows", path.display())));
        }
        Ok(Self { headers, columns })
    }

    pub fn column(&self, name: &str) -> Result<&[f64], CliError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| {
                CliError::Input(format!(
                    "missing column '{name}' (available: {})",
                    self.headers.join(", ")
                ))
            })
    }
}

/// Assemble the test sample from named columns via the lag embedding.
pub fn build_sample(
    table: &CsvTable,
    y_col: &str,
    z_col: &str,
    w_cols: &[String],
    lags: usize,
    horizon: usize,
) -> Result<TimeSeriesSample, CliError> {
    let target = table.column(y_col)?;
    let predictor = table.column(z_col)?;
    let conditioning: Vec<&[f64]> =
        w_cols.iter().map(|c| table.column(c)).collect::<Result<_, _>>()?;
    Ok(lag_embed(target, predictor, &conditioning, lags, horizon)?)
}
