//! CSV ingestion.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use sdrkit::DataSet;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Column-wise preprocessing applied while loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    None,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub data: DataSet,
    pub x_names: Vec<String>,
    pub y_names: Vec<String>,
    /// Rows skipped because a selected cell was blank or non-numeric.
    pub dropped: usize,
}

/// Reads the selected columns of a headed, comma-separated file.
///
/// Rows with a blank or non-numeric selected cell are dropped and counted,
/// or rejected outright when `strict` is set. Columns listed in
/// `transforms` as [`Transform::Sqrt`] must be nonnegative.
pub fn load_csv(
    path: &Path,
    x_columns: &[String],
    y_columns: &[String],
    transforms: &HashMap<String, Transform>,
    strict: bool,
) -> Result<LoadedData, CliError> {
    if x_columns.is_empty() || y_columns.is_empty() {
        return Err(CliError::Config("need at least one predictor and one response column".into()));
    }
    if let Some(c) = x_columns.iter().find(|c| y_columns.contains(c)) {
        return Err(CliError::Config(format!("column '{c}' is listed as both predictor and response")));
    }
    if let Some(c) = transforms.keys().find(|c| !x_columns.contains(c) && !y_columns.contains(c)) {
        return Err(CliError::Config(format!("transform given for unselected column '{c}'")));
    }
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(file);
    let header = reader.headers()?.clone();
    let index_of = |name: &String| {
        header.iter().position(|h| h == name).ok_or_else(|| CliError::MissingColumn(name.clone()))
    };
    let selected: Vec<(usize, &String)> =
        x_columns.iter().chain(y_columns).map(|c| index_of(c).map(|i| (i, c))).collect::<Result<_, _>>()?;

    let mut values = Vec::new();
    let mut dropped = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let row = row + 1;
        let mut parsed = Vec::with_capacity(selected.len());
        for &(i, name) in &selected {
            let cell = record.get(i).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => parsed.push(v),
                _ if strict => {
                    return Err(CliError::NonNumericCell { row, column: name.clone(), value: cell.to_string() });
                }
                _ => break,
            }
        }
        if parsed.len() < selected.len() {
            dropped += 1;
            continue;
        }
        for (v, &(_, name)) in parsed.iter_mut().zip(&selected) {
            if transforms.get(name) == Some(&Transform::Sqrt) {
                if *v < 0.0 {
                    return Err(CliError::NegativeUnderSqrt { row, column: name.clone(), value: *v });
                }
                *v = v.sqrt();
            }
        }
        values.extend(parsed);
    }
    let width = selected.len();
    let n = values.len() / width;
    if n == 0 {
        return Err(CliError::Data(format!("{}: no complete rows in the selected columns", path.display())));
    }
    let all = DMatrix::from_row_slice(n, width, &values);
    let p = x_columns.len();
    let x = all.columns(0, p).into_owned();
    let y = all.columns(p, y_columns.len()).into_owned();
    Ok(LoadedData { data: DataSet::new(x, y)?, x_names: x_columns.to_vec(), y_names: y_columns.to_vec(), dropped })
}
