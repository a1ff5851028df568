use nalgebra::DMatrix;

use crate::{Error, Result};

/// A numeric table: one observation per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub observations: DMatrix<f64>,
    pub column_names: Vec<String>,
}

impl Dataset {
    pub fn new(observations: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        if observations.nrows() == 0 {
            return Err(Error::Config("dataset has no rows".into()));
        }
        if observations.ncols() != column_names.len() {
            return Err(Error::dims(observations.ncols(), column_names.len()));
        }
        if let Some(pos) = observations.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % observations.nrows(), pos / observations.nrows());
            return Err(Error::Config(format!("missing or non-finite value at row {r}, column {c}")));
        }
        Ok(Self {
            observations,
            column_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.observations.nrows()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("no column named {name:?}")))
    }

    /// Splits off a response column: `(design matrix, response)`.
    pub fn split_response(&self, response: &str) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let idx = self.column_index(response)?;
        let y = self.observations.column(idx).iter().copied().collect();
        let x = self.observations.clone().remove_column(idx);
        Ok((x, y))
    }
}
