//! `{"rows": R, "cols": C, "data": [[re, im], ...]}` matrices, row-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unitparam::{ComplexMatrix, C64};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Real matrix with row-major entries.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        Self {
            rows,
            cols,
            data: values.iter().map(|&x| [x, 0.0]).collect(),
        }
    }

    pub fn into_matrix(self) -> Result<ComplexMatrix, CliError> {
        self.check()?;
        let data = self.data.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        Ok(ComplexMatrix::from_vec(self.rows, self.cols, data)?)
    }

    /// Real parts; fails if any imaginary part is nonzero.
    pub fn into_real(self) -> Result<(usize, usize, Vec<f64>), CliError> {
        self.check()?;
        if self.data.iter().any(|[_, im]| *im != 0.0) {
            return Err(CliError::Input("parameter matrix must be real".into()));
        }
        Ok((self.rows, self.cols, self.data.into_iter().map(|[re, _]| re).collect()))
    }

    fn check(&self) -> Result<(), CliError> {
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::Input(format!(
                "matrix file declares {}x{} but holds {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Input("matrix file contains non-finite entries".into()));
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("malformed matrix file {}: {e}", path.display())))
    }
}
