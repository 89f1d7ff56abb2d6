//! Matrix files: a JSON document holding one row-major 2-D array or a list of them.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;
use skewbound::SkewMatrix;

use crate::report::CliError;

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDocument {
    One(Vec<Vec<f64>>),
    Many(Vec<Vec<Vec<f64>>>),
}

fn to_matrix(rows: Vec<Vec<f64>>, index: usize) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(CliError::Input(format!("matrix {index}: rows must be nonempty and of equal length")));
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

/// Parses the document into raw matrices without checking skew symmetry.
pub fn parse_matrices(text: &str) -> Result<Vec<DMatrix<f64>>, CliError> {
    let doc: MatrixDocument =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("not a matrix document: {e}")))?;
    let list = match doc {
        MatrixDocument::One(rows) => vec![rows],
        MatrixDocument::Many(list) => list,
    };
    if list.is_empty() {
        return Err(CliError::Input("the document holds no matrices".into()));
    }
    list.into_iter()
        .enumerate()
        .map(|(k, rows)| to_matrix(rows, k + 1))
        .collect()
}

pub fn read_skew_matrices(path: &Path) -> Result<Vec<SkewMatrix>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_matrices(&text)?
        .into_iter()
        .enumerate()
        .map(|(k, m)| SkewMatrix::new(m).map_err(|e| CliError::Input(format!("matrix {}: {e}", k + 1))))
        .collect()
}
