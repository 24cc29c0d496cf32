//! Shared JSON encoding for complex matrices: an array of rows, each entry a
//! `[re, im]` pair.

use nalgebra::DMatrix;
use serde_json::Value;
use thiserror::Error;

use crate::C64;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixJsonError {
    #[error("matrix JSON must be an array of rows")]
    NotRows,
    #[error("row {row} has length {len}, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("entry ({row}, {col}) is not a [re, im] pair of numbers")]
    BadEntry { row: usize, col: usize },
}

pub fn to_json(m: &DMatrix<C64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn from_json(v: &Value) -> Result<DMatrix<C64>, MatrixJsonError> {
    let rows = v.as_array().ok_or(MatrixJsonError::NotRows)?;
    if rows.is_empty() {
        return Ok(DMatrix::zeros(0, 0));
    }
    let ncols = rows[0].as_array().ok_or(MatrixJsonError::NotRows)?.len();
    let mut m = DMatrix::zeros(rows.len(), ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or(MatrixJsonError::NotRows)?;
        if row.len() != ncols {
            return Err(MatrixJsonError::Ragged { row: i, len: row.len(), expected: ncols });
        }
        for (j, e) in row.iter().enumerate() {
            let pair = e.as_array().filter(|p| p.len() == 2);
            let (re, im) = match pair.map(|p| (p[0].as_f64(), p[1].as_f64())) {
                Some((Some(re), Some(im))) => (re, im),
                _ => return Err(MatrixJsonError::BadEntry { row: i, col: j }),
            };
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, -2.0), C64::new(0.0, 0.5), C64::new(3.0, 0.0), C64::new(-1.0, 1.0)]);
        assert_eq!(from_json(&to_json(&m)).unwrap(), m);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let v = serde_json::json!([[[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0]]]);
        assert!(matches!(from_json(&v), Err(MatrixJsonError::Ragged { row: 1, .. })));
        assert_eq!(from_json(&serde_json::json!([[1.0]])), Err(MatrixJsonError::BadEntry { row: 0, col: 0 }));
    }
}
