//! JSON conventions: complex numbers are `[re, im]` pairs, matrices are
//! row-major nested arrays.

use serde::{Deserialize, Serialize, Serializer};

use crate::numerics::{c, CMatrix, C64};

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn serialize_matrix<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
    matrix_to_pairs(m).serialize(s)
}

/// A complex number in input files: either `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexInput> for C64 {
    fn from(v: ComplexInput) -> Self {
        match v {
            ComplexInput::Pair([re, im]) => c(re, im),
            ComplexInput::Real(re) => c(re, 0.0),
        }
    }
}

pub fn to_complex(values: &[ComplexInput]) -> Vec<C64> {
    values.iter().map(|&v| v.into()).collect()
}

/// Row-major nested input into a matrix; `None` when rows are ragged or empty.
pub fn to_matrix(rows: &[Vec<ComplexInput>]) -> Option<CMatrix> {
    let r = rows.len();
    let k = rows.first()?.len();
    if k == 0 || rows.iter().any(|row| row.len() != k) {
        return None;
    }
    Some(CMatrix::from_fn(r, k, |i, j| rows[i][j].into()))
}
