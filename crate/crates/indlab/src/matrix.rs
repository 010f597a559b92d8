//! Matrix and vector JSON: `{"dim": n, "re": [[..]], "im": [[..]]}` for
//! matrices and `{"dim": n, "re": [..], "im": [..]}` for vectors. `im` may
//! be omitted for real data.

use std::path::Path;

use indlab_core::born::linalg::{c, CMatrix, CVector};
use indlab_core::born::{Observable, State};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub dim: usize,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

fn shape(what: &str, detail: String) -> Error {
    Error::Core(indlab_core::Error::InvalidArgument(format!("{what}: {detail}")))
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        let square = |rows: &Vec<Vec<f64>>, part: &str| -> Result<()> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(shape("matrix", format!("`{part}` is not {n}x{n}")));
            }
            Ok(())
        };
        square(&self.re, "re")?;
        if let Some(im) = &self.im {
            square(im, "im")?;
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            c(self.re[i][j], self.im.as_ref().map_or(0.0, |m| m[i][j]))
        }))
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let part = |f: fn(&indlab_core::born::linalg::C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        let im = part(|z| z.im);
        MatrixJson {
            dim: n,
            re: part(|z| z.re),
            im: im.iter().flatten().any(|&x| x != 0.0).then_some(im),
        }
    }
}

impl VectorJson {
    pub fn to_vector(&self) -> Result<CVector> {
        let n = self.dim;
        if self.re.len() != n || self.im.as_ref().is_some_and(|v| v.len() != n) {
            return Err(shape("vector", format!("components do not match dim {n}")));
        }
        Ok(CVector::from_fn(n, |i, _| {
            c(self.re[i], self.im.as_ref().map_or(0.0, |v| v[i]))
        }))
    }
}

pub fn read_observable(path: &Path) -> Result<Observable> {
    let m: MatrixJson = read_json(path)?;
    Ok(Observable::new(m.to_matrix()?)?)
}

/// A state file holds either a vector or a density matrix, told apart by
/// the shape of `re`.
pub fn read_state(path: &Path) -> Result<State> {
    let v: serde_json::Value = read_json(path)?;
    let is_matrix = v
        .get("re")
        .and_then(|r| r.get(0))
        .is_some_and(serde_json::Value::is_array);
    let ctx = || path.display().to_string();
    if is_matrix {
        let m: MatrixJson = serde_json::from_value(v).map_err(|e| Error::json(ctx(), e))?;
        Ok(State::density(m.to_matrix()?)?)
    } else {
        let s: VectorJson = serde_json::from_value(v).map_err(|e| Error::json(ctx(), e))?;
        Ok(State::vector(s.to_vector()?)?)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pauli_y_parses() {
        let m: MatrixJson = serde_json::from_str(r#"{"dim":2,"re":[[0,0],[0,0]],"im":[[0,-1],[1,0]]}"#).unwrap();
        let a = Observable::new(m.to_matrix().unwrap()).unwrap();
        assert_eq!(a.matrix()[(0, 1)], c(0.0, -1.0));
    }

    #[test]
    fn ragged_rejected() {
        let m: MatrixJson = serde_json::from_str(r#"{"dim":2,"re":[[1,0],[0]]}"#).unwrap();
        assert!(m.to_matrix().is_err());
        let v: VectorJson = serde_json::from_str(r#"{"dim":3,"re":[1,0]}"#).unwrap();
        assert!(v.to_vector().is_err());
    }

    proptest! {
        #[test]
        fn matrix_round_trip(n in 1usize..5, seed in proptest::collection::vec(-10i32..10, 32)) {
            let m = CMatrix::from_fn(n, n, |i, j| c(seed[i * 4 + j] as f64 / 4.0, seed[16 + i * 4 + j] as f64 / 8.0));
            let j = MatrixJson::from_matrix(&m);
            let text = serde_json::to_string(&j).unwrap();
            let back: MatrixJson = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_matrix().unwrap(), m);
        }
    }
}
