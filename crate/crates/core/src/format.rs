//! JSON file formats for models, observables and regions.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, CVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub singles: Vec<SingleRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: String,
    pub b: String,
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleRecord {
    pub v: String,
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableFile {
    pub support: Vec<String>,
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionFile {
    Vertices { vertices: Vec<String> },
    List(Vec<String>),
}

impl RegionFile {
    pub fn vertices(&self) -> &[String] {
        match self {
            RegionFile::Vertices { vertices } | RegionFile::List(vertices) => vertices,
        }
    }
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

impl ObservableFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl RegionFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

pub fn pairs_to_matrix(data: &[[f64; 2]], dim: usize) -> Result<CMatrix> {
    if data.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: data.len(),
        });
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = data[i * dim + j];
        c64(re, im)
    }))
}

pub fn vector_to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_vector(data: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(data.len(), data.iter().map(|&[re, im]| c64(re, im)))
}

/// Serde adapter writing a matrix as a list of rows of `[re, im]` pairs.
pub mod rows {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(CMatrix::from_fn(nrows, ncols, |i, j| c64(rows[i][j][0], rows[i][j][1])))
    }
}

/// Serde adapter writing a vector as a list of `[re, im]` pairs.
pub mod amplitudes {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVector, D::Error> {
        let data: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs_to_vector(&data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_file_round_trips_bit_exactly() {
        let text = r#"{"vertices":["1","2"],"edges":[{"a":"1","b":"2","matrix":[[0.1,0.0],[0.30000000000000004,-1e-300],[0,0],[0,0],[0.30000000000000004,1e-300],[0.7,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[1.2345678901234567,0]]}]}"#;
        let m = ModelFile::from_json(text).unwrap();
        let again = ModelFile::from_json(&m.to_json()).unwrap();
        assert_eq!(m, again);
        for (x, y) in m.edges[0].matrix.iter().zip(&again.edges[0].matrix) {
            assert_eq!(x[0].to_bits(), y[0].to_bits());
            assert_eq!(x[1].to_bits(), y[1].to_bits());
        }
    }

    #[test]
    fn region_accepts_both_shapes() {
        assert_eq!(RegionFile::from_json(r#"["a","b"]"#).unwrap().vertices(), ["a", "b"]);
        assert_eq!(
            RegionFile::from_json(r#"{"vertices":["c"]}"#).unwrap().vertices(),
            ["c"]
        );
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(ModelFile::from_json("{"), Err(Error::Parse(_))));
    }
}
