//! JSON / CSV helpers shared by the report types.

use std::fmt::Display;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::C64;

/// Complex matrices as a list of rows of `[re, im]` pairs.
pub mod complex_matrix {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<C64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DMatrix<C64>, D::Error> {
        let rows: Vec<Vec<C64>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Minimal CSV: header plus rows of displayable cells.
pub fn csv_string<R, C>(header: &[&str], rows: R) -> String
where
    R: IntoIterator<Item = Vec<C>>,
    C: Display,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, serde::Deserialize, PartialEq, Debug)]
    struct W {
        #[serde(with = "complex_matrix")]
        m: DMatrix<C64>,
    }

    #[test]
    fn matrix_round_trip() {
        let w = W { m: DMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64 - 0.5)) };
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.starts_with("{\"m\":[[[0.0,-0.5],"));
        assert_eq!(serde_json::from_str::<W>(&s).unwrap(), w);
    }

    #[test]
    fn csv_layout() {
        assert_eq!(csv_string(&["a", "b"], vec![vec![1, 2], vec![3, 4]]), "a,b\n1,2\n3,4\n");
    }
}
