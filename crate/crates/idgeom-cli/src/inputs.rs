//! File loading shared by the subcommands.

use std::io::Read;

use idgeom::io::{csvmat, emb};
use idgeom::{Error, PointCloud, Result};
use ndarray::{Array1, Array2};

/// Read a file, or stdin when the path is `-`.
pub fn read_bytes(path: &str) -> Result<Vec<u8>> {
    if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(Error::Io)
    }
}

/// One or more matrices from an embedding container or a numeric CSV file,
/// sniffed by magic bytes.
pub fn load_matrices(path: &str) -> Result<Vec<Array2<f64>>> {
    let bytes = read_bytes(path)?;
    parse_matrices(&bytes)
}

fn parse_matrices(bytes: &[u8]) -> Result<Vec<Array2<f64>>> {
    if bytes.starts_with(&emb::MAGIC) {
        Ok(emb::parse_records(bytes)?
            .into_iter()
            .map(|r| r.data)
            .collect())
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::Parse("input is neither an embedding container nor UTF-8 CSV".into()))?;
        Ok(vec![csvmat::parse_csv_matrix(text)?])
    }
}

/// Labeled clouds plus per-record failures.
pub type LoadedClouds = (Vec<(String, PointCloud)>, Vec<(String, String)>);

/// Matrices as labeled clouds. Records that violate cloud invariants are
/// reported per row and skipped.
pub fn load_clouds(path: &str) -> Result<LoadedClouds> {
    let bytes = read_bytes(path)?;
    if bytes.is_empty() {
        return Err(Error::Parse("no clouds parsed".into()));
    }
    let matrices = parse_matrices(&bytes)?;
    if matrices.is_empty() {
        return Err(Error::Parse("no clouds parsed".into()));
    }
    let mut clouds = Vec::new();
    let mut failures = Vec::new();
    for (i, m) in matrices.into_iter().enumerate() {
        let id = format!("cloud_{i}");
        match PointCloud::new(m) {
            Ok(c) => clouds.push((id, c)),
            Err(e) => failures.push((id, e.to_string())),
        }
    }
    Ok((clouds, failures))
}

/// A single matrix from a file that must hold exactly one record.
pub fn load_matrix(path: &str) -> Result<Array2<f64>> {
    let mut ms = load_matrices(path)?;
    match ms.len() {
        1 => Ok(ms.remove(0)),
        n => Err(Error::Parse(format!(
            "{path}: expected exactly one matrix, found {n}"
        ))),
    }
}

/// A vector stored as a 1 x n or n x 1 matrix.
pub fn load_vector(path: &str) -> Result<Array1<f64>> {
    let m = load_matrix(path)?;
    let (r, c) = m.dim();
    if r != 1 && c != 1 {
        return Err(Error::Parse(format!(
            "{path}: expected a vector, got shape {r}x{c}"
        )));
    }
    Ok(Array1::from_iter(m))
}

pub fn parse_comma_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|f| {
            f.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} entry '{f}'")))
        })
        .collect()
}

/// Per-row warning as a structured stderr line.
pub fn warn_row(id: &str, message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({"level": "warn", "row": id, "message": message})
    );
}
