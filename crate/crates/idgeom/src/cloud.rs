use ndarray::Array2;

use crate::error::{Error, Result};

/// An n×D matrix of row points. The universal input to estimators and
/// spectral diagnostics.
///
/// Construction enforces the invariants every downstream operation relies
/// on: at least one point, at least one ambient dimension, all entries
/// finite, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Array2<f64>,
    label: Option<String>,
}

impl PointCloud {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        Self::with_label(data, None)
    }

    pub fn with_label(data: Array2<f64>, label: Option<String>) -> Result<Self> {
        let (n, d) = data.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "point cloud must be non-empty, got shape {n}x{d}"
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(
                "point cloud contains non-finite entries".into(),
            ));
        }
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().to_owned()
        };
        Ok(Self { data, label })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("no rows".into()));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(data)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = Some(label.into());
    }

    /// Contiguous coordinates of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.flat()[i * d..(i + 1) * d]
    }

    #[inline]
    pub(crate) fn flat(&self) -> &[f64] {
        self.data.as_slice().expect("standard layout enforced")
    }

    /// The cloud with every coordinate multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive and finite, got {alpha}"
            )));
        }
        Self::with_label(&self.data * alpha, self.label.clone())
    }
}

/// Dense symmetric Euclidean distance matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    values: Vec<f64>,
    n: usize,
}

impl DistanceMatrix {
    pub(crate) fn from_flat(values: Vec<f64>, n: usize) -> Self {
        debug_assert_eq!(values.len(), n * n);
        Self { values, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}
