//! Levina-Bickel local likelihood estimator over k-NN distances.

use std::collections::BTreeMap;

use super::{IdEstimate, PlausibilityWindow};
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geom::{knn, KnnResult};

#[derive(Debug, Clone, Copy)]
pub struct MleConfig {
    pub k: usize,
    pub window: PlausibilityWindow,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            k: 20,
            window: PlausibilityWindow::default(),
        }
    }
}

/// Local estimate from one point's ascending neighbor distances
/// `T_1..T_k`: `m = [(1/(k-1)) * sum_j ln(T_k / T_j)]^(-1)`.
///
/// Returns `None` when any used distance is zero (the point must be
/// excluded) and `+inf` when all distances are equal.
pub fn mle_local(neighbor_dists: &[f64]) -> Option<f64> {
    let k = neighbor_dists.len();
    if k < 2 {
        return None;
    }
    let t_k = neighbor_dists[k - 1];
    if neighbor_dists.iter().any(|&t| t <= 0.0) {
        return None;
    }
    let sum: f64 = neighbor_dists[..k - 1].iter().map(|&t| (t_k / t).ln()).sum();
    let inv = sum / (k - 1) as f64;
    Some(if inv > 0.0 { 1.0 / inv } else { f64::INFINITY })
}

pub fn mle_estimate(cloud: &PointCloud, cfg: &MleConfig) -> Result<IdEstimate> {
    validate_k(cfg.k, cloud.n())?;
    let kr = knn(cloud, cfg.k)?;
    mle_from_knn(&kr, cfg)
}

pub(crate) fn mle_from_knn(kr: &KnnResult, cfg: &MleConfig) -> Result<IdEstimate> {
    validate_k(cfg.k, kr.neighbors.len())?;
    let k = cfg.k;
    let mut inv_values = Vec::with_capacity(kr.neighbors.len());
    let mut excluded = 0usize;
    for ns in &kr.neighbors {
        let dists: Vec<f64> = ns[..k].iter().map(|n| n.dist).collect();
        match mle_local(&dists) {
            Some(m) => inv_values.push(if m.is_finite() { 1.0 / m } else { 0.0 }),
            None => excluded += 1,
        }
    }
    if inv_values.is_empty() {
        return Err(Error::DegenerateInput(
            "every point had a zero neighbor distance".into(),
        ));
    }

    // Inverse-average aggregation: the global estimate inverts the mean of
    // the per-point inverse dimensions, which removes the harmonic bias of
    // averaging the raw local values. Summed in sorted order so reordered
    // clouds reproduce the exact same bits.
    inv_values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite inverses"));
    let mean_inv = inv_values.iter().sum::<f64>() / inv_values.len() as f64;
    let (value, note) = if mean_inv > 0.0 {
        (1.0 / mean_inv, None)
    } else {
        (
            f64::INFINITY,
            Some("all local log-ratio sums were zero".to_string()),
        )
    };

    let mut finite_locals: Vec<f64> = inv_values
        .iter()
        .filter(|&&iv| iv > 0.0)
        .map(|&iv| 1.0 / iv)
        .collect();
    finite_locals.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite locals"));
    let mean_m = if finite_locals.is_empty() {
        f64::NAN
    } else {
        finite_locals.iter().sum::<f64>() / finite_locals.len() as f64
    };

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("k".into(), k as f64);
    diagnostics.insert("excluded".into(), excluded as f64);
    diagnostics.insert("mean_local".into(), mean_m);

    let valid = note.is_none() && cfg.window.contains(value);
    Ok(IdEstimate {
        value,
        samples: Vec::new(),
        diagnostics,
        valid,
        note,
    })
}

fn validate_k(k: usize, n: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!(
            "mle needs k >= 3, got {k}"
        )));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be smaller than the point count {n}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_formula_direct() {
        // k = 2, T = [1, e]: m = 1 / ln(e) = 1 exactly.
        let m = mle_local(&[1.0, std::f64::consts::E]).unwrap();
        assert!((m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn local_formula_excludes_zero() {
        assert!(mle_local(&[0.0, 1.0]).is_none());
    }

    #[test]
    fn equal_distances_blow_up() {
        assert_eq!(mle_local(&[2.0, 2.0, 2.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn k_bounds() {
        let cloud = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let cfg = MleConfig {
            k: 3,
            window: PlausibilityWindow::unbounded(),
        };
        assert!(matches!(
            mle_estimate(&cloud, &cfg),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn duplicated_cloud_degenerate() {
        let mut rows = Vec::new();
        for i in 0..16 {
            let p = vec![i as f64, 0.0];
            rows.push(p.clone());
            rows.push(p);
        }
        // Every point has a zero-distance twin among its k = 3 neighbors.
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let cfg = MleConfig {
            k: 3,
            window: PlausibilityWindow::unbounded(),
        };
        let err = mle_estimate(&cloud, &cfg).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)));
    }
}
