//! Tight local estimator: a low-variance local dimension estimate that
//! augments the k-NN distances with sphere-calibrated measurements taken
//! from every neighbor and its point-reflection through the query.
//!
//! For a query q with neighborhood radius r, each ordered neighbor pair
//! (x_i, x_j) contributes two measurements: the distance from x_i to x_j and
//! the distance from the mirror point 2q - x_i to x_j, both rescaled onto
//! the q-centered ball of radius r. The local estimate is the maximum
//! likelihood (Hill) form over the augmented measurement multiset; per-point
//! values are combined by inverse averaging.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{IdEstimate, PlausibilityWindow};
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geom::{knn, KnnResult};

/// Measurements below this fraction of the neighborhood radius are treated
/// as underflow and dropped. Relative to r so the estimator stays
/// scale-invariant.
const UNDERFLOW_FRAC: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct TleConfig {
    pub k: usize,
    pub window: PlausibilityWindow,
}

impl Default for TleConfig {
    fn default() -> Self {
        Self {
            k: 20,
            window: PlausibilityWindow::default(),
        }
    }
}

pub fn tle_estimate(cloud: &PointCloud, cfg: &TleConfig) -> Result<IdEstimate> {
    validate_k(cfg.k, cloud.n())?;
    let kr = knn(cloud, cfg.k)?;
    tle_from_knn(cloud, &kr, cfg)
}

pub(crate) fn tle_from_knn(
    cloud: &PointCloud,
    kr: &KnnResult,
    cfg: &TleConfig,
) -> Result<IdEstimate> {
    validate_k(cfg.k, cloud.n())?;
    let k = cfg.k;
    let locals: Vec<Option<f64>> = kr
        .neighbors
        .par_iter()
        .map(|ns| {
            let dists: Vec<f64> = ns[..k].iter().map(|n| n.dist).collect();
            let ids: Vec<usize> = ns[..k].iter().map(|n| n.index).collect();
            tle_local_inverse(cloud, &ids, &dists)
        })
        .collect();

    let mut inv_values: Vec<f64> = locals.iter().filter_map(|v| *v).collect();
    let excluded = locals.len() - inv_values.len();
    if inv_values.is_empty() {
        return Err(Error::DegenerateInput(
            "every neighborhood was degenerate (zero-distance pairs)".into(),
        ));
    }
    // Sorted before summation: reordered clouds reproduce the same bits.
    inv_values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite inverses"));
    let mean_inv = inv_values.iter().sum::<f64>() / inv_values.len() as f64;
    let (value, note) = if mean_inv > 0.0 {
        (1.0 / mean_inv, None)
    } else {
        (
            f64::INFINITY,
            Some("all local measurement sums were zero".to_string()),
        )
    };

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("k".into(), k as f64);
    diagnostics.insert("excluded".into(), excluded as f64);

    let valid = note.is_none() && cfg.window.contains(value);
    Ok(IdEstimate {
        value,
        samples: Vec::new(),
        diagnostics,
        valid,
        note,
    })
}

/// Inverse local dimension (1/ID) at one query point, or `None` when the
/// neighborhood is degenerate.
fn tle_local_inverse(cloud: &PointCloud, ids: &[usize], dists: &[f64]) -> Option<f64> {
    let k = ids.len();
    let r = dists[k - 1];
    if r == 0.0 {
        return None;
    }
    let floor = UNDERFLOW_FRAC * r;
    let mut sum_logs = 0.0;
    let mut count = 0usize;
    for i in 0..k {
        let ui = dists[i];
        let xi = cloud.row(ids[i]);
        for j in 0..k {
            if i == j {
                continue;
            }
            let uj = dists[j];
            let v = euclid(xi, cloud.row(ids[j]));
            if v == 0.0 {
                // Coincident neighbors carry no usable measurement from
                // either viewpoint.
                continue;
            }
            let s = calibrate(ui, uj, v * v, r);
            if s > floor {
                sum_logs += (s / r).ln();
                count += 1;
            }
            // Mirror viewpoint 2q - x_i: by the parallelogram law its
            // distance w to x_j satisfies w^2 = 2 u_i^2 + 2 u_j^2 - v^2.
            let w2 = 2.0 * ui * ui + 2.0 * uj * uj - v * v;
            if w2 > 0.0 {
                let t = calibrate(ui, uj, w2, r);
                if t > floor {
                    sum_logs += (t / r).ln();
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        return None;
    }
    Some((-sum_logs / count as f64).max(0.0))
}

/// Rescale a measurement taken from a viewpoint at distance `ui` from the
/// query onto the query-centered ball of radius `r`. `q2` is the squared
/// viewpoint-to-target distance; `uj` the target's own distance to the query.
fn calibrate(ui: f64, uj: f64, q2: f64, r: f64) -> f64 {
    if ui == 0.0 {
        // Viewpoint coincides with the query.
        return uj;
    }
    if uj == 0.0 {
        let q = q2.sqrt();
        return r * q / (r + q);
    }
    let a = r * r - ui * ui;
    let b = ui * ui + q2 - uj * uj;
    if a <= 0.0 {
        // Viewpoint on the boundary sphere: limit of the general form.
        return r * q2 / (r * r + q2 - uj * uj);
    }
    let disc = (b * b + 4.0 * q2 * a).max(0.0);
    r * (disc.sqrt() - b) / (2.0 * a)
}

fn validate_k(k: usize, n: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!(
            "tle needs k >= 3, got {k}"
        )));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be smaller than the point count {n}"
        )));
    }
    Ok(())
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}
