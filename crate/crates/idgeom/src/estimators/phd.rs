//! Dimension from the growth rate of minimum-spanning-tree length.
//!
//! Subsample the cloud at several sizes, measure total MST length at each
//! size, and fit `log L` against `log n`. A d-dimensional set has
//! `L(n) ~ n^((d-1)/d)`, so the fitted slope `s` gives `d = 1/(1-s)`.

use rand::Rng;
use rayon::prelude::*;

use super::{IdEstimate, PlausibilityWindow};
use crate::cloud::{DistanceMatrix, PointCloud};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::geom::{mst_length_from_matrix, pairwise_distances};
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Mean,
    Median,
}

impl Aggregator {
    fn apply(&self, values: &[f64]) -> f64 {
        match self {
            Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregator::Median => {
                let mut v = values.to_vec();
                v.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite lengths"));
                let m = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[m]
                } else {
                    0.5 * (v[m - 1] + v[m])
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhdConfig {
    /// Strictly increasing subsample sizes; the largest must not exceed the
    /// cloud size and must be at least 8.
    pub sizes: Vec<usize>,
    pub restarts: usize,
    pub aggregator: Aggregator,
    pub rng: RngSpec,
    /// Slope guard: slopes at or above `1 - 1/dim_max` flag the estimate
    /// invalid instead of reporting an enormous dimension.
    pub dim_max: f64,
    pub window: PlausibilityWindow,
}

impl PhdConfig {
    /// Default schedule: eight geometrically spaced sizes from n/16 up to n,
    /// 15 restarts, median aggregation.
    pub fn default_for(n: usize, rng: RngSpec) -> Self {
        Self::with_sizes(geometric_sizes(n), rng)
    }

    pub fn with_sizes(sizes: Vec<usize>, rng: RngSpec) -> Self {
        Self {
            sizes,
            restarts: 15,
            aggregator: Aggregator::Median,
            rng,
            dim_max: 20.0,
            window: PlausibilityWindow::default(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let mut distinct = self.sizes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(Error::InvalidArgument(
                "need at least 3 distinct subsample sizes".into(),
            ));
        }
        let max = *distinct.last().unwrap();
        let min = *distinct.first().unwrap();
        if max > n {
            return Err(Error::InvalidArgument(format!(
                "largest subsample size {max} exceeds cloud size {n}"
            )));
        }
        if max < 8 {
            return Err(Error::InvalidArgument(
                "largest subsample size must be at least 8".into(),
            ));
        }
        if min < 2 {
            return Err(Error::InvalidArgument(
                "subsample sizes must be at least 2".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be positive".into()));
        }
        Ok(())
    }
}

/// Eight geometrically spaced sizes from max(8, n/16) up to n.
pub fn geometric_sizes(n: usize) -> Vec<usize> {
    let hi = n as f64;
    let lo = (n as f64 / 16.0).max(8.0).min(hi);
    let steps = 8usize;
    let mut sizes: Vec<usize> = (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            (lo * (hi / lo).powf(t)).round() as usize
        })
        .collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
}

pub fn phd_estimate(cloud: &PointCloud, cfg: &PhdConfig) -> Result<IdEstimate> {
    let dm = pairwise_distances(cloud)?;
    phd_from_matrix(&dm, cfg)
}

pub(crate) fn phd_from_matrix(dm: &DistanceMatrix, cfg: &PhdConfig) -> Result<IdEstimate> {
    let n = dm.n();
    cfg.validate(n)?;
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();

    // Subsamples are drawn against the canonical point order, so the choice
    // of points depends on the distance structure rather than on row order:
    // permuted clouds yield bit-identical estimates.
    let canon = crate::geom::canonical_order(dm);

    // lengths[size_idx][restart] — every (size, restart) cell draws from its
    // own substream, so the parallel execution order cannot matter.
    let restarts = cfg.restarts;
    let cells: Vec<f64> = (0..sizes.len() * restarts)
        .into_par_iter()
        .map(|cell| {
            let size_idx = cell / restarts;
            let m = sizes[size_idx];
            let rng = cfg.rng.substream(cell as u64);
            let mut idx = sample_without_replacement(n, m, rng);
            for slot in idx.iter_mut() {
                *slot = canon[*slot];
            }
            mst_length_from_matrix(dm, &idx)
        })
        .collect();
    let lengths: Vec<&[f64]> = cells.chunks(restarts).collect();

    let aggregated: Vec<f64> = lengths.iter().map(|ls| cfg.aggregator.apply(ls)).collect();
    if aggregated.iter().all(|&l| l == 0.0) {
        return Err(Error::DegenerateInput(
            "all subsampled MST lengths are zero (duplicate-collapsed cloud)".into(),
        ));
    }

    let usable: Vec<(f64, f64)> = sizes
        .iter()
        .zip(&aggregated)
        .filter(|&(_, &l)| l > 0.0)
        .map(|(&m, &l)| ((m as f64).ln(), l.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "fewer than 3 usable sizes ({} of {})",
            usable.len(),
            sizes.len()
        )));
    }

    let xs: Vec<f64> = usable.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = usable.iter().map(|&(_, y)| y).collect();
    let fit = fit_line(&xs, &ys)?;
    let slope = fit.slope;
    let value = if slope < 1.0 {
        1.0 / (1.0 - slope)
    } else {
        f64::INFINITY
    };

    let slope_guard = 1.0 - 1.0 / cfg.dim_max;
    let mut note = None;
    let mut valid = true;
    if slope >= slope_guard {
        valid = false;
        note = Some(format!(
            "fitted slope {slope:.4} at or above guard {slope_guard:.4}"
        ));
    }
    if !cfg.window.contains(value) {
        valid = false;
    }

    // Per-restart estimates: restart r fits its own length curve. These feed
    // stability diagnostics; unusable restarts are skipped.
    let samples: Vec<f64> = (0..restarts)
        .filter_map(|r| {
            let pts: Vec<(f64, f64)> = sizes
                .iter()
                .enumerate()
                .filter(|&(j, _)| lengths[j][r] > 0.0)
                .map(|(j, &m)| ((m as f64).ln(), lengths[j][r].ln()))
                .collect();
            if pts.len() < 3 {
                return None;
            }
            let xs: Vec<f64> = pts.iter().map(|&(x, _)| x).collect();
            let ys: Vec<f64> = pts.iter().map(|&(_, y)| y).collect();
            let f = fit_line(&xs, &ys).ok()?;
            (f.slope < 1.0).then(|| 1.0 / (1.0 - f.slope))
        })
        .collect();

    let mut diagnostics = std::collections::BTreeMap::new();
    diagnostics.insert("slope".into(), slope);
    diagnostics.insert("intercept".into(), fit.intercept);
    diagnostics.insert("residual".into(), fit.residual_sum);
    diagnostics.insert("sizes_used".into(), usable.len() as f64);
    diagnostics.insert("restarts".into(), restarts as f64);

    Ok(IdEstimate {
        value,
        samples,
        diagnostics,
        valid,
        note,
    })
}

/// First `m` entries of a seeded partial Fisher-Yates shuffle of `0..n`.
fn sample_without_replacement(n: usize, m: usize, spec: RngSpec) -> Vec<usize> {
    let mut rng = spec.rng();
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m.min(n) {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(m);
    idx
}
