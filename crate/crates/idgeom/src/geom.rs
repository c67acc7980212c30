//! Distance, neighbor, and spanning-tree kernels shared by every estimator.
//!
//! All kernels are schedule-independent: each output entry is a pure function
//! of its inputs, parallelism only partitions independent work, and any
//! floating-point reduction whose order could vary is done over a sorted
//! sequence instead.

use rayon::prelude::*;

use crate::cloud::{DistanceMatrix, PointCloud};
use crate::error::{Error, Result};

/// Points with at most this many rows get the dense Prim path; larger clouds
/// switch to block-evaluated distances to avoid the n^2 matrix.
const DENSE_LIMIT: usize = 4096;

#[inline]
fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Full symmetric Euclidean distance matrix, computed in data-parallel row
/// blocks. Each entry depends only on its own pair of rows, so the result is
/// identical at any thread count.
pub fn pairwise_distances(cloud: &PointCloud) -> Result<DistanceMatrix> {
    let n = cloud.n();
    let mut values = vec![0.0_f64; n * n];
    let overflow = values
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| {
            let a = cloud.row(i);
            let mut bad = false;
            for (j, slot) in row.iter_mut().enumerate() {
                let d = if i == j { 0.0 } else { dist(a, cloud.row(j)) };
                if !d.is_finite() {
                    bad = true;
                }
                *slot = d;
            }
            bad
        })
        .reduce(|| false, |a, b| a || b);
    if overflow {
        return Err(Error::InvalidInput(
            "distance overflowed f64 range; coordinates too large".into(),
        ));
    }
    Ok(DistanceMatrix::from_flat(values, n))
}

/// One neighbor of a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist: f64,
}

/// Exact k-nearest neighbors of every point, self excluded, sorted by
/// ascending distance with ties broken by smaller index.
#[derive(Debug, Clone)]
pub struct KnnResult {
    pub neighbors: Vec<Vec<Neighbor>>,
    /// Number of points whose nearest neighbor sits at distance zero
    /// (duplicate points). Permitted here; estimators decide what to do.
    pub zero_distance_points: usize,
}

pub fn knn(cloud: &PointCloud, k: usize) -> Result<KnnResult> {
    let dm = pairwise_distances(cloud)?;
    knn_from_matrix(&dm, k)
}

pub fn knn_from_matrix(dm: &DistanceMatrix, k: usize) -> Result<KnnResult> {
    let n = dm.n();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be smaller than the point count {n}"
        )));
    }
    let neighbors: Vec<Vec<Neighbor>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = dm.row(i);
            let mut cand: Vec<Neighbor> = row
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, &d)| Neighbor { index: j, dist: d })
                .collect();
            cand.select_nth_unstable_by(k - 1, |a, b| {
                (a.dist, a.index)
                    .partial_cmp(&(b.dist, b.index))
                    .expect("finite distances")
            });
            cand.truncate(k);
            cand.sort_unstable_by(|a, b| {
                (a.dist, a.index)
                    .partial_cmp(&(b.dist, b.index))
                    .expect("finite distances")
            });
            cand
        })
        .collect();
    let zero_distance_points = neighbors.iter().filter(|ns| ns[0].dist == 0.0).count();
    Ok(KnnResult {
        neighbors,
        zero_distance_points,
    })
}

/// Total edge length of a Euclidean minimum spanning tree.
///
/// A single point has length zero. The value does not depend on point order:
/// all minimum spanning trees of a graph share the same edge-weight multiset,
/// and the weights are summed in sorted order.
pub fn mst_total_length(cloud: &PointCloud) -> Result<f64> {
    let n = cloud.n();
    if n <= DENSE_LIMIT {
        let dm = pairwise_distances(cloud)?;
        let indices: Vec<usize> = (0..n).collect();
        Ok(mst_length_from_matrix(&dm, &indices))
    } else {
        mst_length_blocked(cloud)
    }
}

/// Prim over a subset of rows of a precomputed distance matrix.
/// `indices` selects the points; an empty or singleton subset has length 0.
pub fn mst_length_from_matrix(dm: &DistanceMatrix, indices: &[usize]) -> f64 {
    let m = indices.len();
    if m < 2 {
        return 0.0;
    }
    let mut in_tree = vec![false; m];
    let mut best = vec![f64::INFINITY; m];
    let mut edges = Vec::with_capacity(m - 1);
    in_tree[0] = true;
    let mut last = 0usize;
    for _ in 1..m {
        let row = dm.row(indices[last]);
        for j in 0..m {
            if !in_tree[j] {
                let d = row[indices[j]];
                if d < best[j] {
                    best[j] = d;
                }
            }
        }
        let mut pick = usize::MAX;
        let mut pick_d = f64::INFINITY;
        for j in 0..m {
            if !in_tree[j] && best[j] < pick_d {
                pick = j;
                pick_d = best[j];
            }
        }
        in_tree[pick] = true;
        edges.push(pick_d);
        last = pick;
    }
    sorted_sum(edges)
}

/// Prim with block-parallel distance evaluation for clouds too large for a
/// dense matrix. Each round updates candidate edges against the newly added
/// vertex; updates are independent per vertex, so the result is
/// schedule-independent.
fn mst_length_blocked(cloud: &PointCloud) -> Result<f64> {
    let n = cloud.n();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut edges = Vec::with_capacity(n - 1);
    in_tree[0] = true;
    let mut last = 0usize;
    for _ in 1..n {
        let anchor = cloud.row(last);
        let overflow = best
            .par_iter_mut()
            .enumerate()
            .map(|(j, b)| {
                if in_tree[j] {
                    return false;
                }
                let d = dist(anchor, cloud.row(j));
                if d < *b {
                    *b = d;
                }
                !d.is_finite()
            })
            .reduce(|| false, |a, b| a || b);
        if overflow {
            return Err(Error::InvalidInput(
                "distance overflowed f64 range; coordinates too large".into(),
            ));
        }
        // Deterministic argmin: strict < with ascending index scan breaks
        // ties toward the smaller index.
        let pick = best
            .iter()
            .enumerate()
            .filter(|&(j, _)| !in_tree[j])
            .fold((usize::MAX, f64::INFINITY), |acc, (j, &d)| {
                if d < acc.1 {
                    (j, d)
                } else {
                    acc
                }
            })
            .0;
        in_tree[pick] = true;
        edges.push(best[pick]);
        last = pick;
    }
    Ok(sorted_sum(edges))
}

/// Sum in ascending order so the result is a function of the edge-weight
/// multiset alone, not of traversal order.
fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite edge lengths"));
    values.iter().sum()
}

/// A point ordering that depends only on the distance multiset, not on row
/// order: points sort by an exactly order-independent integer key (the sum
/// of their rounded normalized distances). Reordering the input rows permutes
/// the keys with the points, so seeded subsampling against this order picks
/// the same point sets; isometries perturb the keys far less than generic
/// key gaps. Distinct points with colliding keys fall back to row order,
/// which only duplicates hit in practice.
pub(crate) fn canonical_order(dm: &DistanceMatrix) -> Vec<usize> {
    let n = dm.n();
    let max_d = (0..n)
        .map(|i| dm.row(i).iter().cloned().fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let scale = if max_d > 0.0 {
        (1u64 << 40) as f64 / max_d
    } else {
        0.0
    };
    let keys: Vec<u128> = (0..n)
        .into_par_iter()
        .map(|i| {
            dm.row(i)
                .iter()
                .map(|&d| (d * scale).round() as u128)
                .sum()
        })
        .collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
    idx
}
