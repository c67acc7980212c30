//! Oracle-backed validation of the estimators on manifolds of known
//! dimension. Every tolerance here comes from an independent computation:
//! a brute-force MST, the closed-form Pareto fit, the CDF regression, or
//! the ground-truth dimension of the sampled manifold.

use idgeom::estimators::*;
use idgeom::geom::mst_total_length;
use idgeom::synth::{sample_manifold, ManifoldKind, ManifoldSpec};
use idgeom::{PointCloud, RngSpec};
use rand::Rng;

fn cube(d: usize, ambient: usize, n: usize, seed: u64) -> PointCloud {
    sample_manifold(&ManifoldSpec {
        kind: ManifoldKind::Cube,
        d,
        ambient,
        n,
        noise: 0.0,
        rng: RngSpec::new(seed),
    })
    .unwrap()
}

fn wide_cfg(seed: u64) -> EstimatorConfig {
    EstimatorConfig::new(RngSpec::new(seed)).with_window(PlausibilityWindow::unbounded())
}

// --- independent MST oracle -------------------------------------------------

/// Kruskal over explicitly enumerated edges with its own union-find; shares
/// no code with the library's Prim implementation.
fn kruskal_mst_length(cloud: &PointCloud) -> f64 {
    let n = cloud.n();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = cloud
                .row(i)
                .iter()
                .zip(cloud.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            edges.push((d, i, j));
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut picked = Vec::with_capacity(n - 1);
    for (d, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            picked.push(d);
            if picked.len() == n - 1 {
                break;
            }
        }
    }
    picked.sort_by(|a, b| a.partial_cmp(b).unwrap());
    picked.iter().sum()
}

#[test]
fn mst_matches_kruskal_oracle() {
    for seed in [3u64, 4, 5] {
        let cloud = cube(3, 6, 80, seed);
        let ours = mst_total_length(&cloud).unwrap();
        let oracle = kruskal_mst_length(&cloud);
        assert!(
            (ours - oracle).abs() <= 1e-12 * oracle,
            "seed {seed}: {ours} vs oracle {oracle}"
        );
    }
}

#[test]
fn mst_on_a_line_is_range() {
    // Independent fact: sorted 1-D points chain up, so the MST length is
    // max - min.
    let mut rng = RngSpec::new(8).rng();
    let xs: Vec<f64> = (0..200).map(|_| rng.random::<f64>() * 10.0).collect();
    let cloud = PointCloud::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
    let expected = xs.iter().cloned().fold(f64::MIN, f64::max)
        - xs.iter().cloned().fold(f64::MAX, f64::min);
    let got = mst_total_length(&cloud).unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

// --- phd ---------------------------------------------------------------------

#[test]
fn phd_unit_square_4096() {
    // Square sample: mst length grows like sqrt(n), slope ~ 1/2, value ~ 2.
    let cloud = cube(2, 2, 4096, 41);
    let mut cfg = PhdConfig::default_for(4096, RngSpec::new(17));
    cfg.window = PlausibilityWindow::unbounded();
    let est = phd_estimate(&cloud, &cfg).unwrap();
    assert!(
        est.value > 1.7 && est.value < 2.3,
        "phd on unit square = {}",
        est.value
    );
    let slope = est.diagnostics["slope"];
    assert!((slope - 0.5).abs() < 0.1, "slope = {slope}");
}

// --- twonn -------------------------------------------------------------------

/// Independent route: brute-force neighbor ratios plus the regression of
/// -ln(1 - F) on ln(mu) through the origin, all computed from scratch.
fn twonn_regression_oracle(cloud: &PointCloud, discard: f64) -> f64 {
    let n = cloud.n();
    let mut mu = Vec::with_capacity(n);
    for i in 0..n {
        let mut dists: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                cloud
                    .row(i)
                    .iter()
                    .zip(cloud.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if dists[0] > 0.0 {
            mu.push(dists[1] / dists[0]);
        }
    }
    mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total = mu.len();
    let keep = ((1.0 - discard) * total as f64).floor() as usize;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, m) in mu[..keep].iter().enumerate() {
        let x = m.ln();
        let y = -(1.0 - (i + 1) as f64 / (total + 1) as f64).ln();
        sxx += x * x;
        sxy += x * y;
    }
    sxy / sxx
}

#[test]
fn twonn_unit_square_2000() {
    let cloud = cube(2, 2, 2000, 42);
    let cfg = TwoNnConfig {
        discard_fraction: 0.1,
        window: PlausibilityWindow::unbounded(),
    };
    let est = twonn_estimate(&cloud, &cfg).unwrap();
    assert!(
        est.value > 1.8 && est.value < 2.2,
        "twonn on unit square = {}",
        est.value
    );
    let oracle = twonn_regression_oracle(&cloud, 0.1);
    assert!(
        (est.value - oracle).abs() < 0.25,
        "kl fit {} vs regression oracle {oracle}",
        est.value
    );
    // The regression route is also carried in the diagnostics.
    let diag = est.diagnostics["cdf_slope"];
    assert!((diag - oracle).abs() < 1e-9, "{diag} vs {oracle}");
}

// --- mle ---------------------------------------------------------------------

/// Levina-Bickel from scratch: brute-force exact kNN distances, the local
/// log-ratio formula, inverse-average aggregation.
fn mle_oracle(cloud: &PointCloud, k: usize) -> f64 {
    let n = cloud.n();
    let mut inv_sum = 0.0;
    let mut used = 0usize;
    for i in 0..n {
        let mut dists: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                cloud
                    .row(i)
                    .iter()
                    .zip(cloud.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let t = &dists[..k];
        if t.iter().any(|&d| d <= 0.0) {
            continue;
        }
        let tk = t[k - 1];
        let inv: f64 =
            t[..k - 1].iter().map(|&tj| (tk / tj).ln()).sum::<f64>() / (k - 1) as f64;
        inv_sum += inv;
        used += 1;
    }
    used as f64 / inv_sum
}

#[test]
fn mle_4cube_in_rotated_ambient() {
    let cloud = cube(4, 16, 2000, 43);
    let cfg = MleConfig {
        k: 20,
        window: PlausibilityWindow::unbounded(),
    };
    let est = mle_estimate(&cloud, &cfg).unwrap();
    assert!(
        est.value > 3.4 && est.value < 4.6,
        "mle on 4-cube = {}",
        est.value
    );
    let oracle = mle_oracle(&cloud, 20);
    assert!(
        (est.value - oracle).abs() < 1e-9 * oracle,
        "{} vs oracle {oracle}",
        est.value
    );
}

// --- tle ---------------------------------------------------------------------

#[test]
fn tle_ground_truth_windows() {
    let segment = sample_manifold(&ManifoldSpec {
        kind: ManifoldKind::Segment,
        d: 1,
        ambient: 8,
        n: 2000,
        noise: 0.0,
        rng: RngSpec::new(44),
    })
    .unwrap();
    let cfg = TleConfig {
        k: 20,
        window: PlausibilityWindow::unbounded(),
    };
    let est = tle_estimate(&segment, &cfg).unwrap();
    assert!(
        est.value > 0.8 && est.value < 1.2,
        "tle on segment = {}",
        est.value
    );

    let four_cube = cube(4, 16, 2000, 45);
    let est = tle_estimate(&four_cube, &cfg).unwrap();
    assert!(
        est.value > 3.2 && est.value < 4.8,
        "tle on 4-cube = {}",
        est.value
    );
}

// --- bundle ------------------------------------------------------------------

#[test]
fn bundle_on_square_and_segment() {
    let square = cube(2, 8, 2000, 46);
    let bundle = estimate_all(&square, &wide_cfg(9));
    for m in EstimateBundle::METHODS {
        let v = bundle.get(m).unwrap().value;
        assert!(v > 1.6 && v < 2.4, "{m} on square = {v}");
    }

    let segment = sample_manifold(&ManifoldSpec {
        kind: ManifoldKind::Segment,
        d: 1,
        ambient: 8,
        n: 2000,
        noise: 0.0,
        rng: RngSpec::new(47),
    })
    .unwrap();
    let bundle = estimate_all(&segment, &wide_cfg(9));
    for m in EstimateBundle::METHODS {
        let v = bundle.get(m).unwrap().value;
        assert!(v > 0.8 && v < 1.2, "{m} on segment = {v}");
    }
}

#[test]
fn bundle_survives_degenerate_cloud() {
    let rows: Vec<Vec<f64>> = (0..256).map(|_| vec![1.0, 2.0, 3.0]).collect();
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let bundle = estimate_all(&cloud, &wide_cfg(9));
    for m in EstimateBundle::METHODS {
        let est = bundle.get(m).unwrap();
        assert!(!est.valid, "{m} must be invalid on a duplicated cloud");
        assert!(est.note.is_some(), "{m} should explain itself");
    }
}

#[test]
fn monotone_recovery_in_dimension() {
    let cfg = wide_cfg(7);
    let mut previous: Option<EstimateBundle> = None;
    for d in [1usize, 2, 4, 8] {
        let cloud = cube(d, 32, 2000, 50 + d as u64);
        let bundle = estimate_all(&cloud, &cfg);
        if let Some(prev) = &previous {
            for m in EstimateBundle::METHODS {
                let lo = prev.get(m).unwrap().value;
                let hi = bundle.get(m).unwrap().value;
                assert!(hi > lo, "{m} not increasing: d={d} gave {hi} after {lo}");
            }
        }
        previous = Some(bundle);
    }
}

#[test]
fn synth_cube_example() {
    // Estimates on a planted two-manifold recover its dimension.
    let cloud = cube(2, 16, 2000, 48);
    let twonn = twonn_estimate(
        &cloud,
        &TwoNnConfig {
            discard_fraction: 0.1,
            window: PlausibilityWindow::unbounded(),
        },
    )
    .unwrap();
    assert!(twonn.value > 1.8 && twonn.value < 2.2, "twonn {}", twonn.value);
    let mle = mle_estimate(
        &cloud,
        &MleConfig {
            k: 20,
            window: PlausibilityWindow::unbounded(),
        },
    )
    .unwrap();
    assert!(mle.value > 1.8 && mle.value < 2.2, "mle {}", mle.value);
}

#[test]
fn metric_matrix_on_mixed_dimension_corpus() {
    // Shared ground-truth dimension drives every estimator: the report-level
    // correlation between any two columns is strong.
    use idgeom::analysis::{metric_matrix, CorrMethod, MatrixOptions};
    use idgeom::io::report::{Report, ReportMetadata};
    use std::collections::BTreeMap;

    let meta = ReportMetadata {
        config_hash: "test".into(),
        seed: 9,
        version: "0".into(),
    };
    let columns: Vec<String> = EstimateBundle::METHODS.iter().map(|m| m.to_string()).collect();
    let mut report = Report::new(meta, columns).unwrap();
    let cfg = wide_cfg(9);
    for i in 0..8u64 {
        let d = 1 + (i as usize % 8);
        let cloud = cube(d, 24, 600, 60 + i);
        let bundle = estimate_all(&cloud, &cfg);
        let values: BTreeMap<String, Option<f64>> = EstimateBundle::METHODS
            .iter()
            .map(|m| (m.to_string(), Some(bundle.get(m).unwrap().value)))
            .collect();
        report.push_row(format!("cloud_{i}"), false, values).unwrap();
    }
    let matrix = metric_matrix(&report, CorrMethod::Pearson, MatrixOptions::default()).unwrap();
    let r = matrix.get("phd", "mle").unwrap();
    assert!(r > 0.8, "phd-mle column correlation = {r}");
}

#[test]
fn phd_restart_samples_populate() {
    let cloud = cube(2, 8, 512, 49);
    let mut cfg = PhdConfig::default_for(512, RngSpec::new(3));
    cfg.window = PlausibilityWindow::unbounded();
    let est = phd_estimate(&cloud, &cfg).unwrap();
    assert_eq!(est.samples.len(), cfg.restarts);
    for s in &est.samples {
        assert!(s.is_finite() && *s > 0.0);
    }
}
