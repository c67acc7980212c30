//! The four intrinsic-dimension estimators: persistent-homology (MST
//! scaling), two-nearest-neighbor ratios, local maximum likelihood, and the
//! tight-locality estimator. Each maps a [`PointCloud`] to an [`IdEstimate`].

mod mle;
mod phd;
mod tle;
mod twonn;

use std::collections::BTreeMap;

pub use mle::{mle_estimate, mle_local, MleConfig};
pub use phd::{geometric_sizes, phd_estimate, Aggregator, PhdConfig};
pub use tle::{tle_estimate, TleConfig};
pub use twonn::{twonn_estimate, twonn_from_ratios, TwoNnConfig};

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::geom::{knn_from_matrix, pairwise_distances};
use crate::rng::RngSpec;

/// Range of dimension values considered plausible for the data at hand.
/// Estimates outside it keep their numeric value but are flagged invalid.
/// The default window suits token-embedding clouds; synthetic benchmarks
/// should widen it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityWindow {
    pub lo: f64,
    pub hi: f64,
}

impl PlausibilityWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Accept any positive finite value.
    pub fn unbounded() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v.is_finite() && v > 0.0 && v >= self.lo && v <= self.hi
    }
}

impl Default for PlausibilityWindow {
    fn default() -> Self {
        Self { lo: 2.0, hi: 18.0 }
    }
}

/// An estimator's output: the dimension value, per-restart samples for
/// stochastic methods, method-specific diagnostics, and a validity flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdEstimate {
    pub value: f64,
    /// Per-restart values for stochastic estimators; empty for deterministic ones.
    pub samples: Vec<f64>,
    pub diagnostics: BTreeMap<String, f64>,
    pub valid: bool,
    /// Human-readable reason when the estimate failed or was flagged.
    pub note: Option<String>,
}

impl IdEstimate {
    pub(crate) fn invalid(note: impl Into<String>) -> Self {
        Self {
            value: f64::NAN,
            samples: Vec::new(),
            diagnostics: BTreeMap::new(),
            valid: false,
            note: Some(note.into()),
        }
    }
}

/// Shared configuration for running all four estimators on one cloud.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub rng: RngSpec,
    /// Subsample schedule for the MST estimator; `None` derives the default
    /// schedule from the cloud size.
    pub phd_sizes: Option<Vec<usize>>,
    pub phd_restarts: usize,
    pub phd_aggregator: Aggregator,
    pub twonn_discard: f64,
    pub mle_k: usize,
    pub tle_k: usize,
    pub window: PlausibilityWindow,
}

impl EstimatorConfig {
    pub fn new(rng: RngSpec) -> Self {
        Self {
            rng,
            phd_sizes: None,
            phd_restarts: 15,
            phd_aggregator: Aggregator::Median,
            twonn_discard: 0.1,
            mle_k: 20,
            tle_k: 20,
            window: PlausibilityWindow::default(),
        }
    }

    pub fn with_window(mut self, window: PlausibilityWindow) -> Self {
        self.window = window;
        self
    }

    pub fn phd_config(&self, n: usize) -> PhdConfig {
        let mut cfg = match &self.phd_sizes {
            Some(sizes) => PhdConfig::with_sizes(sizes.clone(), self.rng),
            None => PhdConfig::default_for(n, self.rng),
        };
        cfg.restarts = self.phd_restarts;
        cfg.aggregator = self.phd_aggregator;
        cfg.window = self.window;
        cfg
    }

    pub fn twonn_config(&self) -> TwoNnConfig {
        TwoNnConfig {
            discard_fraction: self.twonn_discard,
            window: self.window,
        }
    }

    pub fn mle_config(&self) -> MleConfig {
        MleConfig {
            k: self.mle_k,
            window: self.window,
        }
    }

    pub fn tle_config(&self) -> TleConfig {
        TleConfig {
            k: self.tle_k,
            window: self.window,
        }
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::new(RngSpec::default())
    }
}

/// One estimate per method. Per-method failures become invalid entries;
/// the bundle itself never fails.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateBundle {
    pub phd: IdEstimate,
    pub twonn: IdEstimate,
    pub mle: IdEstimate,
    pub tle: IdEstimate,
}

impl EstimateBundle {
    pub fn get(&self, method: &str) -> Option<&IdEstimate> {
        match method {
            "phd" => Some(&self.phd),
            "twonn" => Some(&self.twonn),
            "mle" => Some(&self.mle),
            "tle" => Some(&self.tle),
            _ => None,
        }
    }

    pub const METHODS: [&'static str; 4] = ["phd", "twonn", "mle", "tle"];
}

/// Run all four estimators over one cloud with a shared distance matrix and
/// a shared seed. Errors from individual estimators are captured as invalid
/// entries rather than aborting the bundle.
pub fn estimate_all(cloud: &PointCloud, cfg: &EstimatorConfig) -> EstimateBundle {
    let n = cloud.n();
    let dm = match pairwise_distances(cloud) {
        Ok(dm) => dm,
        Err(e) => {
            let entry = IdEstimate::invalid(e.to_string());
            return EstimateBundle {
                phd: entry.clone(),
                twonn: entry.clone(),
                mle: entry.clone(),
                tle: entry,
            };
        }
    };

    let phd = phd::phd_from_matrix(&dm, &cfg.phd_config(n))
        .unwrap_or_else(|e| IdEstimate::invalid(e.to_string()));

    // One neighbor query covers all distance-ratio estimators; each consumes
    // the prefix it needs.
    let kmax = cfg.mle_k.max(cfg.tle_k).max(2);
    let (twonn, mle, tle) = if kmax < n {
        match knn_from_matrix(&dm, kmax) {
            Ok(kr) => (
                twonn::twonn_from_knn(&kr, &cfg.twonn_config())
                    .unwrap_or_else(|e| IdEstimate::invalid(e.to_string())),
                mle::mle_from_knn(&kr, &cfg.mle_config())
                    .unwrap_or_else(|e| IdEstimate::invalid(e.to_string())),
                tle::tle_from_knn(cloud, &kr, &cfg.tle_config())
                    .unwrap_or_else(|e| IdEstimate::invalid(e.to_string())),
            ),
            Err(e) => {
                let entry = IdEstimate::invalid(e.to_string());
                (entry.clone(), entry.clone(), entry)
            }
        }
    } else {
        // Largest k is infeasible; run per method so the small-k estimators
        // still succeed.
        let twonn = match knn_from_matrix(&dm, 2) {
            Ok(kr) => twonn::twonn_from_knn(&kr, &cfg.twonn_config())
                .unwrap_or_else(|e| IdEstimate::invalid(e.to_string())),
            Err(e) => IdEstimate::invalid(e.to_string()),
        };
        let mle = match knn_from_matrix(&dm, cfg.mle_k) {
            Ok(kr) => mle::mle_from_knn(&kr, &cfg.mle_config())
                .unwrap_or_else(|e| IdEstimate::invalid(e.to_string())),
            Err(e) => IdEstimate::invalid(e.to_string()),
        };
        let tle = match knn_from_matrix(&dm, cfg.tle_k) {
            Ok(kr) => tle::tle_from_knn(cloud, &kr, &cfg.tle_config())
                .unwrap_or_else(|e| IdEstimate::invalid(e.to_string())),
            Err(e) => IdEstimate::invalid(e.to_string()),
        };
        (twonn, mle, tle)
    };

    EstimateBundle {
        phd,
        twonn,
        mle,
        tle,
    }
}
