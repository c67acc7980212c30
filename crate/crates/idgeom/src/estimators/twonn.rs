//! Dimension from the ratio of second- to first-nearest-neighbor distances.
//!
//! For a locally uniform d-dimensional set the ratio mu = r2/r1 follows the
//! Pareto law `P(mu <= t) = 1 - t^(-d)`. The estimate minimizes the
//! divergence between the empirical ratio distribution and that model; the
//! closed-form Pareto maximum-likelihood value and a CDF regression fit are
//! carried as diagnostics so the three routes cross-check each other.

use std::collections::BTreeMap;

use super::{IdEstimate, PlausibilityWindow};
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geom::{knn, KnnResult};

const D_LO: f64 = 0.01;
const D_HI: f64 = 64.0;

#[derive(Debug, Clone, Copy)]
pub struct TwoNnConfig {
    /// Fraction of the largest ratios to discard before fitting.
    pub discard_fraction: f64,
    pub window: PlausibilityWindow,
}

impl Default for TwoNnConfig {
    fn default() -> Self {
        Self {
            discard_fraction: 0.1,
            window: PlausibilityWindow::default(),
        }
    }
}

pub fn twonn_estimate(cloud: &PointCloud, cfg: &TwoNnConfig) -> Result<IdEstimate> {
    if cloud.n() < 3 {
        return Err(Error::InvalidArgument(
            "twonn needs at least 3 points".into(),
        ));
    }
    let kr = knn(cloud, 2)?;
    twonn_from_knn(&kr, cfg)
}

pub(crate) fn twonn_from_knn(kr: &KnnResult, cfg: &TwoNnConfig) -> Result<IdEstimate> {
    let mut dropped_zero = 0usize;
    let mu: Vec<f64> = kr
        .neighbors
        .iter()
        .filter_map(|ns| {
            let r1 = ns[0].dist;
            let r2 = ns[1].dist;
            if r1 == 0.0 {
                dropped_zero += 1;
                None
            } else {
                Some(r2 / r1)
            }
        })
        .collect();
    let mut est = twonn_from_ratios(&mu, cfg)?;
    est.diagnostics
        .insert("dropped_zero_r1".into(), dropped_zero as f64);
    Ok(est)
}

/// Fit the Pareto ratio model to a pre-computed list of mu = r2/r1 values.
/// This is the injection seam for validating the optimizer against the
/// closed-form estimate on synthetic ratio lists.
pub fn twonn_from_ratios(mu: &[f64], cfg: &TwoNnConfig) -> Result<IdEstimate> {
    if !(0.0..1.0).contains(&cfg.discard_fraction) {
        return Err(Error::InvalidArgument(format!(
            "discard fraction must lie in [0, 1), got {}",
            cfg.discard_fraction
        )));
    }
    if mu.iter().any(|&m| !m.is_finite() || m < 1.0) {
        return Err(Error::InvalidInput(
            "ratios must be finite and at least 1".into(),
        ));
    }
    let total = mu.len();
    let mut sorted = mu.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let keep = ((1.0 - cfg.discard_fraction) * total as f64).floor() as usize;
    if keep < 3 {
        return Err(Error::DegenerateInput(format!(
            "fewer than 3 usable ratios ({keep} after discarding)"
        )));
    }
    let kept = &sorted[..keep];

    // Divergence between the empirical distribution of the kept ratios and
    // the Pareto(d) model restricted to its own kept-quantile region. The
    // d-dependent part is the negative mean log-likelihood
    // -ln d + (d + 1) * mean(ln mu), infinite whenever the largest kept
    // ratio falls outside the model's (1 - discard) quantile. Without a
    // discard the constraint vanishes and this is the plain Pareto fit; with
    // one it corrects the truncation bias the discard would otherwise cause.
    let mean_log: f64 = kept.iter().map(|m| m.ln()).sum::<f64>() / keep as f64;
    let max_kept = *kept.last().unwrap();
    let tail_frac = cfg.discard_fraction;
    let objective = |d: f64| {
        if tail_frac > 0.0 && max_kept.powf(-d) < tail_frac {
            f64::INFINITY
        } else {
            -d.ln() + (d + 1.0) * mean_log
        }
    };
    let value = golden_min(objective, D_LO, D_HI);

    let pareto = if mean_log > 0.0 {
        1.0 / mean_log
    } else {
        f64::INFINITY
    };

    // Regression variant: the model CDF linearizes as
    // -ln(1 - F(mu)) = d * ln(mu); fit the slope through the origin using
    // plotting positions i/total over the kept prefix.
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, m) in kept.iter().enumerate() {
        let x = m.ln();
        let f = (i + 1) as f64 / (total + 1) as f64;
        let y = -(1.0 - f).ln();
        sxx += x * x;
        sxy += x * y;
    }
    let cdf_slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("pareto_mle".into(), pareto);
    diagnostics.insert("cdf_slope".into(), cdf_slope);
    diagnostics.insert("used".into(), keep as f64);
    diagnostics.insert("discarded".into(), (total - keep) as f64);

    let at_boundary = value <= D_LO * 1.0001 || value >= D_HI * 0.9999;
    let valid = cfg.window.contains(value) && !at_boundary;
    Ok(IdEstimate {
        value,
        samples: Vec::new(),
        diagnostics,
        valid,
        note: at_boundary.then(|| "argmin at search boundary".to_string()),
    })
}

/// Golden-section minimizer for a unimodal function on [lo, hi]. Ties (and
/// the infinite plateau of the support-constrained objective) collapse the
/// bracket leftward, which is where the finite branch lives.
fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide() -> TwoNnConfig {
        TwoNnConfig {
            discard_fraction: 0.0,
            window: PlausibilityWindow::unbounded(),
        }
    }

    #[test]
    fn constant_ratio_e_gives_dimension_one() {
        // Pareto closed form: d = n / sum(ln mu) = 1 exactly when all mu = e.
        let mu = vec![std::f64::consts::E; 200];
        let est = twonn_from_ratios(&mu, &wide()).unwrap();
        let pareto = est.diagnostics["pareto_mle"];
        assert!((pareto - 1.0).abs() < 1e-12, "pareto = {pareto}");
        assert!((est.value - 1.0).abs() < 0.05, "kl argmin = {}", est.value);
    }

    #[test]
    fn optimizer_matches_closed_form() {
        // Ratios drawn exactly from Pareto(d = 3): mu = u^(-1/3).
        let mut rng = crate::rng::RngSpec::new(11).rng();
        use rand::Rng;
        let mu: Vec<f64> = (0..5000)
            .map(|_| {
                let u: f64 = rng.random::<f64>().max(1e-12);
                u.powf(-1.0 / 3.0)
            })
            .collect();
        let est = twonn_from_ratios(&mu, &wide()).unwrap();
        let pareto = est.diagnostics["pareto_mle"];
        assert!(
            (est.value - pareto).abs() < 1e-6,
            "kl {} vs pareto {pareto}",
            est.value
        );
        assert!((est.value - 3.0).abs() < 0.2, "value = {}", est.value);
    }

    #[test]
    fn all_duplicates_degenerate() {
        let rows: Vec<Vec<f64>> = (0..32).map(|_| vec![1.0, 2.0]).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let err = twonn_estimate(&cloud, &TwoNnConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)));
    }

    #[test]
    fn rejects_bad_ratios() {
        assert!(twonn_from_ratios(&[0.5, 2.0, 3.0], &wide()).is_err());
        assert!(twonn_from_ratios(&[f64::NAN], &wide()).is_err());
    }

    #[test]
    fn rejects_bad_discard() {
        let cfg = TwoNnConfig {
            discard_fraction: 1.0,
            window: PlausibilityWindow::unbounded(),
        };
        assert!(matches!(
            twonn_from_ratios(&[1.5; 10], &cfg),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn too_few_points() {
        let cloud = PointCloud::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(
            twonn_estimate(&cloud, &TwoNnConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
