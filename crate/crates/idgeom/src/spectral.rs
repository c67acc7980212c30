//! Linear-dimensionality and anisotropy diagnostics from the singular
//! spectrum of the stacked point matrix: maximal/cumulative explained
//! variance, Schatten-2 norm, effective rank, and resultant length.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Nonincreasing singular values of the (optionally centered) data matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularSpectrum {
    pub sigma: Vec<f64>,
    pub centered: bool,
}

impl SingularSpectrum {
    fn sum_sq(&self) -> f64 {
        self.sigma.iter().map(|s| s * s).sum()
    }
}

/// Singular values of the data matrix, descending. With `centered` the
/// column means are removed first, which is the principal-component view.
pub fn singular_spectrum(cloud: &PointCloud, centered: bool) -> SingularSpectrum {
    let n = cloud.n();
    let d = cloud.dim();
    let mut m = DMatrix::from_row_slice(n, d, cloud.flat());
    if centered {
        for c in 0..d {
            let mean = m.column(c).sum() / n as f64;
            for r in 0..n {
                m[(r, c)] -= mean;
            }
        }
    }
    let mut sigma: Vec<f64> = m.singular_values().iter().copied().collect();
    sigma.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    SingularSpectrum { sigma, centered }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralMetrics {
    /// Fraction of variance on the first component: sigma_1^2 / sum sigma_i^2.
    pub mev: f64,
    /// Cumulative explained variance at each requested k.
    pub ev: Vec<(usize, f64)>,
    /// Global spectral energy: (sum sigma_i^2)^(1/2).
    pub schatten2: f64,
    /// exp of the entropy of the normalized singular values.
    pub effective_rank: f64,
}

pub fn spectral_metrics(spectrum: &SingularSpectrum, ks: &[usize]) -> Result<SpectralMetrics> {
    let total_sq = spectrum.sum_sq();
    if total_sq == 0.0 {
        return Err(Error::DegenerateInput("all-zero singular spectrum".into()));
    }
    let r = spectrum.sigma.len();
    let mut ev = Vec::with_capacity(ks.len());
    for &k in ks {
        if k == 0 || k > r {
            return Err(Error::InvalidArgument(format!(
                "ev component count {k} out of range 1..={r}"
            )));
        }
        let head: f64 = spectrum.sigma[..k].iter().map(|s| s * s).sum();
        ev.push((k, head / total_sq));
    }
    let total: f64 = spectrum.sigma.iter().sum();
    let entropy: f64 = spectrum
        .sigma
        .iter()
        .map(|&s| {
            let p = s / total;
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .sum();
    Ok(SpectralMetrics {
        mev: spectrum.sigma[0] * spectrum.sigma[0] / total_sq,
        ev,
        schatten2: total_sq.sqrt(),
        effective_rank: entropy.exp(),
    })
}

/// Cumulative explained-variance curve for k = 1..k_max. Nondecreasing and
/// equal to 1 at k = r.
pub fn ev_k_sweep(spectrum: &SingularSpectrum, k_max: usize) -> Result<Vec<f64>> {
    let r = spectrum.sigma.len();
    if k_max == 0 || k_max > r {
        return Err(Error::InvalidArgument(format!(
            "k_max {k_max} out of range 1..={r}"
        )));
    }
    let total_sq = spectrum.sum_sq();
    if total_sq == 0.0 {
        return Err(Error::DegenerateInput("all-zero singular spectrum".into()));
    }
    let mut acc = 0.0;
    Ok(spectrum.sigma[..k_max]
        .iter()
        .map(|s| {
            acc += s * s;
            acc / total_sq
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResultantLength {
    /// Norm of the mean unit-normalized row; 0 is isotropic, 1 perfectly aligned.
    pub value: f64,
    /// Zero-norm rows skipped during normalization.
    pub zero_rows: usize,
}

pub fn resultant_length(cloud: &PointCloud) -> Result<ResultantLength> {
    let d = cloud.dim();
    let mut mean = vec![0.0_f64; d];
    let mut used = 0usize;
    let mut zero_rows = 0usize;
    for i in 0..cloud.n() {
        let row = cloud.row(i);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            zero_rows += 1;
            continue;
        }
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x / norm;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateInput("all rows have zero norm".into()));
    }
    let value = mean
        .iter()
        .map(|m| {
            let v = m / used as f64;
            v * v
        })
        .sum::<f64>()
        .sqrt();
    Ok(ResultantLength { value, zero_rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(rows: &[Vec<f64>]) -> PointCloud {
        PointCloud::from_rows(rows).unwrap()
    }

    #[test]
    fn centered_rank_one() {
        let s = singular_spectrum(&cloud(&[vec![1.0, 0.0], vec![-1.0, 0.0]]), true);
        assert!((s.sigma[0] - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(s.sigma[1].abs() < 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let s = singular_spectrum(&cloud(&[vec![1.0, 0.0], vec![0.0, 1.0]]), false);
        assert!((s.sigma[0] - 1.0).abs() < 1e-12);
        assert!((s.sigma[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_norm() {
        let s = singular_spectrum(&cloud(&[vec![3.0, 4.0]]), false);
        assert_eq!(s.sigma.len(), 1);
        assert!((s.sigma[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_rank_one() {
        let s = SingularSpectrum {
            sigma: vec![5.0, 0.0, 0.0],
            centered: false,
        };
        let m = spectral_metrics(&s, &[2]).unwrap();
        assert_eq!(m.mev, 1.0);
        assert_eq!(m.ev[0], (2, 1.0));
        assert_eq!(m.schatten2, 5.0);
        assert!((m.effective_rank - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_uniform_spectrum() {
        let s = SingularSpectrum {
            sigma: vec![1.0; 4],
            centered: false,
        };
        let m = spectral_metrics(&s, &[1]).unwrap();
        assert!((m.mev - 0.25).abs() < 1e-12);
        assert!((m.effective_rank - 4.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_three_four() {
        let s = SingularSpectrum {
            sigma: vec![4.0, 3.0],
            centered: false,
        };
        let m = spectral_metrics(&s, &[1]).unwrap();
        assert!((m.schatten2 - 5.0).abs() < 1e-12);
        assert!((m.mev - 16.0 / 25.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_spectrum_degenerate() {
        let s = SingularSpectrum {
            sigma: vec![0.0, 0.0],
            centered: false,
        };
        assert!(matches!(
            spectral_metrics(&s, &[1]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn sweep_examples() {
        let even = SingularSpectrum {
            sigma: vec![1.0, 1.0],
            centered: false,
        };
        assert_eq!(ev_k_sweep(&even, 2).unwrap(), vec![0.5, 1.0]);

        let rank1 = SingularSpectrum {
            sigma: vec![2.0, 0.0],
            centered: false,
        };
        assert_eq!(ev_k_sweep(&rank1, 2).unwrap(), vec![1.0, 1.0]);

        let s = SingularSpectrum {
            sigma: vec![3.0, 2.0, 1.0],
            centered: false,
        };
        let sweep = ev_k_sweep(&s, 3).unwrap();
        assert!((sweep[0] - 9.0 / 14.0).abs() < 1e-12);
        assert!((sweep[1] - 13.0 / 14.0).abs() < 1e-12);
        assert!((sweep[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_bounds() {
        let s = SingularSpectrum {
            sigma: vec![1.0],
            centered: false,
        };
        assert!(ev_k_sweep(&s, 2).is_err());
        assert!(ev_k_sweep(&s, 0).is_err());
    }

    #[test]
    fn resultant_aligned() {
        let r = resultant_length(&cloud(&[vec![2.0, 0.0], vec![2.0, 0.0]])).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resultant_antipodal() {
        let r = resultant_length(&cloud(&[vec![1.0, 0.0], vec![-1.0, 0.0]])).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn resultant_orthonormal_pair() {
        let r = resultant_length(&cloud(&[vec![1.0, 0.0], vec![0.0, 1.0]])).unwrap();
        assert!((r.value - std::f64::consts::SQRT_2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn resultant_skips_zero_rows() {
        let r = resultant_length(&cloud(&[vec![0.0, 0.0], vec![3.0, 0.0]])).unwrap();
        assert_eq!(r.zero_rows, 1);
        assert!((r.value - 1.0).abs() < 1e-12);

        let err = resultant_length(&cloud(&[vec![0.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)));
    }
}
