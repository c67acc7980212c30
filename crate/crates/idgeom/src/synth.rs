//! Ground-truth synthetic manifolds for estimator validation: segments,
//! hypercubes, hyperspheres, Gaussian blobs, and the swiss roll, embedded
//! into the ambient space by a seeded random orthogonal map with optional
//! isotropic noise.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Segment,
    Cube,
    Sphere,
    Gaussian,
    SwissRoll,
}

impl ManifoldKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "segment" => Ok(Self::Segment),
            "cube" => Ok(Self::Cube),
            "sphere" => Ok(Self::Sphere),
            "gaussian" => Ok(Self::Gaussian),
            "swiss_roll" | "swiss-roll" => Ok(Self::SwissRoll),
            other => Err(Error::InvalidArgument(format!(
                "unknown manifold kind '{other}'"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Segment => "segment",
            Self::Cube => "cube",
            Self::Sphere => "sphere",
            Self::Gaussian => "gaussian",
            Self::SwissRoll => "swiss_roll",
        }
    }

    /// Coordinates a sample occupies before the orthogonal embedding.
    fn chart_dims(&self, d: usize) -> usize {
        match self {
            Self::Sphere => d + 1,
            Self::SwissRoll => 3,
            _ => d,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    /// Intrinsic dimension of the sampled set.
    pub d: usize,
    /// Ambient dimension after embedding.
    pub ambient: usize,
    pub n: usize,
    /// Isotropic Gaussian noise scale added after embedding.
    pub noise: f64,
    pub rng: RngSpec,
}

impl ManifoldSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("need at least one point".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidArgument(
                "intrinsic dimension must be positive".into(),
            ));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise must be a nonnegative finite scale, got {}",
                self.noise
            )));
        }
        match self.kind {
            ManifoldKind::Segment if self.d != 1 => Err(Error::InvalidArgument(
                "segment has intrinsic dimension 1".into(),
            )),
            ManifoldKind::SwissRoll if self.d != 2 => Err(Error::InvalidArgument(
                "swiss roll has intrinsic dimension 2".into(),
            )),
            _ => {
                let need = self.kind.chart_dims(self.d);
                if self.ambient < need {
                    Err(Error::InvalidArgument(format!(
                        "ambient dimension {} too small; {} with d = {} needs at least {need}",
                        self.ambient,
                        self.kind.name(),
                        self.d
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Sample `n` points from the manifold, embed them into the ambient space
/// through a seeded random orthogonal map, and add isotropic noise.
/// Identical specs produce bit-identical clouds.
pub fn sample_manifold(spec: &ManifoldSpec) -> Result<PointCloud> {
    spec.validate()?;
    let chart = spec.kind.chart_dims(spec.d);
    let points = sample_chart(spec, chart);
    let basis = orthonormal_columns(spec.ambient, chart, spec.rng.substream(1));

    let mut noise_rng = spec.rng.substream(2).rng();
    let mut rows = vec![0.0_f64; spec.n * spec.ambient];
    for (p, row) in points.chunks(chart).zip(rows.chunks_mut(spec.ambient)) {
        for (r, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, x) in p.iter().enumerate() {
                acc += basis[(r, c)] * x;
            }
            *slot = acc;
        }
        if spec.noise > 0.0 {
            for slot in row.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut noise_rng);
                *slot += spec.noise * g;
            }
        }
    }

    let data = ndarray::Array2::from_shape_vec((spec.n, spec.ambient), rows)
        .expect("shape matches construction");
    let label = format!(
        "{}-d{}-D{}-n{}-noise{}-seed{}.{}",
        spec.kind.name(),
        spec.d,
        spec.ambient,
        spec.n,
        spec.noise,
        spec.rng.seed,
        spec.rng.stream,
    );
    PointCloud::with_label(data, Some(label))
}

/// Pre-embedding coordinates, flattened n x chart.
fn sample_chart(spec: &ManifoldSpec, chart: usize) -> Vec<f64> {
    let mut rng = spec.rng.substream(0).rng();
    let mut out = Vec::with_capacity(spec.n * chart);
    for _ in 0..spec.n {
        match spec.kind {
            ManifoldKind::Segment | ManifoldKind::Cube => {
                for _ in 0..chart {
                    out.push(rng.random::<f64>());
                }
            }
            ManifoldKind::Gaussian => {
                for _ in 0..chart {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    out.push(g);
                }
            }
            ManifoldKind::Sphere => {
                // Normalized Gaussian direction; redraw the (measure-zero)
                // near-zero vectors.
                loop {
                    let v: Vec<f64> = (0..chart)
                        .map(|_| StandardNormal.sample(&mut rng))
                        .collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        out.extend(v.iter().map(|x| x / norm));
                        break;
                    }
                }
            }
            ManifoldKind::SwissRoll => {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                let t = 1.5 * std::f64::consts::PI * (1.0 + 2.0 * u);
                out.push(t * t.cos());
                out.push(21.0 * v);
                out.push(t * t.sin());
            }
        }
    }
    out
}

/// First `cols` columns of a Haar-ish random orthogonal matrix: QR of a
/// seeded Gaussian block with the sign convention diag(R) > 0.
fn orthonormal_columns(rows: usize, cols: usize, spec: RngSpec) -> DMatrix<f64> {
    let mut rng = spec.rng();
    let g: DMatrix<f64> = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..cols {
        if r[(c, c)] < 0.0 {
            for row in 0..rows {
                q[(row, c)] = -q[(row, c)];
            }
        }
    }
    q
}
