//! Representation-space operations on ingested weight matrices: softmax
//! prediction entropy, the entropy-vs-geometry scale sweep, sparse
//! autoencoder encode/decode with feature aggregation, and steering-vector
//! arithmetic. No model inference happens here; every matrix is an input.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::estimators::{estimate_all, EstimateBundle, EstimatorConfig};

/// Vocabulary-by-hidden unembedding matrix with optional per-token bias.
#[derive(Debug, Clone)]
pub struct Unembedding {
    matrix: Array2<f64>,
    bias: Option<Array1<f64>>,
}

impl Unembedding {
    pub fn new(matrix: Array2<f64>, bias: Option<Array1<f64>>) -> Result<Self> {
        let (v, _m) = matrix.dim();
        if v < 2 {
            return Err(Error::InvalidInput(
                "unembedding needs at least 2 vocabulary rows".into(),
            ));
        }
        if !matrix.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(
                "unembedding matrix has non-finite entries".into(),
            ));
        }
        if let Some(b) = &bias {
            if b.len() != v {
                return Err(Error::InvalidArgument(format!(
                    "bias length {} does not match vocabulary size {v}",
                    b.len()
                )));
            }
            if !b.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput("bias has non-finite entries".into()));
            }
        }
        Ok(Self { matrix, bias })
    }

    pub fn vocab(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Shannon entropy (nats) of softmax(U h + b), computed with
/// max-subtraction. Always in [0, ln V].
pub fn prediction_entropy(h: &[f64], un: &Unembedding) -> Result<f64> {
    if h.len() != un.hidden() {
        return Err(Error::InvalidArgument(format!(
            "hidden vector length {} does not match unembedding width {}",
            h.len(),
            un.hidden()
        )));
    }
    if !h.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite hidden vector".into()));
    }
    let hv = ndarray::ArrayView1::from(h);
    let mut logits = un.matrix.dot(&hv);
    if let Some(b) = &un.bias {
        logits += b;
    }
    if !logits.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("logits overflowed f64 range".into()));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut weighted = 0.0;
    for &l in logits.iter() {
        let e = (l - max).exp();
        z += e;
        weighted += (l - max) * e;
    }
    // H = ln Z - E[logit - max]; clamp the tiny negative rounding residue.
    Ok((z.ln() - weighted / z).max(0.0))
}

/// One step of the scale sweep: entropy moves with alpha, geometry does not.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleSweepPoint {
    pub alpha: f64,
    pub mean_entropy: f64,
    pub estimates: EstimateBundle,
}

/// Sweep `x -> alpha * x` over the hidden set: per alpha, the mean prediction
/// entropy and the full estimator bundle on the scaled cloud.
pub fn entropy_scale_sweep(
    h_set: &PointCloud,
    un: &Unembedding,
    alphas: &[f64],
    cfg: &EstimatorConfig,
) -> Result<Vec<ScaleSweepPoint>> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("empty alpha list".into()));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "alphas must be sorted strictly ascending".into(),
        ));
    }
    if alphas.iter().any(|&a| !a.is_finite() || a <= 0.0) {
        return Err(Error::InvalidArgument("alphas must be positive".into()));
    }
    if h_set.dim() != un.hidden() {
        return Err(Error::InvalidArgument(format!(
            "cloud dimension {} does not match unembedding width {}",
            h_set.dim(),
            un.hidden()
        )));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let scaled = h_set.scaled(alpha)?;
            let entropies: Vec<f64> = (0..scaled.n())
                .into_par_iter()
                .map(|i| prediction_entropy(scaled.row(i), un))
                .collect::<Result<_>>()?;
            let mean_entropy = entropies.iter().sum::<f64>() / entropies.len() as f64;
            Ok(ScaleSweepPoint {
                alpha,
                mean_entropy,
                estimates: estimate_all(&scaled, cfg),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaeActivation {
    Relu,
    /// Thresholded activation: pre-activations at or below their feature's
    /// threshold are zeroed, the rest pass through unchanged.
    JumpRelu(Vec<f64>),
}

/// Sparse autoencoder weights: encoder F x m, decoder m x F, biases, and the
/// activation rule.
#[derive(Debug, Clone)]
pub struct SaeWeights {
    pub w_enc: Array2<f64>,
    pub b_enc: Array1<f64>,
    pub w_dec: Array2<f64>,
    pub b_dec: Array1<f64>,
    pub activation: SaeActivation,
}

impl SaeWeights {
    pub fn new(
        w_enc: Array2<f64>,
        b_enc: Array1<f64>,
        w_dec: Array2<f64>,
        b_dec: Array1<f64>,
        activation: SaeActivation,
    ) -> Result<Self> {
        let (f, m) = w_enc.dim();
        let (m2, f2) = w_dec.dim();
        if f == 0 || m == 0 {
            return Err(Error::InvalidInput("empty encoder matrix".into()));
        }
        if m2 != m || f2 != f {
            return Err(Error::InvalidArgument(format!(
                "decoder shape {m2}x{f2} does not match encoder {f}x{m}"
            )));
        }
        if b_enc.len() != f {
            return Err(Error::InvalidArgument(format!(
                "encoder bias length {} != feature count {f}",
                b_enc.len()
            )));
        }
        if b_dec.len() != m {
            return Err(Error::InvalidArgument(format!(
                "decoder bias length {} != hidden width {m}",
                b_dec.len()
            )));
        }
        if let SaeActivation::JumpRelu(th) = &activation {
            if th.len() != f {
                return Err(Error::InvalidArgument(format!(
                    "threshold count {} != feature count {f}",
                    th.len()
                )));
            }
        }
        let finite = w_enc
            .iter()
            .chain(w_dec.iter())
            .chain(b_enc.iter())
            .chain(b_dec.iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite SAE weights".into()));
        }
        for j in 0..f {
            if w_dec.column(j).iter().all(|&x| x == 0.0) {
                return Err(Error::InvalidInput(format!(
                    "decoder column {j} is all-zero"
                )));
            }
        }
        Ok(Self {
            w_enc,
            b_enc,
            w_dec,
            b_dec,
            activation,
        })
    }

    pub fn features(&self) -> usize {
        self.w_enc.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w_enc.ncols()
    }
}

/// Encode and reconstruct one activation vector:
/// `f = act(W_enc x + b_enc)`, `x_hat = W_dec f + b_dec`. The code is
/// elementwise nonnegative by construction.
pub fn sae_forward(x: &[f64], w: &SaeWeights) -> Result<(Array1<f64>, Array1<f64>)> {
    if x.len() != w.hidden() {
        return Err(Error::InvalidArgument(format!(
            "input length {} does not match SAE width {}",
            x.len(),
            w.hidden()
        )));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("non-finite SAE input".into()));
    }
    let xv = ndarray::ArrayView1::from(x);
    let mut code = w.w_enc.dot(&xv) + &w.b_enc;
    match &w.activation {
        SaeActivation::Relu => code.mapv_inplace(|v| v.max(0.0)),
        SaeActivation::JumpRelu(th) => {
            for (c, &t) in code.iter_mut().zip(th) {
                if *c <= t {
                    *c = 0.0;
                }
            }
            code.mapv_inplace(|v| v.max(0.0));
        }
    }
    let recon = w.w_dec.dot(&code) + &w.b_dec;
    Ok((code, recon))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateMode {
    Sum,
    Mean,
    Max,
}

impl AggregateMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Self::Sum),
            "mean" => Ok(Self::Mean),
            "max" => Ok(Self::Max),
            other => Err(Error::InvalidArgument(format!(
                "unknown aggregation mode '{other}'"
            ))),
        }
    }
}

/// Collapse one feature's tokenwise activations to a sequence-level value.
/// `codes` is token-major: one row per token, one column per feature.
pub fn aggregate_feature(codes: &Array2<f64>, feature: usize, mode: AggregateMode) -> Result<f64> {
    if codes.nrows() == 0 {
        return Err(Error::InvalidArgument("empty code sequence".into()));
    }
    if feature >= codes.ncols() {
        return Err(Error::InvalidArgument(format!(
            "feature index {feature} out of range for {} features",
            codes.ncols()
        )));
    }
    let col = codes.column(feature);
    Ok(match mode {
        AggregateMode::Sum => col.sum(),
        AggregateMode::Mean => col.sum() / col.len() as f64,
        AggregateMode::Max => col.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// A steering intervention: add `lambda * reference_scale` of decoder
/// direction `feature` to a hidden state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SteeringSpec {
    pub feature: usize,
    pub lambda: f64,
    /// The feature's reference scale (its maximum activation on a held-out
    /// set, supplied by the caller).
    pub reference_scale: f64,
}

pub fn steer(x: &[f64], w: &SaeWeights, spec: &SteeringSpec) -> Result<Array1<f64>> {
    if spec.feature >= w.features() {
        return Err(Error::InvalidArgument(format!(
            "feature index {} out of range for {} features",
            spec.feature,
            w.features()
        )));
    }
    if !(spec.reference_scale.is_finite() && spec.reference_scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reference scale must be positive, got {}",
            spec.reference_scale
        )));
    }
    if !spec.lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite".into()));
    }
    if x.len() != w.hidden() {
        return Err(Error::InvalidArgument(format!(
            "input length {} does not match SAE width {}",
            x.len(),
            w.hidden()
        )));
    }
    let coef = spec.lambda * spec.reference_scale;
    Ok(Array1::from_iter(
        x.iter()
            .zip(w.w_dec.column(spec.feature))
            .map(|(&xi, &di)| xi + coef * di),
    ))
}
