//! Statistical glue: Pearson/Spearman correlation, length-binned standard
//! deviations, a seeded OLS train/test harness, and the pairwise metric
//! correlation matrix over reports.

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::report::Report;
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrMethod {
    Pearson,
    Spearman,
}

impl CorrMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(Self::Pearson),
            "spearman" => Ok(Self::Spearman),
            other => Err(Error::InvalidArgument(format!(
                "unknown correlation method '{other}'"
            ))),
        }
    }
}

/// Product-moment or rank correlation; ranks average over ties.
pub fn correlate(xs: &[f64], ys: &[f64], method: CorrMethod) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least 3 paired observations".into(),
        ));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite observation".into()));
    }
    match method {
        CorrMethod::Pearson => pearson(xs, ys),
        CorrMethod::Spearman => pearson(&ranks(xs), &ranks(ys)),
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("finite values")
            .then(a.cmp(&b))
    });
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Sample standard deviation; `None` when the bin holds fewer than two
    /// values.
    pub std: Option<f64>,
}

/// Standard deviation of `values` grouped into fixed-width bins of `keys`,
/// anchored at zero. Only populated bins are returned, in key order.
pub fn binned_std(values: &[f64], keys: &[f64], bin_width: f64) -> Result<Vec<Bin>> {
    if values.len() != keys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} values vs {} keys",
            values.len(),
            keys.len()
        )));
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if values.iter().chain(keys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite observation".into()));
    }
    let mut bins: std::collections::BTreeMap<i64, Vec<f64>> = std::collections::BTreeMap::new();
    for (&v, &k) in values.iter().zip(keys) {
        bins.entry((k / bin_width).floor() as i64).or_default().push(v);
    }
    Ok(bins
        .into_iter()
        .map(|(idx, vs)| Bin {
            lo: idx as f64 * bin_width,
            hi: (idx + 1) as f64 * bin_width,
            count: vs.len(),
            std: sample_std(&vs),
        })
        .collect())
}

fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some((ss / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone)]
pub struct OlsConfig {
    /// Fraction of rows assigned to the training split.
    pub train_fraction: f64,
    /// Standardize features to train-split mean 0, variance 1 before
    /// fitting.
    pub standardize: bool,
    pub rng: RngSpec,
}

impl Default for OlsConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            standardize: true,
            rng: RngSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OlsFit {
    /// Per-feature weights on the (possibly standardized) design.
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Set when the training design is rank-deficient or underdetermined;
    /// the minimum-norm solution is used in that case.
    pub condition_flag: bool,
    pub train_pearson: Option<f64>,
    pub train_spearman: Option<f64>,
    pub test_pearson: Option<f64>,
    pub test_spearman: Option<f64>,
}

/// Least-squares fit of `y ~ X` with intercept on a seeded train/test split,
/// evaluated by correlating predictions with targets on both splits.
pub fn ols_fit(x: &Array2<f64>, y: &[f64], cfg: &OlsConfig) -> Result<OlsFit> {
    let (n, p) = x.dim();
    if n != y.len() {
        return Err(Error::InvalidArgument(format!(
            "design has {n} rows but target has {}",
            y.len()
        )));
    }
    if n < 4 {
        return Err(Error::InvalidArgument(
            "need at least 4 rows to split and fit".into(),
        ));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {}",
            cfg.train_fraction
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite design or target".into()));
    }

    // Seeded shuffle, then split.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = cfg.rng.rng();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let n_train = ((cfg.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let (train_idx, test_idx) = order.split_at(n_train);

    // Standardization uses train-split statistics only.
    let mut means = vec![0.0; p];
    let mut stds = vec![1.0; p];
    if cfg.standardize {
        for c in 0..p {
            let col: Vec<f64> = train_idx.iter().map(|&i| x[(i, c)]).collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / col.len() as f64;
            means[c] = m;
            stds[c] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
    }
    let feature = |i: usize, c: usize| (x[(i, c)] - means[c]) / stds[c];

    let mut condition_flag = n_train <= p;
    let design = DMatrix::from_fn(train_idx.len(), p + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            feature(train_idx[r], c - 1)
        }
    });
    let target = nalgebra::DVector::from_fn(train_idx.len(), |r, _| y[train_idx[r]]);

    let svd = design.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = max_sv * 1e-12;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    if rank < p + 1 {
        condition_flag = true;
    }
    let solution = svd
        .solve(&target, eps)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let intercept = solution[0];
    let weights: Vec<f64> = (0..p).map(|c| solution[c + 1]).collect();

    let predict = |idx: &[usize]| -> Vec<f64> {
        idx.iter()
            .map(|&i| {
                intercept
                    + (0..p)
                        .map(|c| weights[c] * feature(i, c))
                        .sum::<f64>()
            })
            .collect()
    };
    let eval = |idx: &[usize], method: CorrMethod| -> Option<f64> {
        if idx.len() < 3 {
            return None;
        }
        let preds = predict(idx);
        let targets: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        correlate(&preds, &targets, method).ok()
    };

    let train_pearson = eval(train_idx, CorrMethod::Pearson);
    let train_spearman = eval(train_idx, CorrMethod::Spearman);
    let test_pearson = eval(test_idx, CorrMethod::Pearson);
    let test_spearman = eval(test_idx, CorrMethod::Spearman);
    Ok(OlsFit {
        weights,
        intercept,
        condition_flag,
        train_pearson,
        train_spearman,
        test_pearson,
        test_spearman,
    })
}

/// Pairwise correlation matrix over a report's metric columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub labels: Vec<String>,
    /// values[i][j]: correlation between columns i and j over rows complete
    /// in both; `None` when fewer than 3 such rows exist or variance is zero.
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        self.values[i][j]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.labels.len() {
                out.push(',');
                if let Some(v) = self.values[i][j] {
                    out.push_str(&format!("{v}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MatrixOptions {
    /// Include rows flagged short.
    pub include_short: bool,
    /// Treat a companion `<column>_valid` column of 0/1 flags as a mask.
    pub respect_validity: bool,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        Self {
            include_short: false,
            respect_validity: true,
        }
    }
}

/// Full symmetric correlation matrix with unit diagonal over the report's
/// metric columns. Rows with missing or invalid entries are dropped pairwise.
/// Columns named `*_valid` act as masks, not metrics.
pub fn metric_matrix(
    report: &Report,
    method: CorrMethod,
    opts: MatrixOptions,
) -> Result<CorrMatrix> {
    let labels: Vec<String> = report
        .columns
        .iter()
        .filter(|c| !c.ends_with("_valid"))
        .cloned()
        .collect();
    if labels.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 metric columns".into(),
        ));
    }

    // Per-column values masked by row gating and validity companions.
    let mut columns: Vec<Vec<Option<f64>>> = Vec::with_capacity(labels.len());
    for label in &labels {
        let raw = report.column(label).expect("label from report");
        let mask = if opts.respect_validity {
            report.column(&format!("{label}_valid"))
        } else {
            None
        };
        let masked: Vec<Option<f64>> = report
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                if row.short && !opts.include_short {
                    return None;
                }
                if let Some(mask) = &mask {
                    if mask[i] != Some(1.0) {
                        return None;
                    }
                }
                raw[i]
            })
            .collect();
        columns.push(masked);
    }

    let k = labels.len();
    let mut values = vec![vec![None; k]; k];
    let mut any_pair = false;
    for i in 0..k {
        values[i][i] = Some(1.0);
        for j in (i + 1)..k {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (a, b) in columns[i].iter().zip(&columns[j]) {
                if let (Some(a), Some(b)) = (a, b) {
                    xs.push(*a);
                    ys.push(*b);
                }
            }
            let entry = if xs.len() >= 3 {
                any_pair = true;
                correlate(&xs, &ys, method).ok()
            } else {
                None
            };
            values[i][j] = entry;
            values[j][i] = entry;
        }
    }
    if !any_pair {
        return Err(Error::DegenerateInput(
            "no metric pair has 3 complete rows".into(),
        ));
    }
    Ok(CorrMatrix { labels, values })
}
