//! Subcommand implementations.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use idgeom::analysis::{self, CorrMethod, MatrixOptions};
use idgeom::estimators::{
    estimate_all, mle_estimate, phd_estimate, tle_estimate, twonn_estimate, Aggregator,
    EstimateBundle, EstimatorConfig, IdEstimate, MleConfig, PlausibilityWindow, TleConfig,
    TwoNnConfig,
};
use idgeom::io::report::{config_hash, Report, ReportMetadata};
use idgeom::io::{corpus, emb};
use idgeom::perturb::{transform, HomoglyphMap, PerturbKind};
use idgeom::reprops::{
    aggregate_feature, entropy_scale_sweep, sae_forward, steer, AggregateMode, SaeActivation,
    SaeWeights, SteeringSpec, Unembedding,
};
use idgeom::spectral::{ev_k_sweep, resultant_length, singular_spectrum, spectral_metrics};
use idgeom::synth::{sample_manifold, ManifoldKind, ManifoldSpec};
use idgeom::textstats::{
    adjacent_overlap, compression_ratio, pos_compression_ratio, repeated_content_lemmas,
    ttr_family, FunctionWords, OverlapCounting, OverlapScope,
};
use idgeom::{Error, PointCloud, Result, RngSpec};

use crate::inputs::{
    load_clouds, load_matrix, load_vector, parse_comma_list, read_bytes, warn_row,
};

/// Documents and clouds below this point count are flagged short and
/// excluded from correlation defaults.
const SHORT_GATE: usize = 150;

fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Canonical JSON to `--out` with a flat CSV sibling, or JSON to stdout.
fn write_report(report: &Report, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, report.to_json())?;
            std::fs::write(path.with_extension("csv"), report.to_csv())?;
            Ok(())
        }
        None => {
            println!("{}", report.to_json());
            Ok(())
        }
    }
}

fn parse_window(s: Option<&str>) -> Result<PlausibilityWindow> {
    match s {
        None => Ok(PlausibilityWindow::default()),
        Some("none") => Ok(PlausibilityWindow::unbounded()),
        Some(spec) => {
            let parts: Vec<f64> = parse_comma_list(spec, "window bound")?;
            if parts.len() != 2 || parts[0] >= parts[1] {
                return Err(Error::InvalidArgument(format!(
                    "window must be 'lo,hi' with lo < hi, got '{spec}'"
                )));
            }
            Ok(PlausibilityWindow::new(parts[0], parts[1]))
        }
    }
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Args, Serialize)]
pub struct EstimateArgs {
    /// Embedding container or numeric CSV; '-' reads stdin.
    #[arg(default_value = "-")]
    #[serde(skip)]
    pub input: String,
    /// Comma-separated subset of phd,twonn,mle,tle.
    #[arg(long, default_value = "phd,twonn,mle,tle")]
    pub methods: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Neighbor count for mle and tle.
    #[arg(long)]
    pub k: Option<usize>,
    /// Explicit subsample sizes for phd, e.g. 32,64,128,256.
    #[arg(long)]
    pub phd_sizes: Option<String>,
    #[arg(long, default_value_t = 15)]
    pub phd_restarts: usize,
    /// Aggregation over phd restarts: mean or median.
    #[arg(long, default_value = "median")]
    pub phd_agg: String,
    /// Fraction of largest ratios discarded by twonn.
    #[arg(long, default_value_t = 0.1)]
    pub discard: f64,
    /// Plausibility window 'lo,hi', or 'none'. Defaults to 2,18.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn estimate(args: EstimateArgs) -> Result<()> {
    let methods: Vec<String> = args
        .methods
        .split(',')
        .map(|m| m.trim().to_string())
        .collect();
    for m in &methods {
        if !EstimateBundle::METHODS.contains(&m.as_str()) {
            return Err(Error::InvalidArgument(format!("unknown method '{m}'")));
        }
    }
    let window = parse_window(args.window.as_deref())?;
    let aggregator = match args.phd_agg.as_str() {
        "mean" => Aggregator::Mean,
        "median" => Aggregator::Median,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown phd aggregator '{other}'"
            )))
        }
    };
    let phd_sizes = match &args.phd_sizes {
        Some(s) => Some(parse_comma_list::<usize>(s, "phd size")?),
        None => None,
    };

    let (clouds, failures) = load_clouds(&args.input)?;
    for (id, msg) in &failures {
        warn_row(id, msg);
    }
    if clouds.is_empty() {
        return Err(Error::Parse("no clouds parsed".into()));
    }

    let mut cfg = EstimatorConfig::new(RngSpec::new(args.seed)).with_window(window);
    cfg.phd_sizes = phd_sizes;
    cfg.phd_restarts = args.phd_restarts;
    cfg.phd_aggregator = aggregator;
    cfg.twonn_discard = args.discard;
    if let Some(k) = args.k {
        cfg.mle_k = k;
        cfg.tle_k = k;
    }

    let mut columns = vec!["n".to_string()];
    for m in &methods {
        columns.push(m.clone());
        columns.push(format!("{m}_valid"));
    }
    let metadata = ReportMetadata {
        config_hash: config_hash(&args),
        seed: args.seed,
        version: version(),
    };
    let mut report = Report::new(metadata, columns)?;

    type EstimateRow = (String, usize, Vec<(String, IdEstimate)>);
    let rows: Vec<EstimateRow> = clouds
        .par_iter()
        .map(|(id, cloud)| {
            let ests = run_methods(cloud, &methods, &cfg);
            (id.clone(), cloud.n(), ests)
        })
        .collect();

    for (id, n, ests) in rows {
        let mut values = BTreeMap::new();
        values.insert("n".to_string(), Some(n as f64));
        for (m, est) in ests {
            if let Some(note) = &est.note {
                warn_row(&id, &format!("{m}: {note}"));
            }
            values.insert(m.clone(), Some(est.value));
            values.insert(format!("{m}_valid"), Some(if est.valid { 1.0 } else { 0.0 }));
        }
        report.push_row(id, n < SHORT_GATE, values)?;
    }
    write_report(&report, &args.out)
}

fn run_methods(
    cloud: &PointCloud,
    methods: &[String],
    cfg: &EstimatorConfig,
) -> Vec<(String, IdEstimate)> {
    if EstimateBundle::METHODS
        .iter()
        .all(|m| methods.iter().any(|s| s == m))
    {
        let bundle = estimate_all(cloud, cfg);
        return EstimateBundle::METHODS
            .iter()
            .map(|m| (m.to_string(), bundle.get(m).unwrap().clone()))
            .collect();
    }
    methods
        .iter()
        .map(|m| {
            let est = match m.as_str() {
                "phd" => phd_estimate(cloud, &cfg.phd_config(cloud.n())),
                "twonn" => twonn_estimate(
                    cloud,
                    &TwoNnConfig {
                        discard_fraction: cfg.twonn_discard,
                        window: cfg.window,
                    },
                ),
                "mle" => mle_estimate(
                    cloud,
                    &MleConfig {
                        k: cfg.mle_k,
                        window: cfg.window,
                    },
                ),
                "tle" => tle_estimate(
                    cloud,
                    &TleConfig {
                        k: cfg.tle_k,
                        window: cfg.window,
                    },
                ),
                other => unreachable!("validated method '{other}'"),
            };
            (
                m.clone(),
                est.unwrap_or_else(|e| invalid_estimate(e.to_string())),
            )
        })
        .collect()
}

fn invalid_estimate(note: String) -> IdEstimate {
    IdEstimate {
        value: f64::NAN,
        samples: Vec::new(),
        diagnostics: BTreeMap::new(),
        valid: false,
        note: Some(note),
    }
}

// ---------------------------------------------------------------------------
// spectral

#[derive(Args, Serialize)]
pub struct SpectralArgs {
    #[arg(default_value = "-")]
    #[serde(skip)]
    pub input: String,
    /// Component counts for cumulative explained variance.
    #[arg(long, default_value = "1,20,60")]
    pub ks: String,
    /// Column-center the data before the SVD.
    #[arg(long)]
    pub centered: bool,
    /// Emit the full ev_1..ev_K curve.
    #[arg(long)]
    pub sweep: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn spectral(args: SpectralArgs) -> Result<()> {
    let ks: Vec<usize> = parse_comma_list(&args.ks, "component count")?;
    if ks.contains(&0) {
        return Err(Error::InvalidArgument("component counts must be positive".into()));
    }
    let (clouds, failures) = load_clouds(&args.input)?;
    for (id, msg) in &failures {
        warn_row(id, msg);
    }
    if clouds.is_empty() {
        return Err(Error::Parse("no clouds parsed".into()));
    }

    let mut columns = vec!["n".to_string(), "mev".to_string()];
    for k in &ks {
        columns.push(format!("ev_{k}"));
    }
    if let Some(k_max) = args.sweep {
        for k in 1..=k_max {
            let name = format!("ev_{k}");
            if !columns.contains(&name) {
                columns.push(name);
            }
        }
    }
    columns.push("schatten2".to_string());
    columns.push("effective_rank".to_string());
    columns.push("resultant_length".to_string());
    columns.push("zero_norm_rows".to_string());

    let metadata = ReportMetadata {
        config_hash: config_hash(&args),
        seed: 0,
        version: version(),
    };
    let mut report = Report::new(metadata, columns)?;

    type SpectralRow = (String, usize, BTreeMap<String, Option<f64>>);
    let rows: Vec<SpectralRow> = clouds
        .par_iter()
        .map(|(id, cloud)| {
            let mut values: BTreeMap<String, Option<f64>> = BTreeMap::new();
            values.insert("n".into(), Some(cloud.n() as f64));
            let spectrum = singular_spectrum(cloud, args.centered);
            let r = spectrum.sigma.len();
            let feasible: Vec<usize> = ks.iter().copied().filter(|&k| k <= r).collect();
            match spectral_metrics(&spectrum, &feasible) {
                Ok(m) => {
                    values.insert("mev".into(), Some(m.mev));
                    for (k, v) in m.ev {
                        values.insert(format!("ev_{k}"), Some(v));
                    }
                    values.insert("schatten2".into(), Some(m.schatten2));
                    values.insert("effective_rank".into(), Some(m.effective_rank));
                }
                Err(e) => warn_row(id, &e.to_string()),
            }
            if let Some(k_max) = args.sweep {
                if let Ok(curve) = ev_k_sweep(&spectrum, k_max.min(r)) {
                    for (i, v) in curve.iter().enumerate() {
                        values.insert(format!("ev_{}", i + 1), Some(*v));
                    }
                }
            }
            match resultant_length(cloud) {
                Ok(rl) => {
                    values.insert("resultant_length".into(), Some(rl.value));
                    values.insert("zero_norm_rows".into(), Some(rl.zero_rows as f64));
                }
                Err(e) => warn_row(id, &e.to_string()),
            }
            (id.clone(), cloud.n(), values)
        })
        .collect();

    for (id, n, values) in rows {
        report.push_row(id, n < SHORT_GATE, values)?;
    }
    write_report(&report, &args.out)
}

// ---------------------------------------------------------------------------
// textstats

#[derive(Args, Serialize)]
pub struct TextstatsArgs {
    #[serde(skip)]
    pub corpus: String,
    /// Function-word list (one lemma per line); defaults to the embedded set.
    #[arg(long)]
    #[serde(skip)]
    pub function_words: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub mattr_window: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn textstats(args: TextstatsArgs) -> Result<()> {
    let bytes = read_bytes(&args.corpus)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse("corpus is not UTF-8".into()))?;
    let (docs, failures) = corpus::parse_jsonl_lenient(&text);
    for (line, msg) in &failures {
        warn_row(&format!("line_{line}"), msg);
    }
    if docs.is_empty() {
        return Err(Error::Parse("no documents parsed".into()));
    }
    let fw = match &args.function_words {
        Some(path) => FunctionWords::parse(&std::fs::read_to_string(path)?),
        None => FunctionWords::default(),
    };

    let columns: Vec<String> = [
        "tokens",
        "cr",
        "pos_cr",
        "lemma_ttr",
        "bigram_lemma_ttr",
        "trigram_lemma_ttr",
        "mattr",
        "overlap_binary_all",
        "overlap_counted_all",
        "overlap_binary_content",
        "overlap_counted_content",
        "repeated_content_lemmas",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let metadata = ReportMetadata {
        config_hash: config_hash(&args),
        seed: 0,
        version: version(),
    };
    let mut report = Report::new(metadata, columns)?;

    type DocRow = (String, usize, BTreeMap<String, Option<f64>>);
    let rows: Vec<DocRow> = docs
        .par_iter()
        .map(|(_, doc)| {
            let mut v: BTreeMap<String, Option<f64>> = BTreeMap::new();
            let token_count = doc
                .tokens
                .as_ref()
                .map(|t| t.len())
                .unwrap_or_else(|| doc.text.split_whitespace().count());
            v.insert("tokens".into(), Some(token_count as f64));
            v.insert(
                "cr".into(),
                compression_ratio(doc.text.as_bytes()).ok(),
            );
            v.insert("pos_cr".into(), pos_compression_ratio(doc).ok());
            if let Ok(t) = ttr_family(doc, args.mattr_window) {
                v.insert("lemma_ttr".into(), Some(t.lemma_ttr));
                v.insert("bigram_lemma_ttr".into(), Some(t.bigram_lemma_ttr));
                v.insert("trigram_lemma_ttr".into(), Some(t.trigram_lemma_ttr));
                v.insert("mattr".into(), Some(t.mattr));
            }
            v.insert(
                "overlap_binary_all".into(),
                adjacent_overlap(doc, OverlapScope::All, OverlapCounting::Binary, Some(&fw)).ok(),
            );
            v.insert(
                "overlap_counted_all".into(),
                adjacent_overlap(doc, OverlapScope::All, OverlapCounting::Counted, Some(&fw)).ok(),
            );
            v.insert(
                "overlap_binary_content".into(),
                adjacent_overlap(doc, OverlapScope::Content, OverlapCounting::Binary, Some(&fw))
                    .ok(),
            );
            v.insert(
                "overlap_counted_content".into(),
                adjacent_overlap(doc, OverlapScope::Content, OverlapCounting::Counted, Some(&fw))
                    .ok(),
            );
            v.insert(
                "repeated_content_lemmas".into(),
                repeated_content_lemmas(doc, Some(&fw)).ok(),
            );
            (doc.id.clone(), token_count, v)
        })
        .collect();

    for (id, tokens, values) in rows {
        report.push_row(id, tokens < SHORT_GATE, values)?;
    }
    write_report(&report, &args.out)
}

// ---------------------------------------------------------------------------
// perturb

#[derive(Args, Serialize)]
pub struct PerturbArgs {
    #[serde(skip)]
    pub corpus: String,
    /// type1, type2, or type3.
    #[arg(long)]
    pub kind: String,
    /// Replacement probability for the homoglyph kinds.
    #[arg(long, default_value_t = 0.2)]
    pub p: f64,
    /// Homoglyph table (two tab-separated characters per line); defaults to
    /// the embedded confusables table.
    #[arg(long)]
    #[serde(skip)]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn perturb(args: PerturbArgs) -> Result<()> {
    let kind = PerturbKind::parse(&args.kind)?;
    let map = match &args.map {
        Some(path) => Some(HomoglyphMap::parse(&std::fs::read_to_string(path)?)?),
        None => (kind != PerturbKind::Type3).then(HomoglyphMap::default_table),
    };
    let bytes = read_bytes(&args.corpus)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse("corpus is not UTF-8".into()))?;
    let (docs, failures) = corpus::parse_jsonl_lenient(&text);
    for (line, msg) in &failures {
        warn_row(&format!("line_{line}"), msg);
    }
    if docs.is_empty() {
        return Err(Error::Parse("no documents parsed".into()));
    }

    let root = RngSpec::new(args.seed);
    let lines: Vec<String> = docs
        .par_iter()
        .enumerate()
        .map(|(idx, (_, doc))| {
            // Independent positional draws per document for the pointwise
            // kind; the word-type kinds share the root stream so equal words
            // transform identically across the whole corpus.
            let rng = match kind {
                PerturbKind::Type1 => root.substream(idx as u64),
                _ => root,
            };
            let transformed = transform(&doc.text, kind, args.p, rng, map.as_ref())?;
            let out_doc = idgeom::textstats::Document::new(doc.id.clone(), transformed);
            Ok(serde_json::to_string(&out_doc).expect("document serializes"))
        })
        .collect::<Result<_>>()?;

    let mut body = lines.join("\n");
    body.push('\n');
    write_text(&args.out, &body)
}

// ---------------------------------------------------------------------------
// synth

#[derive(Args, Serialize)]
pub struct SynthArgs {
    /// segment, cube, sphere, gaussian, or swiss_roll.
    #[arg(long)]
    pub kind: String,
    /// Intrinsic dimension.
    #[arg(long)]
    pub d: usize,
    /// Ambient dimension.
    #[arg(long = "D")]
    pub ambient: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output embedding file; stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let spec = ManifoldSpec {
        kind: ManifoldKind::parse(&args.kind)?,
        d: args.d,
        ambient: args.ambient,
        n: args.n,
        noise: args.noise,
        rng: RngSpec::new(args.seed),
    };
    let cloud = sample_manifold(&spec)?;
    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            emb::write_record(&mut file, cloud.data(), emb::Dtype::F64)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emb::write_record(&mut lock, cloud.data(), emb::Dtype::F64)?;
            lock.flush().map_err(Error::Io)
        }
    }
}

// ---------------------------------------------------------------------------
// correlate

#[derive(Args, Serialize)]
pub struct CorrelateArgs {
    #[serde(skip)]
    pub report_a: String,
    #[serde(skip)]
    pub report_b: Option<String>,
    #[arg(long, default_value = "pearson")]
    pub method: String,
    /// Keep rows flagged short.
    #[arg(long)]
    pub include_short: bool,
    /// Ignore companion *_valid mask columns.
    #[arg(long)]
    pub no_validity_mask: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn correlate(args: CorrelateArgs) -> Result<()> {
    let method = CorrMethod::parse(&args.method)?;
    let opts = MatrixOptions {
        include_short: args.include_short,
        respect_validity: !args.no_validity_mask,
    };
    let report_a = load_report(&args.report_a)?;
    let csv = match &args.report_b {
        None => analysis::metric_matrix(&report_a, method, opts)?.to_csv(),
        Some(path_b) => {
            let report_b = load_report(path_b)?;
            cross_matrix(&report_a, &report_b, method, opts)?
        }
    };
    write_text(&args.out, &csv)
}

fn load_report(path: &str) -> Result<Report> {
    let bytes = read_bytes(path)?;
    let text =
        String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{path}: not UTF-8")))?;
    Report::from_json(&text)
}

/// Correlations between every metric of report A and every metric of
/// report B, joined on row id.
fn cross_matrix(a: &Report, b: &Report, method: CorrMethod, opts: MatrixOptions) -> Result<String> {
    let metric_columns = |r: &Report| -> Vec<String> {
        r.columns
            .iter()
            .filter(|c| !c.ends_with("_valid"))
            .cloned()
            .collect()
    };
    let a_cols = metric_columns(a);
    let b_cols = metric_columns(b);
    if a_cols.is_empty() || b_cols.is_empty() {
        return Err(Error::InvalidArgument("reports have no metric columns".into()));
    }

    let masked = |r: &Report, col: &str| -> Vec<Option<f64>> {
        let raw = r.column(col).expect("column exists");
        let mask = if opts.respect_validity {
            r.column(&format!("{col}_valid"))
        } else {
            None
        };
        r.rows
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
            .collect()
    };

    // Join on id: first occurrence wins.
    let mut b_index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, row) in b.rows.iter().enumerate() {
        b_index.entry(row.id.as_str()).or_insert(i);
    }
    let joined: Vec<(usize, usize)> = a.rows
        .iter()
        .enumerate()
        .filter_map(|(i, row)| b_index.get(row.id.as_str()).map(|&j| (i, j)))
        .collect();

    let mut any_pair = false;
    let mut out = String::new();
    for c in &b_cols {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for ca in &a_cols {
        let va = masked(a, ca);
        out.push_str(ca);
        for cb in &b_cols {
            let vb = masked(b, cb);
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &(i, j) in &joined {
                if let (Some(x), Some(y)) = (va[i], vb[j]) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            out.push(',');
            if xs.len() >= 3 {
                any_pair = true;
                if let Ok(v) = analysis::correlate(&xs, &ys, method) {
                    out.push_str(&format!("{v}"));
                }
            }
        }
        out.push('\n');
    }
    if !any_pair {
        return Err(Error::DegenerateInput(
            "no metric pair has 3 complete joined rows".into(),
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// entropy-demo

#[derive(Args, Serialize)]
pub struct EntropyDemoArgs {
    /// Hidden-state matrix (rows are points).
    #[arg(long)]
    #[serde(skip)]
    pub hidden: String,
    /// Unembedding matrix (vocabulary x hidden).
    #[arg(long)]
    #[serde(skip)]
    pub unembed: String,
    /// Optional bias vector (length = vocabulary).
    #[arg(long)]
    #[serde(skip)]
    pub bias: Option<String>,
    #[arg(long, default_value = "0.001,0.01,0.1,1,10,100,1000")]
    pub alphas: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn entropy_demo(args: EntropyDemoArgs) -> Result<()> {
    let hidden = PointCloud::new(load_matrix(&args.hidden)?)?;
    let bias = match &args.bias {
        Some(path) => Some(load_vector(path)?),
        None => None,
    };
    let un = Unembedding::new(load_matrix(&args.unembed)?, bias)?;
    let alphas: Vec<f64> = parse_comma_list(&args.alphas, "alpha")?;

    // The sweep is about invariance, not text-range gating, so the window
    // stays open and raw values are reported.
    let cfg = EstimatorConfig::new(RngSpec::new(args.seed))
        .with_window(PlausibilityWindow::unbounded());
    let sweep = entropy_scale_sweep(&hidden, &un, &alphas, &cfg)?;

    let columns: Vec<String> = ["alpha", "mean_entropy", "phd", "twonn", "mle", "tle"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let metadata = ReportMetadata {
        config_hash: config_hash(&args),
        seed: args.seed,
        version: version(),
    };
    let mut report = Report::new(metadata, columns)?;
    let short = hidden.n() < SHORT_GATE;
    for point in &sweep {
        let mut v: BTreeMap<String, Option<f64>> = BTreeMap::new();
        v.insert("alpha".into(), Some(point.alpha));
        v.insert("mean_entropy".into(), Some(point.mean_entropy));
        for m in EstimateBundle::METHODS {
            v.insert(m.into(), Some(point.estimates.get(m).unwrap().value));
        }
        report.push_row(format!("alpha_{}", point.alpha), short, v)?;
    }
    write_report(&report, &args.out)
}

// ---------------------------------------------------------------------------
// sae

#[derive(Args, Serialize)]
pub struct SaeArgs {
    /// Directory holding w_enc.emb and w_dec.emb, with optional b_enc.emb,
    /// b_dec.emb, and thresholds.emb.
    #[arg(long)]
    #[serde(skip)]
    pub weights: PathBuf,
    /// Activation matrix (rows are tokens).
    #[arg(long)]
    #[serde(skip)]
    pub acts: String,
    /// relu or jump-relu (jump-relu requires thresholds.emb).
    #[arg(long, default_value = "relu")]
    pub activation: String,
    /// Feature aggregation: sum, mean, or max.
    #[arg(long, default_value = "sum")]
    pub agg: String,
    /// Steering triple 'feature,lambda,reference_scale'.
    #[arg(long)]
    pub steer: Option<String>,
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

pub fn sae(args: SaeArgs) -> Result<()> {
    let dir = &args.weights;
    let w_enc = load_matrix(dir.join("w_enc.emb").to_str().unwrap())?;
    let w_dec = load_matrix(dir.join("w_dec.emb").to_str().unwrap())?;
    let features = w_enc.nrows();
    let hidden = w_enc.ncols();
    let b_enc = load_optional_vector(dir.join("b_enc.emb"), features)?;
    let b_dec = load_optional_vector(dir.join("b_dec.emb"), hidden)?;
    let activation = match args.activation.as_str() {
        "relu" => SaeActivation::Relu,
        "jump-relu" => {
            let th = load_vector(dir.join("thresholds.emb").to_str().unwrap())?;
            SaeActivation::JumpRelu(th.to_vec())
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown activation '{other}'"
            )))
        }
    };
    let weights = SaeWeights::new(w_enc, b_enc, w_dec, b_dec, activation)?;
    let mode = AggregateMode::parse(&args.agg)?;

    let acts = load_matrix(&args.acts)?;
    let tokens = acts.nrows();
    if tokens == 0 {
        return Err(Error::Parse("no activation rows".into()));
    }

    let mut codes = ndarray::Array2::<f64>::zeros((tokens, weights.features()));
    let mut recon = ndarray::Array2::<f64>::zeros((tokens, weights.hidden()));
    let results: Vec<(ndarray::Array1<f64>, ndarray::Array1<f64>)> = (0..tokens)
        .into_par_iter()
        .map(|t| sae_forward(acts.row(t).as_slice().expect("standard layout"), &weights))
        .collect::<Result<_>>()?;
    for (t, (code, rec)) in results.into_iter().enumerate() {
        codes.row_mut(t).assign(&code);
        recon.row_mut(t).assign(&rec);
    }

    let aggregates: Vec<f64> = (0..weights.features())
        .map(|f| aggregate_feature(&codes, f, mode))
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(&args.out_dir)?;
    let write_emb = |name: &str, data: &ndarray::Array2<f64>| -> Result<()> {
        let mut file = std::fs::File::create(args.out_dir.join(name))?;
        emb::write_record(&mut file, data, emb::Dtype::F64)
    };
    write_emb("codes.emb", &codes)?;
    write_emb("recon.emb", &recon)?;
    std::fs::write(
        args.out_dir.join("aggregates.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "mode": args.agg,
            "values": aggregates,
        }))
        .expect("serializes"),
    )?;

    let mut outputs = vec!["codes.emb", "recon.emb", "aggregates.json"];
    if let Some(spec_str) = &args.steer {
        let parts: Vec<f64> = parse_comma_list(spec_str, "steer field")?;
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(
                "steer expects 'feature,lambda,reference_scale'".into(),
            ));
        }
        let spec = SteeringSpec {
            feature: parts[0] as usize,
            lambda: parts[1],
            reference_scale: parts[2],
        };
        let mut steered = ndarray::Array2::<f64>::zeros((tokens, weights.hidden()));
        for t in 0..tokens {
            let row = steer(
                acts.row(t).as_slice().expect("standard layout"),
                &weights,
                &spec,
            )?;
            steered.row_mut(t).assign(&row);
        }
        write_emb("steered.emb", &steered)?;
        outputs.push("steered.emb");
    }

    println!(
        "{}",
        serde_json::json!({
            "tokens": tokens,
            "features": weights.features(),
            "hidden": weights.hidden(),
            "outputs": outputs,
        })
    );
    Ok(())
}

fn load_optional_vector(path: PathBuf, len: usize) -> Result<ndarray::Array1<f64>> {
    if path.exists() {
        load_vector(path.to_str().unwrap())
    } else {
        Ok(ndarray::Array1::zeros(len))
    }
}
