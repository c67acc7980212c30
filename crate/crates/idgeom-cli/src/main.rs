//! Command-line surface for the point-cloud geometry toolkit.
//!
//! Exit codes: 0 on success (per-row failures are reported but do not fail
//! the run), 2 for unreadable or malformed inputs, 1 for everything else.
//! Diagnostics go to stderr as one JSON object per line.

mod commands;
mod inputs;

use clap::{Parser, Subcommand};
use idgeom::Error;

#[derive(Parser)]
#[command(name = "idgeom", version, about = "Intrinsic dimension and embedding-geometry diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate intrinsic dimension for every cloud in an embedding file.
    Estimate(commands::EstimateArgs),
    /// Singular-spectrum anisotropy diagnostics per cloud.
    Spectral(commands::SpectralArgs),
    /// Compression and lexical metrics over a JSONL corpus.
    Textstats(commands::TextstatsArgs),
    /// Seeded text transformations over a JSONL corpus.
    Perturb(commands::PerturbArgs),
    /// Sample a synthetic manifold of known dimension.
    Synth(commands::SynthArgs),
    /// Pairwise metric correlation matrix from one or two reports.
    Correlate(commands::CorrelateArgs),
    /// Entropy-versus-geometry scale sweep on ingested matrices.
    EntropyDemo(commands::EntropyDemoArgs),
    /// Sparse-autoencoder codes, aggregates, and steering on ingested weights.
    Sae(commands::SaeArgs),
}

fn main() {
    configure_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => commands::estimate(args),
        Command::Spectral(args) => commands::spectral(args),
        Command::Textstats(args) => commands::textstats(args),
        Command::Perturb(args) => commands::perturb(args),
        Command::Synth(args) => commands::synth(args),
        Command::Correlate(args) => commands::correlate(args),
        Command::EntropyDemo(args) => commands::entropy_demo(args),
        Command::Sae(args) => commands::sae(args),
    };
    if let Err(e) = result {
        emit_error(&e);
        std::process::exit(exit_code(&e));
    }
}

/// IDGEOM_THREADS caps the worker pool; outputs do not depend on it.
fn configure_thread_pool() {
    if let Ok(v) = std::env::var("IDGEOM_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn emit_error(e: &Error) {
    eprintln!(
        "{}",
        serde_json::json!({
            "level": "error",
            "kind": error_kind(e),
            "message": e.to_string(),
        })
    );
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid_input",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::DegenerateInput(_) => "degenerate_input",
        Error::DegenerateFit(_) => "degenerate_fit",
        Error::MissingAnnotation(_) => "missing_annotation",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Io(_)
        | Error::InvalidInput(_)
        | Error::InvalidArgument(_)
        | Error::MissingAnnotation(_) => 2,
        _ => 1,
    }
}
