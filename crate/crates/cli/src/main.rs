//! `odaq`: stimulus generation, measurement, benchmarking and listening
//! sessions from one binary. Every flag can also be set through an
//! `ODAQ_*` environment variable.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use odaq_core::{ProcessingMethod, QualityLevel};

#[derive(Parser, Debug)]
#[command(name = "odaq", version, about = "Controlled coding-artifact stimuli, metrics and MUSHRA analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate reference, anchors and degraded conditions for a manifest.
    Generate(GenerateArgs),
    /// Score a stimulus directory with a native metric.
    Measure(MeasureArgs),
    /// Correlate metric scores with subjective scores.
    Bench(BenchArgs),
    /// Run the listening-test service.
    Serve(ServeArgs),
    /// Export session results and write descriptive statistics.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "ODAQ_JOBS")]
    jobs: Option<usize>,
    /// Print the job plan and exit without touching the filesystem.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// CSV with columns item_id,path,methods[,stems].
    #[arg(long, env = "ODAQ_MANIFEST")]
    manifest: PathBuf,
    #[arg(long, env = "ODAQ_OUT")]
    out: PathBuf,
    /// Master seed for every stochastic generator.
    #[arg(long, env = "ODAQ_SEED")]
    seed: u64,
    /// Only these methods (comma separated).
    #[arg(long, value_delimiter = ',', env = "ODAQ_METHOD")]
    method: Vec<ProcessingMethod>,
    /// Only these levels (comma separated).
    #[arg(long, value_delimiter = ',', env = "ODAQ_LEVEL")]
    level: Vec<QualityLevel>,
    #[arg(long, default_value_t = odaq_core::artifacts::LOUDNESS_TARGET_LUFS, allow_negative_numbers = true, env = "ODAQ_LOUDNESS_TARGET")]
    loudness_target: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Directory written by `generate`.
    #[arg(long, env = "ODAQ_STIMULI")]
    stimuli: PathBuf,
    /// NMR or SI-SDR.
    #[arg(long, env = "ODAQ_METRIC")]
    metric: String,
    /// Output CSV.
    #[arg(long, env = "ODAQ_OUT")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Subjective score CSV files.
    #[arg(long, required = true, num_args = 1.., env = "ODAQ_SCORES", value_delimiter = ',')]
    scores: Vec<PathBuf>,
    /// Metric score CSV files.
    #[arg(long, required = true, num_args = 1.., env = "ODAQ_METRIC", value_delimiter = ',')]
    metric: Vec<PathBuf>,
    /// Report CSV.
    #[arg(long, env = "ODAQ_OUT")]
    out: PathBuf,
    /// Heatmap SVG.
    #[arg(long, env = "ODAQ_HEATMAP")]
    heatmap: Option<PathBuf>,
    /// Per-pair audit log CSV.
    #[arg(long, env = "ODAQ_AUDIT")]
    audit: Option<PathBuf>,
    /// TOML column mapping for non-canonical score files.
    #[arg(long, env = "ODAQ_MAPPING")]
    mapping: Option<PathBuf>,
    /// Skip listener post-screening.
    #[arg(long)]
    no_screening: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, env = "ODAQ_STIMULI")]
    stimuli: PathBuf,
    /// JSON-lines results store (appended to).
    #[arg(long, env = "ODAQ_RESULTS")]
    results: PathBuf,
    #[arg(long, default_value_t = 8080, env = "ODAQ_PORT")]
    port: u16,
    #[arg(long, default_value = "127.0.0.1", env = "ODAQ_BIND")]
    bind: std::net::IpAddr,
    /// Master seed for trial plans.
    #[arg(long, env = "ODAQ_SEED")]
    seed: u64,
    /// Items reserved for training trials (comma separated).
    #[arg(long, value_delimiter = ',', required = true, env = "ODAQ_TRAINING_ITEMS")]
    training_items: Vec<String>,
    /// CSV listener_id,cohort; without it any listener id is admitted.
    #[arg(long, env = "ODAQ_LISTENERS")]
    listeners: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Results store to export as canonical score CSV.
    #[arg(long, env = "ODAQ_RESULTS")]
    results: Option<PathBuf>,
    /// Score CSV files (in addition to the exported results).
    #[arg(long, num_args = 1.., value_delimiter = ',', env = "ODAQ_SCORES")]
    scores: Vec<PathBuf>,
    #[arg(long, env = "ODAQ_MAPPING")]
    mapping: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "ODAQ_OUT")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Measure(a) => commands::measure(a),
        Command::Bench(a) => commands::bench(a),
        Command::Serve(a) => commands::serve(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.code())
        }
    }
}
