//! Command-line front end: ingestion → fitting → forecasting → analysis,
//! with deterministic file-based inputs and outputs.

mod commands;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tdt",
    about = "Vulnerability disclosure forecasting over time dependency trees",
    version
)]
struct Cli {
    /// Emit machine-parseable error JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit per-cluster grace-period models from vulnerabilities + metadata.
    Fit(FitArgs),
    /// Forecast disclosure probability for a dependency tree over time.
    Forecast(ForecastArgs),
    /// Joint two-library analysis: probability plane or diagonal cut CSV.
    Joint(JointArgs),
    /// Chain health against a vulnerability feed.
    Health(HealthArgs),
    /// Export a time dependency tree as graph JSON (and optional DOT).
    TdtExport(TdtExportArgs),
}

#[derive(Args)]
pub struct FitArgs {
    /// Vulnerability feed (JSON).
    #[arg(long)]
    vulns: PathBuf,
    /// Instance metadata (CSV).
    #[arg(long)]
    metadata: PathBuf,
    /// Cluster scheme (JSON); defaults to own-size ≤ 100k × orientation.
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Severity floor for pooled records.
    #[arg(long, default_value_t = 7.0)]
    min_cvss: f64,
    /// Disable the severity filter entirely.
    #[arg(long)]
    no_min_cvss: bool,
    /// Minimum samples per cluster.
    #[arg(long, default_value_t = 5)]
    min_samples: usize,
    /// Fit sparse clusters instead of failing with exit code 2.
    #[arg(long)]
    allow_sparse: bool,
    /// Fixed bandwidth in days instead of Silverman's rule.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Output directory for model files.
    #[arg(long)]
    out: PathBuf,
    /// Also write the audit CSV of pooled samples.
    #[arg(long)]
    pools_csv: Option<PathBuf>,
    /// Also write per-cluster t,pdf,cdf plot CSVs into this directory.
    #[arg(long)]
    plots: Option<PathBuf>,
}

#[derive(Args)]
pub struct ForecastArgs {
    /// Snapshot files (canonical JSON or tree dumps); comma-separated or
    /// repeated, directories expand to their *.json files.
    #[arg(long = "snapshots", required = true, value_delimiter = ',')]
    snapshots_raw: Vec<String>,
    #[arg(skip)]
    snapshots: Vec<PathBuf>,
    #[arg(long)]
    metadata: PathBuf,
    /// Directory of fitted *.kde.json models.
    #[arg(long)]
    models_dir: PathBuf,
    /// Comma-separated ISO dates to index the tree at.
    #[arg(long)]
    at: String,
    /// Forecast horizon in days.
    #[arg(long)]
    horizon: u32,
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Dependency scopes to drop when parsing tree dumps.
    #[arg(long, value_delimiter = ',')]
    omit_scopes: Vec<String>,
    /// Evaluate the closed-form CDF past the model grid.
    #[arg(long)]
    extrapolate: bool,
    /// Output JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct JointArgs {
    #[arg(long)]
    models_dir: PathBuf,
    /// Cluster label (or file stem) for the x axis.
    #[arg(long)]
    cluster_a: String,
    /// Cluster label (or file stem) for the y axis.
    #[arg(long)]
    cluster_b: String,
    /// Release offsets X,Y in days: produce the diagonal-cut CSV.
    #[arg(long)]
    offsets: Option<String>,
    /// Horizon limit for the cut, in days.
    #[arg(long, default_value_t = 365.0)]
    u_max: f64,
    /// X_MAX,Y_MAX in days: produce the probability-plane CSV.
    #[arg(long)]
    plane: Option<String>,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct HealthArgs {
    #[arg(long)]
    metadata: PathBuf,
    #[arg(long)]
    vulns: PathBuf,
    /// Optional severity floor.
    #[arg(long)]
    min_cvss: Option<f64>,
    /// Output JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TdtExportArgs {
    #[arg(long = "snapshots", required = true, value_delimiter = ',')]
    snapshots_raw: Vec<String>,
    #[arg(skip)]
    snapshots: Vec<PathBuf>,
    #[arg(long)]
    metadata: PathBuf,
    #[arg(long, value_delimiter = ',')]
    omit_scopes: Vec<String>,
    /// Graph JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional DOT rendering (dependency edges solid, chain edges dashed).
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Also print single-point-of-failure coverage.
    #[arg(long)]
    spof: bool,
    /// Coverage floor for --spof.
    #[arg(long, default_value_t = 0.5)]
    min_coverage: f64,
    /// Also print instances with at least this many distinct dependents.
    #[arg(long)]
    pervasive: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let json_errors = cli.json_errors;

    let outcome: anyhow::Result<Option<commands::Sparse>> = (|| match cli.command {
        Command::Fit(args) => commands::cmd_fit(&args),
        Command::Forecast(mut args) => {
            args.snapshots = commands::expand_snapshot_paths(&args.snapshots_raw)?;
            commands::cmd_forecast(&args).map(|()| None)
        }
        Command::Joint(args) => commands::cmd_joint(&args).map(|()| None),
        Command::Health(args) => commands::cmd_health(&args).map(|()| None),
        Command::TdtExport(mut args) => {
            args.snapshots = commands::expand_snapshot_paths(&args.snapshots_raw)?;
            commands::cmd_tdt_export(&args).map(|()| None)
        }
    })();

    match outcome {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(commands::Sparse(clusters))) => {
            let message = format!(
                "clusters below the sample floor: {} (rerun with --allow-sparse to fit anyway)",
                clusters.join(", ")
            );
            emit_error(json_errors, "InsufficientData", &message);
            ExitCode::from(2)
        }
        Err(err) => {
            let kind = util::error_kind(&err);
            emit_error(json_errors, kind, &format!("{err:#}"));
            ExitCode::FAILURE
        }
    }
}

fn emit_error(json: bool, kind: &str, message: &str) {
    if json {
        let payload = serde_json::json!({"error": {"kind": kind, "message": message}});
        eprintln!("{payload}");
    } else {
        eprintln!("error: {message}");
    }
}
