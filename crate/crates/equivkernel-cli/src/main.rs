use clap::Parser;
use equivkernel_cli::checks::run_suite;
use equivkernel_cli::cloud_io::CloudFormat;
use equivkernel_cli::config::{Suite, SuiteConfig};
use equivkernel_cli::eval::evaluate_network;
use std::path::PathBuf;
use std::process::ExitCode;

/// Verification suites and network evaluation for rotation-equivariant
/// point-cloud features.
#[derive(Parser)]
#[command(name = "equivkernel", version, about)]
struct Cli {
    /// Verification suite to run (suite mode).
    #[arg(long, value_enum)]
    suite: Option<Suite>,

    /// Maximum polynomial degree exercised by spanning checks (at most 4).
    #[arg(long, default_value_t = 2)]
    degree: usize,

    /// Points per sampled cloud (at least 2).
    #[arg(long, default_value_t = 4)]
    points: usize,

    /// Random trials per stochastic check (at least 1).
    #[arg(long, default_value_t = 20)]
    trials: usize,

    /// Master seed. Falls back to EQUIVKERNEL_SEED, then 7.
    #[arg(long)]
    seed: Option<u64>,

    /// Tolerance override, `NAME=VALUE`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,

    /// Where to write the JSON report / evaluation output (stdout if
    /// omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Point-cloud file (evaluation mode).
    #[arg(long)]
    cloud: Option<PathBuf>,

    /// Cloud file format.
    #[arg(long, value_enum, default_value = "csv")]
    format: CloudFormat,

    /// Network description (JSON); presence selects evaluation mode.
    #[arg(long)]
    spec: Option<PathBuf>,
}

const USAGE_EXIT: u8 = 2;
const CHECK_FAILED_EXIT: u8 = 1;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if let Some(spec) = &cli.spec {
        let Some(cloud) = &cli.cloud else {
            eprintln!("error: --spec requires --cloud");
            return ExitCode::from(USAGE_EXIT);
        };
        return match evaluate_network(spec, cloud, cli.format) {
            Ok(output) => {
                let json = serde_json::to_string_pretty(&output).expect("output serializes");
                emit(&cli.out, &json)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(CHECK_FAILED_EXIT)
            }
        };
    }

    let Some(suite) = cli.suite else {
        eprintln!("error: either --suite (suite mode) or --spec (evaluation mode) is required");
        return ExitCode::from(USAGE_EXIT);
    };
    let seed = cli
        .seed
        .or_else(|| std::env::var("EQUIVKERNEL_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(7);
    let cfg = match SuiteConfig::new(suite, cli.degree, cli.points, cli.trials, seed, &cli.tol) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_EXIT);
        }
    };
    match run_suite(&cfg) {
        Ok(report) => {
            let json = report.to_json_string();
            let emit_code = emit(&cli.out, &json);
            if emit_code != ExitCode::SUCCESS {
                return emit_code;
            }
            for check in &report.checks {
                log::info!(
                    "{}: residual {:.3e} (tol {:.1e}) {}",
                    check.name,
                    check.residual,
                    check.tolerance,
                    if check.pass { "ok" } else { "FAILED" }
                );
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "{} of {} checks failed",
                    report.checks.iter().filter(|c| !c.pass).count(),
                    report.checks.len()
                );
                ExitCode::from(CHECK_FAILED_EXIT)
            }
        }
        Err(equivkernel_cli::checks::RunError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE_EXIT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CHECK_FAILED_EXIT)
        }
    }
}

fn emit(out: &Option<PathBuf>, json: &str) -> ExitCode {
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, format!("{json}\n")) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(CHECK_FAILED_EXIT);
            }
            ExitCode::SUCCESS
        }
        None => {
            println!("{json}");
            ExitCode::SUCCESS
        }
    }
}
