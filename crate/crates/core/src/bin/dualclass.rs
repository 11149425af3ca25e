use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dualclass_core::pipeline::{run_analysis, run_report, Analysis, CommandReport, RunConfig};

#[derive(Parser)]
#[command(
    name = "dualclass",
    version,
    about = "Premium, wavelet coherence and LSTM forecast analyses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise premium series and summary statistics.
    Premiums(RunArgs),
    /// Wavelet coherence, phase and significance per pair.
    Coherence(RunArgs),
    /// LSTM forecast grid and metric tables.
    Forecast(RunArgs),
    /// Re-assemble metric tables from existing run records.
    Report {
        #[arg(long, env = "DUALCLASS_OUT")]
        out: PathBuf,
    },
    /// Every analysis selected by the config (or `--only`).
    Run {
        #[command(flatten)]
        args: RunArgs,
        #[arg(long, value_parser = parse_analysis)]
        only: Option<Analysis>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory from the config.
    #[arg(long, env = "DUALCLASS_OUT")]
    out: Option<PathBuf>,
}

fn parse_analysis(s: &str) -> Result<Analysis, String> {
    s.parse().map_err(|e: dualclass_core::Error| e.to_string())
}

fn load(args: &RunArgs) -> dualclass_core::Result<RunConfig> {
    let mut cfg = RunConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn summarize(name: &str, report: &CommandReport) -> bool {
    eprintln!("{name}: {} files written", report.written.len());
    for f in &report.failures {
        eprintln!("  FAILED {f}");
    }
    report.succeeded()
}

fn execute(cli: Cli) -> dualclass_core::Result<bool> {
    let (args, only) = match cli.command {
        Command::Report { out } => {
            let report = run_report(&out)?;
            return Ok(summarize("report", &report));
        }
        Command::Premiums(args) => (args, Some(Analysis::Premiums)),
        Command::Coherence(args) => (args, Some(Analysis::Coherence)),
        Command::Forecast(args) => (args, Some(Analysis::Forecast)),
        Command::Run { args, only } => (args, only),
    };
    let cfg = load(&args)?;
    let only = only.unwrap_or(cfg.analysis);
    let mut ok = true;
    for (analysis, report) in run_analysis(&cfg, only)? {
        ok &= summarize(&analysis.to_string(), &report);
    }
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
