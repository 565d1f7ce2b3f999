//! `sharpfront` — reaction-diffusion threshold experiments on the line.
//!
//! Every subcommand reads one TOML config (see `configs/` for worked
//! examples), optionally patched by `--set key.path=value`, and writes
//! its results under `<output root>/<subcommand>/<config stem>/`. The
//! output root comes from `--output-dir`, then `$SHARPFRONT_OUTPUT_DIR`,
//! then `./out`. Outputs are deterministic: rerunning a config
//! reproduces the files byte for byte.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, ThresholdOverrides};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "sharpfront", version, about = "Sharp-threshold experiments for reaction-diffusion on the line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output root (default: $SHARPFRONT_OUTPUT_DIR, then ./out).
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Override one config value, e.g. --set sim.t_max=50. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve indicator data; write probe series and snapshots.
    Simulate(CommonArgs),
    /// Bisect the critical support half-width between dying out and
    /// spreading.
    Threshold {
        #[command(flatten)]
        common: CommonArgs,
        /// Smallest support half-width of the bracket; must die out.
        #[arg(long = "L-min", value_name = "L")]
        l_min: Option<f64>,
        /// Largest support half-width of the bracket; must spread.
        #[arg(long = "L-max", value_name = "L")]
        l_max: Option<f64>,
        /// Stop once the verdict gap is at most this wide.
        #[arg(long = "gap-tol", value_name = "W")]
        gap_tol: Option<f64>,
        /// Horizon of each probe run.
        #[arg(long = "t-max", value_name = "T")]
        t_max: Option<f64>,
    },
    /// Stationary bump profile of a bistable reaction.
    Bump(CommonArgs),
    /// Traveling front speed and profile of a bistable reaction.
    Front(CommonArgs),
    /// Ordered-pair comparison run with the ratio witness series.
    Lemma22(CommonArgs),
    /// Repeat front/bump/threshold over a list of parameter values.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Worker threads (default: one per core).
        #[arg(long, value_name = "N")]
        jobs: Option<usize>,
    },
    /// Validate the configured reaction and the solver invariants.
    Check(CommonArgs),
}

fn output_root(common: &CommonArgs) -> PathBuf {
    common
        .output_dir
        .clone()
        .or_else(|| std::env::var_os("SHARPFRONT_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load(common: &CommonArgs) -> Result<(RunConfig, PathBuf, String), Failure> {
    let config = RunConfig::load(&common.config, &common.set).map_err(commands::config_failure)?;
    let stem = common
        .config
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("run")
        .to_string();
    Ok((config, output_root(common), stem))
}

fn dispatch(cli: Cli) -> Result<PathBuf, Failure> {
    match &cli.command {
        Command::Simulate(common) => {
            let (config, root, stem) = load(common)?;
            commands::run_simulate(&config, &root, &stem)
        }
        Command::Threshold { common, l_min, l_max, gap_tol, t_max } => {
            let (config, root, stem) = load(common)?;
            let over = ThresholdOverrides {
                l_min: *l_min,
                l_max: *l_max,
                gap_tol: *gap_tol,
                t_max: *t_max,
            };
            commands::run_threshold(&config, &over, &root, &stem)
        }
        Command::Bump(common) => {
            let (config, root, stem) = load(common)?;
            commands::run_bump(&config, &root, &stem)
        }
        Command::Front(common) => {
            let (config, root, stem) = load(common)?;
            commands::run_front(&config, &root, &stem)
        }
        Command::Lemma22(common) => {
            let (config, root, stem) = load(common)?;
            commands::run_lemma22(&config, &root, &stem)
        }
        Command::Sweep { common, jobs } => {
            let (config, root, stem) = load(common)?;
            commands::run_sweep(&config, *jobs, &root, &stem)
        }
        Command::Check(common) => {
            let (config, root, stem) = load(common)?;
            commands::run_check(&config, &root, &stem)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and succeed; real usage
            // errors go to stderr with exit code 1.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(dir) => {
            println!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
