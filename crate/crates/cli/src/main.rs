//! `qtrain`: run training experiments, dump landscapes and estimate resources.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration (nothing
//! written), 3 budget exhausted before a target (outputs written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qtrain::harness::{self, ModeName, Overrides, ResourceParams};
use qtrain::Error;

#[derive(Parser)]
#[command(name = "qtrain", version, about = "Quantum training of quantized circuit parameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run a single seed instead of the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Candidate cost evaluation.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Write the brute-force cost table of a config's task to landscape.csv.
    Landscape { config: PathBuf },
    /// Print the resource report for a JSON parameter file or inline JSON object.
    Resources { params: String },
}

fn code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("qtrain: {e}");
    ExitCode::from(code(&e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
        mode: cli.mode.map(|m| match m {
            Mode::Exact => ModeName::Exact,
            Mode::Sampled => ModeName::Sampled,
        }),
    };
    match cli.command {
        Command::Run { config } => match harness::run_experiment(&config, &overrides) {
            Ok(out) => {
                for f in &out.files {
                    println!("{}", f.display());
                }
                if out.exhausted {
                    eprintln!("qtrain: budget exhausted before the target cost");
                    ExitCode::from(3)
                } else {
                    ExitCode::SUCCESS
                }
            }
            Err(e) => fail(e),
        },
        Command::Landscape { config } => match harness::write_landscape(&config, &overrides) {
            Ok(p) => {
                println!("{}", p.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Resources { params } => match resources(&params, cli.out_dir) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}

fn resources(params: &str, out_dir: Option<PathBuf>) -> qtrain::Result<String> {
    let text = if params.trim_start().starts_with('{') {
        params.to_owned()
    } else {
        std::fs::read_to_string(params)?
    };
    let p: ResourceParams =
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let report = serde_json::to_string_pretty(&p.report()?)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join(harness::RESOURCES), format!("{report}\n"))?;
    }
    Ok(report)
}
