use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use yawreg_cli::commands::Command;
use yawreg_cli::{run, RunOptions};

#[derive(Parser)]
#[command(name = "yawreg", version, about = "Regulated active-steering simulation campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Normalized steering-wheel step, controlled vs conventional.
    StepSteer(Common),
    /// Yaw-moment step disturbance, controlled vs conventional.
    StepMoment(Common),
    /// Correction angle of the limited-integrator vs the standard regulator.
    ActuatorCompare(Common),
    /// |Q| against the multiplicative-uncertainty family bound.
    Bode(Common),
    /// Stability, causality and integrator report.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; built-in defaults when absent.
    #[arg(long, env = "YAWREG_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory (overrides `[output] directory`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Condition filter, e.g. `all`, `0,3`, `v=20`, `mu=0.3`, `20:0.3`.
    #[arg(long)]
    conditions: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Verb::StepSteer(c) => (Command::StepSteer, c),
        Verb::StepMoment(c) => (Command::StepMoment, c),
        Verb::ActuatorCompare(c) => (Command::ActuatorCompare, c),
        Verb::Bode(c) => (Command::Bode, c),
        Verb::Check(c) => (Command::Check, c),
    };
    let opts = RunOptions {
        config: common.config,
        out: common.out,
        conditions: common.conditions,
    };
    match run(cmd, &opts) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            println!("wrote {} files to {}", outcome.manifest.all_files().count() + 1, outcome.out_dir.display());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("yawreg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
