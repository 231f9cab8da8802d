//! Batch runner for the regulated-steering campaigns: reads a config, runs
//! the selected operating conditions and writes CSV traces, plot data and a
//! JSON run manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod filter;
pub mod format;
pub mod manifest;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use commands::{execute, Command, Report};
use config::{Config, Resolved, Source};
use error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_OK};
use filter::ConditionFilter;
use manifest::{manifest_file, RunManifest};

pub const BUILTIN_CONFIG_LABEL: &str = "<defaults>";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub conditions: Option<String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
    pub stdout: String,
    pub exit_code: i32,
}

/// Reads and resolves a config file, or the built-in defaults.
pub fn load_config(path: Option<&Path>) -> CliResult<Resolved> {
    let (label, text) = match path {
        Some(p) => (
            p.display().to_string(),
            fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        ),
        None => (BUILTIN_CONFIG_LABEL.to_string(), String::new()),
    };
    let src = Source { label: &label, text: &text };
    Config::parse(&src)?.resolve(&src)
}

/// Runs one command end to end. Files are written only once every
/// condition has been computed; config and filter errors write nothing.
pub fn run(cmd: Command, opts: &RunOptions) -> CliResult<RunOutcome> {
    let started = Instant::now();
    let resolved = load_config(opts.config.as_deref())?;
    let filter = match &opts.conditions {
        Some(text) => ConditionFilter::parse(text)?,
        None => ConditionFilter::all(),
    };
    let conditions: Vec<_> = resolved.loops.iter().map(|lp| *lp.condition()).collect();
    let selection = filter.select(&conditions)?;
    let out_dir = opts
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&resolved.config.output.directory));

    let mut report = execute(cmd, &resolved, &selection)?;
    let manifest = manifest_for(&report, &resolved, started);
    report.artifacts.add(manifest_file(cmd.name()), manifest.to_json());
    report.artifacts.commit(&out_dir)?;
    for f in manifest.all_files() {
        let p = out_dir.join(f);
        if !p.is_file() {
            return Err(CliError::io(p, std::io::Error::other("listed file missing after write")));
        }
    }
    Ok(RunOutcome {
        stdout: report.render(),
        exit_code: if report.failed { EXIT_NUMERICAL } else { EXIT_OK },
        manifest,
        out_dir,
    })
}

fn manifest_for(report: &Report, resolved: &Resolved, started: Instant) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: report.command.name().into(),
        config: resolved.config.to_toml(),
        conditions: report.conditions.clone(),
        files: report.files.clone(),
        summary: report.summary.clone(),
        notes: report.notes.clone(),
        wall_clock_s: started.elapsed().as_secs_f64(),
    }
}
