// SPDX-License-Identifier: Apache-2.0

//! `snnsim` command line. [`run`] takes explicit output streams so it can be
//! driven from tests; the binary is a thin wrapper around it.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::goldens::{builtin_cases, load_cases, run_golden, Simulator};
use crate::ioformats::{format_trace, load_hardware, load_network, load_stimulus, parse_network, TraceFormat};
use crate::netmodel::{resource_report, validate_network, HardwareConstants, Network};

pub const EXIT_OK: i32 = 0;
/// Validation failure or golden mismatch.
pub const EXIT_FAILED: i32 = 1;
/// Unreadable input or bad usage.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "snnsim", version, about = "Cycle-accurate spiking neuroprocessor simulator")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network against the hardware constants.
    Validate(NetArgs),
    /// Print resource usage of a network.
    Report(NetArgs),
    /// Simulate a network and print its trace.
    Run(RunArgs),
    /// Run the golden-trace regression cases.
    Golden(GoldenArgs),
}

#[derive(Debug, Args)]
pub struct NetArgs {
    /// Hardware constants (JSON).
    #[arg(long)]
    pub hw: PathBuf,
    /// Network settings (JSON).
    #[arg(long)]
    pub net: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub files: NetArgs,
    /// Stimulus file.
    #[arg(long)]
    pub stim: PathBuf,
    /// Number of integration cycles to simulate.
    #[arg(long)]
    pub cycles: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Table,
    Jsonl,
}

impl From<Format> for TraceFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => TraceFormat::Table,
            Format::Jsonl => TraceFormat::Jsonl,
        }
    }
}

#[derive(Debug, Args)]
pub struct GoldenArgs {
    /// Directory of case directories. Defaults to the built-in set.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

fn hardware(path: &Path) -> Result<HardwareConstants> {
    load_hardware(&read(path)?).map_err(|e| with_path(path, e))
}

fn network(path: &Path, hw: &HardwareConstants) -> Result<Network> {
    load_network(&read(path)?, hw).map_err(|e| with_path(path, e))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and executes the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&config.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::Io {
        path: "<output>".into(),
        source: e,
    };
    match cmd {
        Command::Validate(a) => {
            let hw = hardware(&a.hw)?;
            let net = parse_network(&read(&a.net)?).map_err(|e| with_path(&a.net, e))?;
            let report = validate_network(&net, &hw);
            write!(out, "{report}").map_err(io)?;
            Ok(if report.ok() { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Report(a) => {
            let hw = hardware(&a.hw)?;
            let net = network(&a.net, &hw)?;
            write!(out, "{}", resource_report(&net, &hw)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Run(a) => {
            let hw = hardware(&a.files.hw)?;
            let net = network(&a.files.net, &hw)?;
            let stim = load_stimulus(&read(&a.stim)?, &net).map_err(|e| with_path(&a.stim, e))?;
            let trace = Engine::new(&net, &hw, &stim)?.run(a.cycles);
            out.write_all(format_trace(&trace, a.format.into()).as_bytes())
                .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Golden(a) => {
            let cases = match &a.fixtures {
                Some(dir) => load_cases(dir)?,
                None => builtin_cases(),
            };
            if cases.is_empty() {
                return Err(Error::InvalidArgument("no golden cases found".into()));
            }
            let reports = std::thread::scope(|s| {
                let handles: Vec<_> = cases
                    .iter()
                    .map(|c| s.spawn(move || run_golden(c, Simulator::Engine)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("golden worker panicked"))
                    .collect::<Result<Vec<_>>>()
            })?;
            let passed = reports.iter().filter(|r| r.passed()).count();
            for r in &reports {
                if r.passed() {
                    writeln!(out, "{r}").map_err(io)?;
                } else {
                    writeln!(err, "{r}").map_err(io)?;
                }
            }
            writeln!(out, "{passed}/{} passed", reports.len()).map_err(io)?;
            Ok(if passed == reports.len() { EXIT_OK } else { EXIT_FAILED })
        }
    }
}
