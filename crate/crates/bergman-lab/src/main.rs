mod args;
mod commands;
mod report;
mod svg;

use args::{Cli, Format};
use clap::Parser;
use commands::{Failure, Output};
use std::io::Write;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

const THREADS_VAR: &str = "BERGMAN_LAB_THREADS";

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // --help and --version exit 0, malformed flags exit 2
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Runs the command and writes its output; `Ok(false)` when a check failed.
fn execute(cli: &Cli) -> Result<bool, Failure> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().map_err(|_| Failure::Usage(format!("{THREADS_VAR}={v} is not a thread count")))?;
        bergman_lab_core::par::set_max_threads(n);
    }
    let common = &cli.common;
    let outcome = commands::run(&cli.command, common.format, common.seed)?;
    let text = match outcome.output {
        Output::Raw(s) => s,
        Output::Report(mut r) => {
            r.set("command", command_name(&cli.command)).set("seed", common.seed);
            if !common.no_timestamp {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
                r.set("timestamp", secs);
            }
            match common.format {
                Format::Json => r.to_json(),
                Format::Csv => r.to_csv().map_err(|e| Failure::Runtime(format!("csv: {e}")))?,
                Format::Text | Format::Svg => r.to_text(),
            }
        }
    };
    match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Runtime(format!("stdout: {e}")))?;
        }
    }
    if outcome.check_failed {
        eprintln!("error: the verification run reported a failed check");
    }
    Ok(!outcome.check_failed)
}

fn command_name(c: &args::Command) -> &'static str {
    use args::Command::*;
    match c {
        Classify { .. } => "classify",
        Diagram { .. } => "diagram",
        Norm { .. } => "norm",
        Trace { .. } => "trace",
        Spectrum { .. } => "spectrum",
        Identity { .. } => "identity",
        Integral { .. } => "integral",
        Verify { .. } => "verify",
    }
}
