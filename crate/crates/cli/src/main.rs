use std::process::ExitCode;

use clap::Parser;
use noflab_cli::{emit_report, run_experiment, Cli, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};

fn init_threads() {
    let Ok(v) = std::env::var("NOFLAB_THREADS") else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring NOFLAB_THREADS={v}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let report = match run_experiment(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    if let Err(e) = emit_report(&report, cli.common.format, cli.common.output.as_deref()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    for c in report.failed_checks() {
        eprintln!("check failed: {}", c.name);
    }
    ExitCode::from(if report.passed { EXIT_PASS } else { EXIT_CHECK_FAILED } as u8)
}
