use std::path::PathBuf;
use std::process::ExitCode;

use abg_finsler::runner::{emit_report, load_config, report_to_string, run, Command};
use clap::{Args, Parser, Subcommand};

/// Verification harness for (alpha, beta, gamma)-Finsler metrics.
///
/// Exit status: 0 when every check passes, 1 when any check fails,
/// 2 when the config cannot be loaded or is invalid.
#[derive(Parser, Debug)]
#[command(name = "abg", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sweep Pi > 0, Gamma > 0 over the kernel rectangle
    Admissibility(Common),
    /// Closed-form g, det g, inverse and Cartan tensor against jet oracles
    Tensors(Common),
    /// Closed-form spray against the direct formula
    Spray(Common),
    /// Hamel residuals, the algebraic flatness condition and the projective factor
    Hamel(Common),
    /// Douglas tensor and the B^ij term
    Douglas(Common),
    /// Every check above
    VerifyAll(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail unless the metric is found projectively flat
    #[arg(long)]
    expect_flat: bool,
    /// Fail unless the metric is found to be of Douglas type
    #[arg(long)]
    expect_douglas: bool,
    /// Include full tensors in the report
    #[arg(long)]
    full: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Cmd::Admissibility(c) => (Command::Admissibility, c),
        Cmd::Tensors(c) => (Command::Tensors, c),
        Cmd::Spray(c) => (Command::Spray, c),
        Cmd::Hamel(c) => (Command::Hamel, c),
        Cmd::Douglas(c) => (Command::Douglas, c),
        Cmd::VerifyAll(c) => (Command::VerifyAll, c),
    };
    let mut cfg = match load_config(&opts.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("abg: {e}");
            return ExitCode::from(2);
        }
    };
    cfg.options.expect_flat |= opts.expect_flat;
    cfg.options.expect_douglas |= opts.expect_douglas;
    cfg.options.full |= opts.full;
    let report = match run(&cfg, command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("abg: {e}");
            return ExitCode::from(2);
        }
    };
    match &opts.out {
        Some(path) => {
            if let Err(e) = emit_report(&report, path) {
                eprintln!("abg: {e}");
                return ExitCode::from(2);
            }
            let s = &report.summary;
            println!(
                "{command}: {} checks, {} failed, {} inconclusive, {} skipped",
                s.checks_run, s.failures, s.inconclusive, s.skipped
            );
        }
        None => println!("{}", report_to_string(&report)),
    }
    ExitCode::from(report.exit_code() as u8)
}
