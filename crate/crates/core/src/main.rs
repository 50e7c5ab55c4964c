use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use aplab::report::{
    append_ledger, cmd_check, cmd_critical_size, cmd_khintchine, cmd_kimvu, cmd_norms, cmd_verify,
    to_csv, CheckArgs, CommonArgs, CriticalSizeArgs, KhintchineArgs, KimvuArgs, NormsArgs,
    OutputFormat, RunRecord, VerifyArgs,
};
use aplab::Error;

#[derive(Debug, Parser)]
#[command(name = "aplab", version, about = "Random-difference progression thresholds and finite identity checks")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the critical size m* by Monte Carlo.
    CriticalSize(CriticalSizeArgs),
    /// Decide (k, epsilon)-intersectivity of one difference sequence.
    Check(CheckArgs),
    /// Run the identity and inequality suite on the default grid.
    Verify(VerifyArgs),
    /// Random-sign matrix sums against the Khintchine bound.
    Khintchine(KhintchineArgs),
    /// Derivative profiles, tail probes and set-vs-Bernoulli comparison.
    Kimvu(KimvuArgs),
    /// Operator norms of a demo matrix.
    Norms(NormsArgs),
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter(_)
            | Error::EmptyDifferences
            | Error::ExactLimitExceeded { .. }
            | Error::NotCoprime { .. }
            | Error::SubsetSizeTooSmall { .. }
            | Error::DimensionCapExceeded { .. }
            | Error::EnumerationLimit { .. }
            | Error::Precondition(_)
            | Error::Parse(_)
    )
}

fn run(cli: &Cli) -> aplab::Result<RunRecord> {
    let seed = cli.common.seed;
    match &cli.command {
        Command::CriticalSize(a) => cmd_critical_size(a, seed),
        Command::Check(a) => cmd_check(a, seed),
        Command::Verify(a) => cmd_verify(a, seed),
        Command::Khintchine(a) => cmd_khintchine(a, seed),
        Command::Kimvu(a) => cmd_kimvu(a, seed),
        Command::Norms(a) => cmd_norms(a, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Ok(v) = std::env::var("APLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            _ => {
                eprintln!("error: APLAB_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let start = Instant::now();
    let mut record = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_usage(&e) { 2 } else { 1 });
        }
    };
    record.wall_time = Some(start.elapsed().as_secs_f64());
    if let Err(e) = append_ledger(&cli.common.out, &record) {
        eprintln!("error: cannot write ledger {}: {e}", cli.common.out.display());
        return ExitCode::from(1);
    }
    let printed = match cli.common.format {
        OutputFormat::Json => record.payload(),
        OutputFormat::Csv => to_csv(&record),
    };
    match printed {
        Ok(text) => {
            // a closed pipe is not a failure of the run
            let _ = writeln!(std::io::stdout(), "{}", text.trim_end());
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    for a in record.assertions.iter().filter(|a| !a.pass) {
        eprintln!("assertion failed: {} ({})", a.name, a.detail);
    }
    if record.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
