use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use infobound_tool::error::EXIT_USAGE;
use infobound_tool::{cmd_fig, cmd_sweep, cmd_verify, CliError, Suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "infobound", version, about = "Mutual information, Fisher information and MMSE relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the data behind figure 1, 2, 3 or 4 as CSV.
    Fig {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        n: u8,
        /// Output path [default: figN.csv]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parameter override `key=value` or `key=v1,v2`; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Coupling values for figure 3; repeatable or comma-separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        alpha: Vec<f64>,
    },
    /// Run a property suite; exits 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        /// Write a JSON report with one record per check.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Seed for the Monte Carlo oracle suite.
        #[arg(long, default_value_t = infobound_tool::oracles::DEFAULT_ORACLE_SEED)]
        seed: u64,
        /// Samples per Monte Carlo configuration.
        #[arg(long, default_value_t = 2_000_000)]
        samples: u64,
    },
    /// Run a parameter sweep described by a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Bounds,
    Nuisance,
    Oracles,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Bounds => Suite::Bounds,
            SuiteArg::Nuisance => Suite::Nuisance,
            SuiteArg::Oracles => Suite::Oracles,
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Fig { n, out, overrides, alpha } => {
            let out = out.unwrap_or_else(|| PathBuf::from(format!("fig{n}.csv")));
            let t = cmd_fig(n, &out, &overrides, &alpha)?;
            eprintln!("wrote {} rows to {}", t.rows.len(), out.display());
            Ok(0)
        }
        Command::Verify { suite, report, seed, samples } => {
            let opts = VerifyOptions { seed, mc_samples: samples, ..VerifyOptions::default() };
            let r = cmd_verify(suite.into(), &opts, report.as_deref())?;
            for o in &r.oracle_outcomes {
                println!(
                    "     {} {:<4} {:<58} exact={:.8e} mc={:.8e} se={:.2e} z={:.2}",
                    if o.covered { "ok  " } else { "miss" },
                    o.quantity,
                    o.name,
                    o.exact,
                    o.estimate,
                    o.stderr,
                    o.z
                );
            }
            for c in &r.checks {
                println!("{c}");
            }
            let failed = r.checks.iter().filter(|c| !c.pass).count();
            println!("{} checks, {failed} failed", r.checks.len());
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::Sweep { config, out } => {
            let t = cmd_sweep(&config, &out)?;
            eprintln!("wrote {} rows to {}", t.rows.len(), out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
