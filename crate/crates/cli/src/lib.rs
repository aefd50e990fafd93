//! Front end for `infobound`: figure data, verification suites and sweeps.

pub mod error;
pub mod figures;
pub mod oracles;
pub mod sweep;
pub mod table;
pub mod verify;

use std::path::Path;

use infobound_core::QuadConfig;

pub use error::{CliError, Result};
pub use figures::{build_figure, Figure, FigureParams};
pub use sweep::{run_sweep, SweepConfig};
pub use table::Table;
pub use verify::{run_suite, CheckRecord, Report, Suite, VerifyOptions};

/// Builds figure `n` with overrides and writes it to `out`.
pub fn cmd_fig<S: AsRef<str>>(n: u8, out: &Path, overrides: &[S], alpha: &[f64]) -> Result<Table> {
    let params = FigureParams::defaults(Figure::from_number(n)?).with_overrides(overrides)?.with_alpha(alpha)?;
    let table = build_figure(&params, &QuadConfig::default())?;
    table.write_file(out)?;
    Ok(table)
}

/// Runs a suite and, when asked, writes the JSON report.
pub fn cmd_verify(suite: Suite, opts: &VerifyOptions, report_path: Option<&Path>) -> Result<Report> {
    let report = run_suite(suite, opts)?;
    if let Some(path) = report_path {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, json + "\n").map_err(|e| CliError::io(path, e))?;
    }
    Ok(report)
}

pub fn cmd_sweep(config: &Path, out: &Path) -> Result<Table> {
    let sc = SweepConfig::from_path(config)?;
    let table = run_sweep(&sc, &QuadConfig::default())?;
    table.write_file(out)?;
    Ok(table)
}
