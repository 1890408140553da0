//! Command-line front end: argument parsing, input loading, and reports.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod report;

use rkr_core::EnumBudget;

use crate::args::{Cli, Command};
use crate::error::CliResult;
use crate::report::Report;

/// Runs one parsed invocation.
pub fn run(cli: &Cli) -> CliResult<Report> {
    let budget = EnumBudget::from_env()?;
    match &cli.command {
        Command::Exact(a) => commands::cmd_exact(a, &budget),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::PoissonBound(a) => commands::cmd_poisson_bound(a, &budget),
        Command::LllCheck(a) => commands::cmd_lll_check(a, &budget),
        Command::Scan(a) => commands::cmd_scan(a, &budget),
        Command::Analyze(a) => commands::cmd_analyze(a),
        Command::Compare(a) => commands::cmd_compare(a, &budget),
    }
}
