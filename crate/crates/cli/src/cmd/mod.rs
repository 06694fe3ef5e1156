//! Subcommand dispatch.

pub mod compare;
pub mod gaussian;
pub mod region;
pub mod selftest;
pub mod simulate;

use crate::cli::{Cli, Cmd};
use crate::errors::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Region(a) => region::run(a),
        Cmd::Gaussian(a) => gaussian::run(a),
        Cmd::Simulate(a) => simulate::run(a, simulate::Driver::MonteCarlo),
        Cmd::Exact(a) => simulate::run(a, simulate::Driver::Exact),
        Cmd::Compare(a) => compare::run(a),
        Cmd::Selftest(a) => selftest::run(a),
    }
}
