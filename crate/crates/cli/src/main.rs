//! `relaykey`: rate regions, key-rate optimization, closed-form Gaussian
//! rates, and finite-blocklength protocol runs for two users agreeing on
//! a secret key through a relay.
//!
//! Exit codes: 0 success, 1 the computation failed (diagnostic on the
//! error stream), 2 the invocation was wrong.

mod cli;
mod cmd;
mod emit;
mod errors;
mod kv;
mod table;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let parsed = match cli::Cli::try_parse() {
        Ok(p) => p,
        Err(e) => {
            // Help and version requests land here too; clap routes them to
            // standard output and they exit 0. Real usage errors exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cmd::run(parsed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
