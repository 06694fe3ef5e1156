//! `compare`: the two-user key rate against the best one-way alternative
//! at the same rates, as a single CSV row.
//!
//! Header: `rho,r1,r2,rc,rk,c1to2,c2to1,strict`. The `strict` column is 1
//! when the two-user rate beats every time-sharing mix of the one-way
//! capacities (that is, rk > max(c1to2, c2to1)), else 0.

use std::path::PathBuf;

use relaykey_core::gaussian::{max_key_rate_gaussian, oneway_capacity};

use crate::cli::CompareArgs;
use crate::emit::{deliver, fmt9};
use crate::errors::CliError;
use crate::kv;

pub fn run(a: CompareArgs) -> Result<(), CliError> {
    let file = a.config.as_deref().map(kv::load).transpose()?;
    let mut r = kv::Resolver::new(file);

    let rho: f64 = r.req("rho", a.rho)?;
    let r1: f64 = r.req("r1", a.r1)?;
    let r2: f64 = r.req("r2", a.r2)?;
    let rc: f64 = r.req("rc", a.rc)?;
    let out: Option<PathBuf> = r.get("out", a.out)?;
    r.finish()?;

    let rk = max_key_rate_gaussian(rho, r1, r2, rc)?;
    let c1to2 = oneway_capacity(rho, r1, rc)?;
    let c2to1 = oneway_capacity(rho, r2, rc)?;
    let strict = if rk > c1to2.max(c2to1) { 1 } else { 0 };

    let payload = format!(
        "rho,r1,r2,rc,rk,c1to2,c2to1,strict\n{},{},{},{},{},{},{},{strict}\n",
        fmt9(rho),
        fmt9(r1),
        fmt9(r2),
        fmt9(rc),
        fmt9(rk),
        fmt9(c1to2),
        fmt9(c2to1),
    );
    deliver(out.as_deref(), &payload)
}
