//! `gaussian`: closed-form rates for the unit-variance jointly Gaussian
//! source pair with correlation `rho`.
//!
//! Modes and their output headers:
//! - `point` — evaluate at quantizer noise variances (`nq1`, `nq2`):
//!   `rho,nq1,nq2,r1,r2,rc,rk`
//! - `alpha` — fixed rates, sweep the time-sharing weight over [0, 1]:
//!   `alpha,rk,c1to2,c2to1,cstar`
//! - `beta` — tie both description rates to `beta * rc`, sweep beta over
//!   [0, 2]: `beta,rk,c1to2,c2to1,cstar`

use std::path::PathBuf;

use relaykey_core::gaussian::{comparison_sweep, gaussian_inner_point, GaussianParams, SweepMode, SweepRow};

use crate::cli::GaussianArgs;
use crate::emit::{deliver, fmt9};
use crate::errors::CliError;
use crate::kv;

fn sweep_csv(label: &str, rows: &[SweepRow]) -> String {
    let mut s = format!("{label},rk,c1to2,c2to1,cstar\n");
    for row in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt9(row.x),
            fmt9(row.rk),
            fmt9(row.c1to2),
            fmt9(row.c2to1),
            fmt9(row.cstar),
        ));
    }
    s
}

pub fn run(a: GaussianArgs) -> Result<(), CliError> {
    let file = a.config.as_deref().map(kv::load).transpose()?;
    let mut r = kv::Resolver::new(file);

    let mode_s: String = r.get_or("mode", a.mode, "point".into())?;
    let rho: f64 = r.req("rho", a.rho)?;
    let nq1: Option<f64> = r.get("nq1", a.nq1)?;
    let nq2: Option<f64> = r.get("nq2", a.nq2)?;
    let r1: Option<f64> = r.get("r1", a.r1)?;
    let r2: Option<f64> = r.get("r2", a.r2)?;
    let rc: Option<f64> = r.get("rc", a.rc)?;
    let points: Option<u32> = r.get("points", a.points)?;
    let out: Option<PathBuf> = r.get("out", a.out)?;
    r.finish()?;

    let mode = kv::choice("mode", &mode_s, &["point", "alpha", "beta"])?;

    let payload = match mode {
        "point" => {
            for (key, given) in [
                ("r1", r1.is_some()),
                ("r2", r2.is_some()),
                ("rc", rc.is_some()),
                ("points", points.is_some()),
            ] {
                if given {
                    return Err(CliError::Usage(format!(
                        "key `{key}` does not apply to mode `point`"
                    )));
                }
            }
            let nq1 = nq1.ok_or_else(|| CliError::MissingKey("nq1".into()))?;
            let nq2 = nq2.ok_or_else(|| CliError::MissingKey("nq2".into()))?;
            let p = gaussian_inner_point(&GaussianParams::new(rho, nq1, nq2)?)?;
            format!(
                "rho,nq1,nq2,r1,r2,rc,rk\n{},{},{},{},{},{},{}\n",
                fmt9(rho),
                fmt9(nq1),
                fmt9(nq2),
                fmt9(p.r1),
                fmt9(p.r2),
                fmt9(p.rc),
                fmt9(p.rk),
            )
        }
        "alpha" => {
            kv::forbid("nq1", &nq1, "to mode `alpha`")?;
            kv::forbid("nq2", &nq2, "to mode `alpha`")?;
            let r1 = r1.ok_or_else(|| CliError::MissingKey("r1".into()))?;
            let r2 = r2.ok_or_else(|| CliError::MissingKey("r2".into()))?;
            let rc = rc.ok_or_else(|| CliError::MissingKey("rc".into()))?;
            let rows = comparison_sweep(SweepMode::Alpha { r1, r2 }, rho, rc, points.unwrap_or(101))?;
            sweep_csv("alpha", &rows)
        }
        "beta" => {
            for (key, given) in [
                ("nq1", nq1.is_some()),
                ("nq2", nq2.is_some()),
                ("r1", r1.is_some()),
                ("r2", r2.is_some()),
            ] {
                if given {
                    return Err(CliError::Usage(format!(
                        "key `{key}` does not apply to mode `beta`"
                    )));
                }
            }
            let rc = rc.ok_or_else(|| CliError::MissingKey("rc".into()))?;
            let rows = comparison_sweep(SweepMode::Beta, rho, rc, points.unwrap_or(101))?;
            sweep_csv("beta", &rows)
        }
        _ => unreachable!(),
    };

    deliver(out.as_deref(), &payload)
}
