//! `region`: evaluate one bound at concrete channels, or search for the
//! best key rate under rate caps.
//!
//! Output header: `r1,r2,rc,rk,rk_alt,channel_id`. `rk` is clamped at
//! zero; `rk_alt` is the unclamped alternate algebraic form of the key
//! rate (equal to the primary form for bounds that only have one).
//! Trusted-relay rows have no per-user description rates, so `r1` and
//! `r2` print as `NA`. `channel_id` is 0 for direct evaluations and the
//! index of the winning restart for optimizer output.

use std::path::PathBuf;

use relaykey_core::prob::{CondChannel, FiniteJoint};
use relaykey_core::regions::{
    common_inner_point, inner_point, max_key_rate_common, max_key_rate_inner,
    max_key_rate_trusted, outer_point, trusted_point, trusted_reduced_inner_point, BoundPoint,
    OptimizerConfig, RateCaps, TrustedBoundPoint,
};

use crate::cli::RegionArgs;
use crate::emit::{deliver, fmt9};
use crate::errors::CliError;
use crate::{kv, table};

const HEADER: &str = "r1,r2,rc,rk,rk_alt,channel_id\n";

fn bound_row(p: &BoundPoint, id: usize) -> String {
    format!(
        "{},{},{},{},{},{id}\n",
        fmt9(p.rates.r1),
        fmt9(p.rates.r2),
        fmt9(p.rates.rc),
        fmt9(p.rates.rk),
        fmt9(p.rk_cross),
    )
}

fn trusted_row(p: &TrustedBoundPoint, id: usize) -> String {
    format!("NA,NA,{},{},{},{id}\n", fmt9(p.rc), fmt9(p.rk), fmt9(p.rk_cross))
}

/// Index of the restart whose best equals the overall best.
fn winner(restart_best: &[f64], best: f64) -> usize {
    restart_best.iter().position(|&b| b == best).unwrap_or(0)
}

fn trace_csv(restart_best: &[f64]) -> String {
    let mut s = String::from("restart,best_rk\n");
    for (i, b) in restart_best.iter().enumerate() {
        s.push_str(&format!("{i},{}\n", fmt9(*b)));
    }
    s
}

struct Inputs {
    ch: Option<CondChannel>,
    ch1: Option<CondChannel>,
    ch2: Option<CondChannel>,
}

impl Inputs {
    fn req1(&mut self) -> Result<CondChannel, CliError> {
        self.ch1.take().ok_or_else(|| CliError::MissingKey("ch1".into()))
    }
    fn req2(&mut self) -> Result<CondChannel, CliError> {
        self.ch2.take().ok_or_else(|| CliError::MissingKey("ch2".into()))
    }
    fn req(&mut self) -> Result<CondChannel, CliError> {
        self.ch.take().ok_or_else(|| CliError::MissingKey("ch".into()))
    }
}

pub fn run(a: RegionArgs) -> Result<(), CliError> {
    let file = a.config.as_deref().map(kv::load).transpose()?;
    let mut r = kv::Resolver::new(file);

    let task_s: String = r.get_or("task", a.task, "point".into())?;
    let bound_s: String = r.get_or("bound", a.bound, "inner".into())?;
    let source_spec: String = r.req("source", a.source)?;
    let ch_spec: Option<String> = r.get("ch", a.ch)?;
    let ch1_spec: Option<String> = r.get("ch1", a.ch1)?;
    let ch2_spec: Option<String> = r.get("ch2", a.ch2)?;
    let cap_r1: Option<f64> = r.get("r1", a.r1)?;
    let cap_r2: Option<f64> = r.get("r2", a.r2)?;
    let cap_rc: Option<f64> = r.get("rc", a.rc)?;
    let restarts: Option<u32> = r.get("restarts", a.restarts)?;
    let max_iters: Option<u32> = r.get("max_iters", a.max_iters)?;
    let convergence_tol: Option<f64> = r.get("convergence_tol", a.convergence_tol)?;
    let grid_resolution: Option<u32> = r.get("grid_resolution", a.grid_resolution)?;
    let seed: Option<u64> = r.get("seed", a.seed)?;
    let trace: Option<PathBuf> = r.get("trace", a.trace)?;
    let out: Option<PathBuf> = r.get("out", a.out)?;
    r.finish()?;

    let task = kv::choice("task", &task_s, &["point", "optimize"])?;
    let bound = kv::choice(
        "bound",
        &bound_s,
        &["inner", "outer", "common", "trusted", "trusted-reduced"],
    )?;
    let source = table::load_source(&source_spec)?;

    let row = match task {
        "point" => {
            for (key, given) in [
                ("r1", cap_r1.is_some()),
                ("r2", cap_r2.is_some()),
                ("rc", cap_rc.is_some()),
                ("restarts", restarts.is_some()),
                ("max_iters", max_iters.is_some()),
                ("convergence_tol", convergence_tol.is_some()),
                ("grid_resolution", grid_resolution.is_some()),
                ("seed", seed.is_some()),
                ("trace", trace.is_some()),
            ] {
                if given {
                    return Err(CliError::Usage(format!(
                        "key `{key}` applies only to task `optimize`"
                    )));
                }
            }
            point_row(bound, &source, ch_spec, ch1_spec, ch2_spec)?
        }
        "optimize" => {
            for (key, given) in [
                ("ch", ch_spec.is_some()),
                ("ch1", ch1_spec.is_some()),
                ("ch2", ch2_spec.is_some()),
            ] {
                if given {
                    return Err(CliError::Usage(format!(
                        "key `{key}` applies only to task `point`"
                    )));
                }
            }
            let mut cfg = OptimizerConfig::default();
            if let Some(v) = restarts {
                cfg.restarts = v;
            }
            if let Some(v) = max_iters {
                cfg.max_iters = v;
            }
            if let Some(v) = convergence_tol {
                cfg.convergence_tol = v;
            }
            if let Some(v) = grid_resolution {
                cfg.grid_resolution = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            let caps = RateCaps {
                r1: cap_r1.unwrap_or(f64::INFINITY),
                r2: cap_r2.unwrap_or(f64::INFINITY),
                rc: cap_rc.unwrap_or(f64::INFINITY),
            };
            let (row, restart_best) = match bound {
                "inner" => {
                    let o = max_key_rate_inner(&source, caps, &cfg)?;
                    let id = winner(&o.restart_best, o.best_rk);
                    (bound_row(&o.point, id), o.restart_best)
                }
                "common" => {
                    let o = max_key_rate_common(&source, caps, &cfg)?;
                    let id = winner(&o.restart_best, o.best_rk);
                    (bound_row(&o.point, id), o.restart_best)
                }
                "trusted" => {
                    for (key, given) in
                        [("r1", cap_r1.is_some()), ("r2", cap_r2.is_some())]
                    {
                        if given {
                            return Err(CliError::Usage(format!(
                                "key `{key}` does not apply to bound `trusted`; only `rc` caps the search"
                            )));
                        }
                    }
                    let o = max_key_rate_trusted(&source, caps.rc, &cfg)?;
                    let id = winner(&o.restart_best, o.best_rk);
                    (trusted_row(&o.point, id), o.restart_best)
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "bound `{other}` supports only task `point`"
                    )))
                }
            };
            if let Some(tp) = trace {
                deliver(Some(&tp), &trace_csv(&restart_best))?;
            }
            row
        }
        _ => unreachable!(),
    };

    deliver(out.as_deref(), &format!("{HEADER}{row}"))
}

fn point_row(
    bound: &str,
    source: &FiniteJoint,
    ch_spec: Option<String>,
    ch1_spec: Option<String>,
    ch2_spec: Option<String>,
) -> Result<String, CliError> {
    let mut inputs = Inputs {
        ch: ch_spec.as_deref().map(table::load_channel).transpose()?,
        ch1: ch1_spec.as_deref().map(table::load_channel).transpose()?,
        ch2: ch2_spec.as_deref().map(table::load_channel).transpose()?,
    };
    let ctx = format!("to bound `{bound}`");
    let row = match bound {
        "inner" => {
            kv::forbid("ch", &inputs.ch, &ctx)?;
            let (c1, c2) = (inputs.req1()?, inputs.req2()?);
            bound_row(&inner_point(source, &c1, &c2)?, 0)
        }
        "outer" => {
            // Either one joint-output channel, or two per-user channels
            // combined into their product.
            let ch = if let Some(c) = inputs.ch.take() {
                kv::forbid("ch1", &inputs.ch1, "when `ch` is given")?;
                kv::forbid("ch2", &inputs.ch2, "when `ch` is given")?;
                c
            } else {
                let (c1, c2) = (inputs.req1()?, inputs.req2()?);
                CondChannel::product(&c1, &c2)?
            };
            bound_row(&outer_point(source, &ch)?, 0)
        }
        "common" => {
            kv::forbid("ch", &inputs.ch, &ctx)?;
            let (c1, c2) = (inputs.req1()?, inputs.req2()?);
            bound_row(&common_inner_point(source, &c1, &c2)?, 0)
        }
        "trusted" => {
            kv::forbid("ch1", &inputs.ch1, &ctx)?;
            kv::forbid("ch2", &inputs.ch2, &ctx)?;
            trusted_row(&trusted_point(source, &inputs.req()?)?, 0)
        }
        "trusted-reduced" => {
            kv::forbid("ch", &inputs.ch, &ctx)?;
            let (c1, c2) = (inputs.req1()?, inputs.req2()?);
            trusted_row(&trusted_reduced_inner_point(source, &c1, &c2)?, 0)
        }
        _ => unreachable!(),
    };
    Ok(row)
}
