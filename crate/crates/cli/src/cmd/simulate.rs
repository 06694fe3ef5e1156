//! `simulate` (Monte Carlo) and `exact` (full enumeration): run the
//! finite-blocklength protocol and report one CSV row with the fixed
//! header
//! `mode,n,eps,slack,rb,rk1,rk2,rkz,trials,seed,agreement,enc_fail,dec_fail,key_entropy_rate,leakage_rate,leakage_se,partial_key_mi`.
//!
//! Quantities a driver does not provide print as `NA`: index rates in
//! trusted mode, leakage whenever the plug-in estimate is gated off by
//! support size, the standard error outside Monte Carlo runs. For `exact`,
//! the `trials` column counts the positive-probability sequence tuples
//! enumerated.

use std::path::PathBuf;

use relaykey_core::sim::{
    build_codebook, build_trusted_codebook, exact_analysis, run_monte_carlo, SimConfig, SimMode,
    SimReport, trusted_exact,
};

use crate::cli::SimArgs;
use crate::emit::{deliver, fmt9, fmt9_opt};
use crate::errors::CliError;
use crate::{kv, table};

#[derive(Clone, Copy, PartialEq)]
pub enum Driver {
    MonteCarlo,
    Exact,
}

pub const HEADER: &str = "mode,n,eps,slack,rb,rk1,rk2,rkz,trials,seed,agreement,enc_fail,dec_fail,key_entropy_rate,leakage_rate,leakage_se,partial_key_mi\n";

fn mode_name(m: SimMode) -> &'static str {
    match m {
        SimMode::Untrusted => "untrusted",
        SimMode::Common => "common",
        SimMode::Trusted => "trusted",
    }
}

pub fn report_csv(r: &SimReport) -> String {
    format!(
        "{HEADER}{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        mode_name(r.mode),
        r.n,
        fmt9(r.eps),
        fmt9(r.slack),
        fmt9_opt(r.rb),
        fmt9_opt(r.rk1),
        fmt9_opt(r.rk2),
        fmt9_opt(r.rkz),
        r.trials_run,
        r.seed,
        fmt9(r.agreement_rate),
        fmt9(r.encoding_failure_rate),
        fmt9(r.decoding_failure_rate),
        fmt9(r.empirical_key_entropy_rate),
        fmt9_opt(r.leakage_rate),
        fmt9_opt(r.leakage_se),
        fmt9_opt(r.partial_key_mi),
    )
}

pub fn run(a: SimArgs, driver: Driver) -> Result<(), CliError> {
    let file = a.config.as_deref().map(kv::load).transpose()?;
    let mut r = kv::Resolver::new(file);

    let mode_s: String = r.get_or("mode", a.mode, "untrusted".into())?;
    let n: usize = r.req("n", a.n)?;
    let source_spec: String = r.req("source", a.source)?;
    let ch_spec: Option<String> = r.get("ch", a.ch)?;
    let ch1_spec: Option<String> = r.get("ch1", a.ch1)?;
    let ch2_spec: Option<String> = r.get("ch2", a.ch2)?;
    let eps: Option<f64> = r.get("eps", a.eps)?;
    let slack: Option<f64> = r.get("slack", a.slack)?;
    let rb: Option<f64> = r.get("rb", a.rb)?;
    let rk1: Option<f64> = r.get("rk1", a.rk1)?;
    let rk2: Option<f64> = r.get("rk2", a.rk2)?;
    let rkz: Option<f64> = r.get("rkz", a.rkz)?;
    let trials: Option<u64> = r.get("trials", a.trials)?;
    let master_seed: Option<u64> = r.get("master_seed", a.master_seed)?;
    let codebook_cap: Option<u64> = r.get("codebook_cap", a.codebook_cap)?;
    let enum_cap: Option<u64> = r.get("enum_cap", a.enum_cap)?;
    let dump_codebook: Option<PathBuf> = r.get("dump_codebook", a.dump_codebook)?;
    let out: Option<PathBuf> = r.get("out", a.out)?;
    r.finish()?;

    let mode = kv::choice("mode", &mode_s, &["untrusted", "common", "trusted"])?;
    if driver == Driver::Exact {
        kv::forbid("trials", &trials, "to `exact`")?;
    }
    let source = table::load_source(&source_spec)?;

    let mut cfg = match mode {
        "trusted" => {
            kv::forbid("ch1", &ch1_spec, "to mode `trusted`")?;
            kv::forbid("ch2", &ch2_spec, "to mode `trusted`")?;
            let spec = ch_spec.ok_or_else(|| CliError::MissingKey("ch".into()))?;
            SimConfig::trusted(n, source, table::load_channel(&spec)?)
        }
        _ => {
            kv::forbid("ch", &ch_spec, &format!("to mode `{mode}`"))?;
            let s1 = ch1_spec.ok_or_else(|| CliError::MissingKey("ch1".into()))?;
            let s2 = ch2_spec.ok_or_else(|| CliError::MissingKey("ch2".into()))?;
            let c1 = table::load_channel(&s1)?;
            let c2 = table::load_channel(&s2)?;
            if mode == "common" {
                SimConfig::common(n, source, c1, c2)
            } else {
                SimConfig::untrusted(n, source, c1, c2)
            }
        }
    };

    if let Some(v) = eps {
        cfg.eps = v;
    }
    if let Some(v) = slack {
        cfg.slack = v;
    }
    cfg.rb = rb;
    cfg.key_split = match (rk1, rk2) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "keys `rk1` and `rk2` must be given together".into(),
            ))
        }
    };
    if rkz.is_some() {
        cfg.rkz = rkz;
    }
    if let Some(v) = trials {
        cfg.trials = v;
    }
    if let Some(v) = master_seed {
        cfg.master_seed = v;
    }
    if let Some(v) = codebook_cap {
        cfg.codebook_cap = v;
    }
    if let Some(v) = enum_cap {
        cfg.enum_cap = v;
    }

    let report = match (driver, mode) {
        (Driver::MonteCarlo, _) => run_monte_carlo(&cfg)?,
        (Driver::Exact, "trusted") => trusted_exact(&cfg)?,
        (Driver::Exact, _) => exact_analysis(&cfg)?,
    };

    if let Some(dump) = dump_codebook {
        let text = if mode == "trusted" {
            build_trusted_codebook(&cfg)?.dump()
        } else {
            build_codebook(&cfg)?.dump()
        };
        deliver(Some(&dump), &text)?;
    }

    deliver(out.as_deref(), &report_csv(&report))
}
