//! Exact-enumeration driver: walks every positive-probability source
//! realization of length `n`, runs the full protocol on each, and weights
//! outcomes by their exact probabilities, yielding closed-book rates and
//! true (non-sampled) leakage values.

use alloc::string::String;
use alloc::vec;

use crate::err::{Error, Result};

use super::book::{build_codebook, build_trusted_codebook};
use super::pipeline::{build_z_partition, split_symbol, Engine, Tally, TrustedEngine};
use super::stats::{entropy_bits, mi_bits};
use super::{plan, trusted_plan, SimConfig, SimMode, SimReport};

/// Check that `flat_len.pow(n)` fits under the enumeration cap and return it.
fn enumeration_total(flat_len: usize, n: usize, cap: u64) -> Result<u64> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(flat_len as u128);
        if total > cap as u128 {
            return Err(Error::EnumerationCapExceeded { needed: total, cap });
        }
    }
    Ok(total as u64)
}

/// Exhaustively analyze an untrusted- or common-mode configuration.
///
/// Every length-`n` source sequence with positive probability is pushed
/// through covering, relay combination, packing, and key assembly; the
/// report's rates and information measures are exact expectations under the
/// source law. Trusted mode has its own driver, [`trusted_exact`].
pub fn exact_analysis(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    if cfg.mode == SimMode::Trusted {
        return Err(Error::ConfigInvalid(String::from(
            "exact_analysis handles the relay-combining modes; use trusted_exact",
        )));
    }
    let p = plan(cfg)?;
    let book = build_codebook(cfg)?;
    let src_sizes = cfg.source.sizes().to_vec();
    let zpart = if cfg.mode == SimMode::Common {
        Some(build_z_partition(
            src_sizes[2],
            cfg.n,
            p.zbins,
            cfg.master_seed,
            cfg.enum_cap,
        )?)
    } else {
        None
    };
    let flat_len: usize = src_sizes.iter().product();
    let total = enumeration_total(flat_len, cfg.n, cfg.enum_cap)?;
    let probs = cfg.source.probs();

    let mut engine = Engine::new(&p, &book, zpart.as_ref());
    let mut tally = Tally::default();
    let mut trials_run: u64 = 0;

    let n = cfg.n;
    let mut xn = vec![0u16; n];
    let mut yn = vec![0u16; n];
    let mut zn = vec![0u16; n];
    let mut sym = vec![0u16; src_sizes.len()];
    for id in 0..total {
        let mut rem = id;
        let mut prob = 1.0f64;
        let mut steps = vec![0usize; n];
        for t in (0..n).rev() {
            let f = (rem % flat_len as u64) as usize;
            rem /= flat_len as u64;
            steps[t] = f;
            prob *= probs[f];
        }
        if prob == 0.0 {
            continue;
        }
        for (t, &f) in steps.iter().enumerate() {
            split_symbol(f, &src_sizes, &mut sym);
            xn[t] = sym[0];
            yn[t] = sym[1];
            if src_sizes.len() == 3 {
                zn[t] = sym[2];
            }
        }
        let z_opt: Option<&[u16]> =
            if cfg.mode == SimMode::Common { Some(&zn) } else { None };
        let rec = engine.trial(&xn, &yn, z_opt)?;
        tally.add(&rec, prob);
        trials_run += 1;
    }
    tally.normalize();

    let nf = n as f64;
    Ok(SimReport {
        mode: cfg.mode,
        n,
        eps: cfg.eps,
        slack: cfg.slack,
        seed: cfg.master_seed,
        trials_run,
        rb: Some(p.rb),
        rk1: Some(p.rk1),
        rk2: Some(p.rk2),
        rkz: p.rkz,
        agreement_rate: tally.agreement_rate(),
        encoding_failure_rate: tally.enc_fail,
        decoding_failure_rate: tally.unres + tally.wrong,
        total_error_rate: 1.0 - tally.agree,
        empirical_key_entropy_rate: entropy_bits(tally.key_hist.values()) / nf,
        leakage_rate: Some(mi_bits(&tally.leak) / nf),
        leakage_se: None,
        broadcast_leakage_rate: Some(mi_bits(&tally.bc) / nf),
        partial_key_mi: Some(mi_bits(&tally.partial) / nf),
    })
}

/// Exhaustive analysis of a trusted-relay configuration: the relay covers
/// the observed pair with a `(w_c, w′)` codeword, broadcasts `w_c`, and both
/// users decode `w′` as the key. Leakage is measured against the broadcast.
pub fn trusted_exact(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    if cfg.mode != SimMode::Trusted {
        return Err(Error::ConfigInvalid(String::from(
            "trusted_exact requires trusted mode; use exact_analysis otherwise",
        )));
    }
    let p = trusted_plan(cfg)?;
    let book = build_trusted_codebook(cfg)?;
    let src_sizes = cfg.source.sizes().to_vec();
    let flat_len: usize = src_sizes.iter().product();
    let total = enumeration_total(flat_len, cfg.n, cfg.enum_cap)?;
    let probs = cfg.source.probs();

    let mut engine = TrustedEngine::new(&p, &book);
    let mut tally = Tally::default();
    let mut trials_run: u64 = 0;

    let n = cfg.n;
    let mut xn = vec![0u16; n];
    let mut yn = vec![0u16; n];
    let mut sym = vec![0u16; 2];
    for id in 0..total {
        let mut rem = id;
        let mut prob = 1.0f64;
        let mut steps = vec![0usize; n];
        for t in (0..n).rev() {
            let f = (rem % flat_len as u64) as usize;
            rem /= flat_len as u64;
            steps[t] = f;
            prob *= probs[f];
        }
        if prob == 0.0 {
            continue;
        }
        for (t, &f) in steps.iter().enumerate() {
            split_symbol(f, &src_sizes, &mut sym);
            xn[t] = sym[0];
            yn[t] = sym[1];
        }
        let rec = engine.trial(&xn, &yn)?;
        tally.add_trusted(&rec, prob);
        trials_run += 1;
    }
    tally.normalize();

    let nf = n as f64;
    Ok(SimReport {
        mode: cfg.mode,
        n,
        eps: cfg.eps,
        slack: cfg.slack,
        seed: cfg.master_seed,
        trials_run,
        rb: None,
        rk1: None,
        rk2: None,
        rkz: None,
        agreement_rate: tally.agreement_rate(),
        encoding_failure_rate: tally.enc_fail,
        decoding_failure_rate: tally.unres + tally.wrong,
        total_error_rate: 1.0 - tally.agree,
        empirical_key_entropy_rate: entropy_bits(tally.key_hist.values()) / nf,
        leakage_rate: Some(mi_bits(&tally.bc) / nf),
        leakage_se: None,
        broadcast_leakage_rate: None,
        partial_key_mi: None,
    })
}
