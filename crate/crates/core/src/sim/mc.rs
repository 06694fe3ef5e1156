//! Monte Carlo driver: i.i.d. source draws per trial, each trial on its own
//! derived random stream so runs are reproducible and insensitive to trial
//! count changes (trial t always sees the same draws).

use alloc::vec;

use crate::err::Result;
use crate::rng::{rng_for, CdfSampler, STREAM_TRIAL_BASE};

use super::book::{build_codebook, build_trusted_codebook};
use super::pipeline::{build_z_partition, split_symbol, Engine, Tally, TrustedEngine};
use super::stats::{entropy_bits, mi_bits, mi_se_bits};
use super::{plan, trusted_plan, SimConfig, SimMode, SimReport};

/// Support-size ceiling for plug-in information estimates on sampled data:
/// past this the histogram bias swamps the estimate, so the report carries
/// `None` instead of a misleading number.
const PLUGIN_GATE: u128 = 1_000_000;

/// Simulate the configured scheme over `cfg.trials` seeded i.i.d. trials.
///
/// Dispatches on the mode; the report mirrors [`super::exact_analysis`] /
/// [`super::trusted_exact`] except that information quantities are plug-in
/// estimates (with a delta-method standard error for the leakage) and are
/// gated off when their outcome spaces are too large to estimate honestly.
pub fn run_monte_carlo(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    match cfg.mode {
        SimMode::Trusted => mc_trusted(cfg),
        _ => mc_relay(cfg),
    }
}

fn mc_relay(cfg: &SimConfig) -> Result<SimReport> {
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
    let sampler = CdfSampler::new(cfg.source.probs());

    let mut engine = Engine::new(&p, &book, zpart.as_ref());
    let mut tally = Tally::default();
    let n = cfg.n;
    let mut xn = vec![0u16; n];
    let mut yn = vec![0u16; n];
    let mut zn = vec![0u16; n];
    let mut sym = vec![0u16; src_sizes.len()];
    for t in 0..cfg.trials {
        let mut rng = rng_for(cfg.master_seed, STREAM_TRIAL_BASE + t);
        for i in 0..n {
            let flat = sampler.sample(&mut rng);
            split_symbol(flat, &src_sizes, &mut sym);
            xn[i] = sym[0];
            yn[i] = sym[1];
            if src_sizes.len() == 3 {
                zn[i] = sym[2];
            }
        }
        let z_opt: Option<&[u16]> =
            if cfg.mode == SimMode::Common { Some(&zn) } else { None };
        let rec = engine.trial(&xn, &yn, z_opt)?;
        tally.add(&rec, 1.0);
    }
    tally.normalize();

    let ks = p.key_space();
    let (up1, up2) = p.uplink_spaces();
    let s = &p.sizes;
    let wc_space = s.s1a as u128 * s.s1b as u128 * s.s2a as u128;
    let kpair_space = ks.saturating_mul(ks);
    let leak_ok = kpair_space.saturating_mul(up1).saturating_mul(up2) <= PLUGIN_GATE;
    let bc_ok = kpair_space.saturating_mul(wc_space) <= PLUGIN_GATE;
    let partial_ok = (s.s1k as u128 * s.s2k as u128) <= PLUGIN_GATE;

    let nf = n as f64;
    let (leakage_rate, leakage_se) = if leak_ok {
        let (mi, se) = mi_se_bits(&tally.leak, cfg.trials);
        (Some(mi / nf), Some(se / nf))
    } else {
        (None, None)
    };
    Ok(SimReport {
        mode: cfg.mode,
        n,
        eps: cfg.eps,
        slack: cfg.slack,
        seed: cfg.master_seed,
        trials_run: cfg.trials,
        rb: Some(p.rb),
        rk1: Some(p.rk1),
        rk2: Some(p.rk2),
        rkz: p.rkz,
        agreement_rate: tally.agreement_rate(),
        encoding_failure_rate: tally.enc_fail,
        decoding_failure_rate: tally.unres + tally.wrong,
        total_error_rate: 1.0 - tally.agree,
        empirical_key_entropy_rate: entropy_bits(tally.key_hist.values()) / nf,
        leakage_rate,
        leakage_se,
        broadcast_leakage_rate: if bc_ok { Some(mi_bits(&tally.bc) / nf) } else { None },
        partial_key_mi: if partial_ok { Some(mi_bits(&tally.partial) / nf) } else { None },
    })
}

fn mc_trusted(cfg: &SimConfig) -> Result<SimReport> {
    let p = trusted_plan(cfg)?;
    let book = build_trusted_codebook(cfg)?;
    let src_sizes = cfg.source.sizes().to_vec();
    let sampler = CdfSampler::new(cfg.source.probs());

    let mut engine = TrustedEngine::new(&p, &book);
    let mut tally = Tally::default();
    let n = cfg.n;
    let mut xn = vec![0u16; n];
    let mut yn = vec![0u16; n];
    let mut sym = vec![0u16; 2];
    for t in 0..cfg.trials {
        let mut rng = rng_for(cfg.master_seed, STREAM_TRIAL_BASE + t);
        for i in 0..n {
            let flat = sampler.sample(&mut rng);
            split_symbol(flat, &src_sizes, &mut sym);
            xn[i] = sym[0];
            yn[i] = sym[1];
        }
        let rec = engine.trial(&xn, &yn)?;
        tally.add_trusted(&rec, 1.0);
    }
    tally.normalize();

    let leak_ok = (book.swp as u128)
        .saturating_mul(book.swp as u128)
        .saturating_mul(book.swc as u128)
        <= PLUGIN_GATE;
    let nf = n as f64;
    let (leakage_rate, leakage_se) = if leak_ok {
        let (mi, se) = mi_se_bits(&tally.bc, cfg.trials);
        (Some(mi / nf), Some(se / nf))
    } else {
        (None, None)
    };
    Ok(SimReport {
        mode: cfg.mode,
        n,
        eps: cfg.eps,
        slack: cfg.slack,
        seed: cfg.master_seed,
        trials_run: cfg.trials,
        rb: None,
        rk1: None,
        rk2: None,
        rkz: None,
        agreement_rate: tally.agreement_rate(),
        encoding_failure_rate: tally.enc_fail,
        decoding_failure_rate: tally.unres + tally.wrong,
        total_error_rate: 1.0 - tally.agree,
        empirical_key_entropy_rate: entropy_bits(tally.key_hist.values()) / nf,
        leakage_rate,
        leakage_se,
        broadcast_leakage_rate: None,
        partial_key_mi: None,
    })
}
