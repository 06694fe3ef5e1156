//! `selftest`: fast built-in consistency checks across every layer —
//! closed-form identities, algebraic cross-checks on randomized instances,
//! relay index recovery, and determinism of an exhaustive protocol run.
//!
//! One `ok NAME` line per passing check; a failing check prints
//! `FAIL NAME`, the run exits 1, and the diagnostic names the check.

use std::path::PathBuf;

use relaykey_core::gaussian::{
    comparison_sweep, gaussian_inner_point, max_key_rate_gaussian, noise_for_rates, GaussianParams,
    SweepMode,
};
use relaykey_core::prob::{dsbs, CondChannel, FiniteJoint};
use relaykey_core::regions::{common_inner_point, inner_point};
use relaykey_core::sim::{exact_analysis, recover_other_b, relay_map, SimConfig};

use crate::cli::SelftestArgs;
use crate::emit::deliver;
use crate::errors::CliError;
use crate::{kv, table};

pub fn run(a: SelftestArgs) -> Result<(), CliError> {
    let file = a.config.as_deref().map(kv::load).transpose()?;
    let mut r = kv::Resolver::new(file);
    let out: Option<PathBuf> = r.get("out", a.out)?;
    r.finish()?;

    let checks: &[(&str, fn() -> Result<(), String>)] = &[
        ("symmetric-source-identity-point", check_identity_point),
        ("key-rate-form-agreement", check_form_agreement),
        ("shared-bit-recovery", check_shared_bit),
        ("rate-noise-roundtrip", check_rate_noise_roundtrip),
        ("sweep-saturation", check_sweep_saturation),
        ("relay-sum-recovery", check_relay_recovery),
        ("exact-run-determinism", check_exact_determinism),
    ];

    let mut text = String::new();
    let mut failures: Vec<(&str, String)> = Vec::new();
    for (name, f) in checks {
        match f() {
            Ok(()) => text.push_str(&format!("ok {name}\n")),
            Err(why) => {
                text.push_str(&format!("FAIL {name}\n"));
                failures.push((name, why));
            }
        }
    }
    text.push_str(&format!("{} checks, {} failed\n", checks.len(), failures.len()));
    deliver(out.as_deref(), &text)?;

    if let Some((name, why)) = failures.first() {
        return Err(CliError::Compute(format!("check `{name}` failed: {why}")));
    }
    Ok(())
}

fn ensure(cond: bool, why: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why.to_string())
    }
}

/// Identity description channels on the symmetric binary pair source must
/// land exactly on the known corner of the region.
fn check_identity_point() -> Result<(), String> {
    let h = 0.4689955935892812; // binary entropy of 0.1
    let cap = 0.5310044064107188; // its complement
    let src = dsbs(0.1).map_err(|e| e.to_string())?;
    let id = CondChannel::identity(2);
    let p = inner_point(&src, &id, &id).map_err(|e| e.to_string())?;
    ensure((p.rates.r1 - h).abs() < 1e-10, "r1 off the corner")?;
    ensure((p.rates.r2 - h).abs() < 1e-10, "r2 off the corner")?;
    ensure((p.rates.rc - h).abs() < 1e-10, "rc off the corner")?;
    ensure((p.rates.rk - cap).abs() < 1e-10, "rk off the corner")?;
    ensure((p.rk_raw - p.rk_cross).abs() < 1e-10, "key-rate forms disagree")
}

/// Tiny deterministic value stream for building random test instances.
struct Mix(u64);

impl Mix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    fn pick(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_f64() * (hi - lo + 1) as f64) as usize % (hi - lo + 1)
    }

    fn pmf(&mut self, len: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..len).map(|_| self.next_f64() + 0.05).collect();
        let s: f64 = v.iter().sum();
        for x in &mut v {
            *x /= s;
        }
        v
    }
}

/// Both algebraic forms of the inner key rate agree, and the key rate
/// never exceeds the shared information of the pair.
fn check_form_agreement() -> Result<(), String> {
    for inst in 0..40u64 {
        let mut m = Mix(0x5EED_0001 + inst * 0x9E37_79B9);
        let sx = m.pick(2, 4);
        let sy = m.pick(2, 4);
        let src = FiniteJoint::new(vec![sx, sy], m.pmf(sx * sy)).map_err(|e| e.to_string())?;
        let mut rows1 = Vec::new();
        for _ in 0..sx {
            rows1.extend(m.pmf(sx + 1));
        }
        let mut rows2 = Vec::new();
        for _ in 0..sy {
            rows2.extend(m.pmf(sy + 1));
        }
        let ch1 = CondChannel::new(vec![sx], vec![sx + 1], rows1).map_err(|e| e.to_string())?;
        let ch2 = CondChannel::new(vec![sy], vec![sy + 1], rows2).map_err(|e| e.to_string())?;
        let p = inner_point(&src, &ch1, &ch2).map_err(|e| e.to_string())?;
        if (p.rk_raw - p.rk_cross).abs() > 1e-10 {
            return Err(format!("forms split by {} on instance {inst}", p.rk_raw - p.rk_cross));
        }
        let ixy = src.mutual_information(&[0], &[1], &[]).map_err(|e| e.to_string())?;
        if p.rates.rk > ixy + 1e-10 {
            return Err(format!("key rate above shared information on instance {inst}"));
        }
    }
    Ok(())
}

/// With channels that ignore their inputs, the shared hidden bit is worth
/// exactly one key bit — bit-for-bit, no tolerance.
fn check_shared_bit() -> Result<(), String> {
    let src = table::shared_bit_source(0.25).map_err(|e| e.to_string())?;
    let c = CondChannel::constant(vec![2, 2], 1);
    let p = common_inner_point(&src, &c, &c).map_err(|e| e.to_string())?;
    ensure(p.rates.rk == 1.0, "hidden-bit key rate is not exactly 1")
}

/// Quantizer noise chosen for target rates must reproduce those rates.
fn check_rate_noise_roundtrip() -> Result<(), String> {
    let nq1 = noise_for_rates(0.6, 0.6, 1.0).map_err(|e| e.to_string())?;
    let nq2 = noise_for_rates(0.6, 0.4, 1.0).map_err(|e| e.to_string())?;
    let p = gaussian_inner_point(&GaussianParams::new(0.6, nq1, nq2).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure((p.r1 - 0.6).abs() < 1e-9, "r1 does not round-trip")?;
    ensure((p.r2 - 0.4).abs() < 1e-9, "r2 does not round-trip")?;
    let rk = max_key_rate_gaussian(0.6, 0.6, 0.4, 1.0).map_err(|e| e.to_string())?;
    ensure((rk - 0.2538973200993481).abs() < 1e-12, "key rate drifted from its pinned value")
}

/// Tying both description rates to the broadcast cap grows the key rate
/// until the cap binds, then leaves it flat.
fn check_sweep_saturation() -> Result<(), String> {
    let rows = comparison_sweep(SweepMode::Beta, 0.6, 1.0, 21).map_err(|e| e.to_string())?;
    for w in rows[..11].windows(2) {
        if w[1].rk <= w[0].rk {
            return Err(format!("not increasing between beta {} and {}", w[0].x, w[1].x));
        }
    }
    for row in &rows[11..] {
        if (row.rk - rows[10].rk).abs() > 1e-12 {
            return Err(format!("not flat at beta {}", row.x));
        }
    }
    Ok(())
}

/// The broadcast combination must let each user recover the other's
/// binning index, for every index pair at every modulus up to 16.
fn check_relay_recovery() -> Result<(), String> {
    for rb in 1u64..=16 {
        for w1b in 0..rb {
            for w2b in 0..rb {
                let (a, sum, b) = relay_map(3, w1b, 5, w2b, rb).map_err(|e| e.to_string())?;
                let back2 = recover_other_b(sum, w1b, rb).map_err(|e| e.to_string())?;
                let back1 = recover_other_b(sum, w2b, rb).map_err(|e| e.to_string())?;
                if back2 != w2b || back1 != w1b || a != 3 || b != 5 {
                    return Err(format!("recovery failed at rb={rb}, pair ({w1b}, {w2b})"));
                }
            }
        }
    }
    Ok(())
}

/// Exhaustive analysis is a pure function of its configuration, and trials
/// that fail are never out-counted by the accounting identity: the total
/// error never exceeds encoding plus decoding failures.
fn check_exact_determinism() -> Result<(), String> {
    let src = dsbs(0.2).map_err(|e| e.to_string())?;
    let id = CondChannel::identity(2);
    let mut cfg = SimConfig::untrusted(3, src, id.clone(), id);
    cfg.eps = 1.8;
    cfg.master_seed = 11;
    let a = exact_analysis(&cfg).map_err(|e| e.to_string())?;
    let b = exact_analysis(&cfg).map_err(|e| e.to_string())?;
    ensure(a == b, "two identical runs disagreed")?;
    let slack = a.total_error_rate - a.encoding_failure_rate - a.decoding_failure_rate;
    ensure(slack <= 1e-12, "keys disagreed on a fully decoded trial")
}
