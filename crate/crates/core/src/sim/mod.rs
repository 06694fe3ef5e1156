//! Finite-blocklength realization of the relay key-generation schemes.
//!
//! The pipeline follows the achievability construction literally at desk
//! scale: random codebooks indexed by split integer indices, robust-typicality
//! covering at the encoders, the relay's modular-sum broadcast, unique-typical
//! packing at the decoders, and key assembly from the never-transmitted index
//! parts. Measurement comes in two flavors: Monte Carlo over seeded i.i.d.
//! source draws, and exact exhaustive enumeration of every source sequence
//! with its probability, which turns agreement, key entropy, and leakage into
//! exact finite sums.
//!
//! Everything is a deterministic function of the configuration, including its
//! master seed: codebooks, the common-randomness partition, trial draws, and
//! all reported statistics.

mod book;
mod exact;
mod mc;
mod pipeline;
mod typ;

pub use book::{build_codebook, build_trusted_codebook, Codebook, TrustedCodebook};
pub use exact::{exact_analysis, trusted_exact};
pub use mc::run_monte_carlo;
pub use pipeline::{
    build_z_partition, decode_user, encode_user, recover_other_b, relay_map, DecodeOutcome, User,
    ZPartition,
};
pub use typ::is_typical;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::err::{Error, Result};
use crate::math;
use crate::prob::{CondChannel, FiniteJoint};

/// Which relay model the run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Oblivious relay: users send index pairs, the relay broadcasts their
    /// network-coded combination, leakage is measured against everything the
    /// relay sees.
    Untrusted,
    /// The relay observes both sources, covers them with a single codeword,
    /// and broadcasts a bin index; leakage is measured against that broadcast.
    Trusted,
    /// Untrusted pipeline plus a shared component Z seen by both users,
    /// whose binned value joins the key.
    Common,
}

pub const DEFAULT_EPS: f64 = 0.2;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_CODEBOOK_CAP: u64 = 200_000;
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Full description of a simulation run. Construct with one of the
/// mode-specific constructors, adjust public fields, then hand to
/// [`run_monte_carlo`], [`exact_analysis`], or [`trusted_exact`].
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub mode: SimMode,
    /// Blocklength (sequence length), at least 1.
    pub n: usize,
    /// Source law: two variables (X, Y), or three (X, Y, Z) in common mode.
    pub source: FiniteJoint,
    /// User 1's test channel (untrusted/common), or the relay's observation
    /// channel on (x, y) in trusted mode.
    pub ch1: CondChannel,
    /// User 2's test channel; unused in trusted mode.
    pub ch2: CondChannel,
    /// Multiplicative typicality tolerance; must be positive.
    pub eps: f64,
    /// Rate slack applied in the index-space exponents exactly where the
    /// construction places it. May be negative for stress tests.
    pub slack: f64,
    /// Shared-index rate; defaults to the smaller conditional description
    /// rate min{I(X;U1|Y), I(Y;U2|X)} (side information includes Z in common
    /// mode).
    pub rb: Option<f64>,
    /// Per-user key rates; defaults to an equal split of the achievable
    /// total, clamped at zero.
    pub key_split: Option<(f64, f64)>,
    /// Common-component key rate (common mode only); defaults to
    /// H(Z|U1,U2) − 2·slack, clamped at zero.
    pub rkz: Option<f64>,
    /// Monte Carlo trial count, at least 1.
    pub trials: u64,
    /// Master seed; every random object derives from it through fixed
    /// stream tags.
    pub master_seed: u64,
    /// Upper bound on total stored codewords across both books.
    pub codebook_cap: u64,
    /// Upper bound on exhaustively enumerated sequence tuples (also bounds
    /// the materialized Z-partition in common mode).
    pub enum_cap: u64,
}

impl SimConfig {
    fn base(mode: SimMode, n: usize, source: FiniteJoint, ch1: CondChannel, ch2: CondChannel) -> Self {
        SimConfig {
            mode,
            n,
            source,
            ch1,
            ch2,
            eps: DEFAULT_EPS,
            slack: 0.0,
            rb: None,
            key_split: None,
            rkz: None,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            codebook_cap: DEFAULT_CODEBOOK_CAP,
            enum_cap: DEFAULT_ENUM_CAP,
        }
    }

    /// Untrusted relay: `source` over (X, Y), test channels X→U1 and Y→U2.
    pub fn untrusted(n: usize, source: FiniteJoint, ch1: CondChannel, ch2: CondChannel) -> Self {
        Self::base(SimMode::Untrusted, n, source, ch1, ch2)
    }

    /// Common-component mode: `source` over (X, Y, Z), channels (X,Z)→U1 and
    /// (Y,Z)→U2.
    pub fn common(n: usize, source: FiniteJoint, ch1: CondChannel, ch2: CondChannel) -> Self {
        Self::base(SimMode::Common, n, source, ch1, ch2)
    }

    /// Trusted relay: `source` over (X, Y), relay observation channel
    /// (X,Y)→V. The unused second channel slot is filled with a placeholder.
    pub fn trusted(n: usize, source: FiniteJoint, relay_ch: CondChannel) -> Self {
        let placeholder = CondChannel::constant(alloc::vec![1], 1);
        Self::base(SimMode::Trusted, n, source, relay_ch, placeholder)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::ConfigInvalid(String::from("blocklength n must be at least 1")));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::ConfigInvalid(format!("eps = {} must be positive", self.eps)));
        }
        if !self.slack.is_finite() {
            return Err(Error::ConfigInvalid(format!("slack = {} must be finite", self.slack)));
        }
        if self.trials < 1 {
            return Err(Error::ConfigInvalid(String::from("trials must be at least 1")));
        }
        for (name, v) in [("rb", self.rb), ("rkz", self.rkz)] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::ConfigInvalid(format!(
                        "{name} = {v} must be a nonnegative finite rate"
                    )));
                }
            }
        }
        if let Some((a, b)) = self.key_split {
            if ![a, b].iter().all(|v| v.is_finite() && *v >= 0.0) {
                return Err(Error::ConfigInvalid(format!(
                    "key_split components must be nonnegative finite rates, got ({a}, {b})"
                )));
            }
        }
        let src = self.source.sizes();
        match self.mode {
            SimMode::Untrusted | SimMode::Common => {
                let want_vars = if self.mode == SimMode::Untrusted { 2 } else { 3 };
                if self.source.num_vars() != want_vars {
                    return Err(Error::ShapeMismatch(format!(
                        "mode needs a {want_vars}-variable source, got {}",
                        self.source.num_vars()
                    )));
                }
                let (in1, in2): (Vec<usize>, Vec<usize>) = if self.mode == SimMode::Untrusted {
                    (alloc::vec![src[0]], alloc::vec![src[1]])
                } else {
                    (alloc::vec![src[0], src[2]], alloc::vec![src[1], src[2]])
                };
                if self.ch1.in_sizes() != in1.as_slice() || self.ch1.out_sizes().len() != 1 {
                    return Err(Error::ShapeMismatch(format!(
                        "user-1 channel must read {in1:?} and emit one variable"
                    )));
                }
                if self.ch2.in_sizes() != in2.as_slice() || self.ch2.out_sizes().len() != 1 {
                    return Err(Error::ShapeMismatch(format!(
                        "user-2 channel must read {in2:?} and emit one variable"
                    )));
                }
                if self.mode == SimMode::Untrusted && self.rkz.is_some() {
                    return Err(Error::ConfigInvalid(String::from(
                        "rkz applies to common mode only",
                    )));
                }
            }
            SimMode::Trusted => {
                if self.source.num_vars() != 2 {
                    return Err(Error::ShapeMismatch(format!(
                        "trusted mode needs a two-variable source, got {}",
                        self.source.num_vars()
                    )));
                }
                if self.ch1.in_sizes() != [src[0], src[1]] || self.ch1.out_sizes().len() != 1 {
                    return Err(Error::ShapeMismatch(String::from(
                        "relay channel must read (x, y) and emit one variable",
                    )));
                }
                if self.rb.is_some() || self.key_split.is_some() || self.rkz.is_some() {
                    return Err(Error::ConfigInvalid(String::from(
                        "rb/key_split/rkz do not apply to trusted mode",
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The eight index-space sizes, each ⌈2^{n·exponent}⌉ with a floor of 1.
/// The two `b` sizes are always equal (the relay's modular sum needs a
/// shared modulus).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSizes {
    pub s1a: u64,
    pub s1b: u64,
    pub s1k: u64,
    pub s1p: u64,
    pub s2a: u64,
    pub s2b: u64,
    pub s2k: u64,
    pub s2p: u64,
}

impl IndexSizes {
    pub fn book1_entries(&self) -> u128 {
        self.s1a as u128 * self.s1b as u128 * self.s1k as u128 * self.s1p as u128
    }

    pub fn book2_entries(&self) -> u128 {
        self.s2a as u128 * self.s2b as u128 * self.s2k as u128 * self.s2p as u128
    }

    pub(crate) fn flat1(&self, w: [u64; 4]) -> u64 {
        ((w[0] * self.s1b + w[1]) * self.s1k + w[2]) * self.s1p + w[3]
    }

    pub(crate) fn flat2(&self, w: [u64; 4]) -> u64 {
        ((w[0] * self.s2b + w[1]) * self.s2k + w[2]) * self.s2p + w[3]
    }
}

/// Size of one index space: ⌈2^{n·exponent}⌉, floored at 1. Nonpositive
/// exponents collapse the space to a single index.
fn index_size(n: usize, exponent: f64) -> u64 {
    if exponent <= 0.0 {
        return 1;
    }
    let raw = math::exp2(n as f64 * exponent);
    if raw >= 9.0e18 {
        return u64::MAX; // let the codebook cap reject it with a real error
    }
    let c = math::ceil(raw) as u64;
    c.max(1)
}

/// Resolved run plan for the untrusted and common modes: all rates made
/// concrete, index spaces sized, and the typicality joints precomputed.
#[derive(Debug, Clone)]
pub struct SimPlan {
    pub mode: SimMode,
    pub n: usize,
    pub eps: f64,
    pub slack: f64,
    /// Resolved shared-index rate.
    pub rb: f64,
    /// Resolved per-user key rates.
    pub rk1: f64,
    pub rk2: f64,
    /// Resolved common-component key rate (common mode only).
    pub rkz: Option<f64>,
    /// Number of Z-partition bins (1 outside common mode).
    pub zbins: u64,
    pub sizes: IndexSizes,
    /// Covering joints: what each encoder matches against.
    pub(crate) enc1: FiniteJoint,
    pub(crate) enc2: FiniteJoint,
    /// Packing joints: what each decoder matches against.
    pub(crate) dec1: FiniteJoint,
    pub(crate) dec2: FiniteJoint,
    /// Codeword symbol laws.
    pub(crate) pmf_u1: Vec<f64>,
    pub(crate) pmf_u2: Vec<f64>,
}

impl SimPlan {
    /// Flattened key value: ((w1k·s2k + w2k)·zbins + kz).
    pub(crate) fn key_flat(&self, w1k: u64, w2k: u64, kz: u64) -> u64 {
        (w1k * self.sizes.s2k + w2k) * self.zbins + kz
    }

    /// Size of the key alphabet.
    pub fn key_space(&self) -> u128 {
        self.sizes.s1k as u128 * self.sizes.s2k as u128 * self.zbins as u128
    }

    /// Sizes of the two transmitted-index alphabets (wa, wb) per user.
    pub fn uplink_spaces(&self) -> (u128, u128) {
        (
            self.sizes.s1a as u128 * self.sizes.s1b as u128,
            self.sizes.s2a as u128 * self.sizes.s2b as u128,
        )
    }
}

/// Resolve a configuration into codebook exponents, index sizes, and
/// typicality joints. Trusted mode has its own planner, [`trusted_plan`].
pub fn plan(cfg: &SimConfig) -> Result<SimPlan> {
    cfg.validate()?;
    let slack = cfg.slack;
    let (ext, c1, c2, g1, g2, icross, hz_cond) = match cfg.mode {
        SimMode::Untrusted => {
            let ext = cfg.source.extend_markov(&cfg.ch1, &cfg.ch2)?;
            let c1 = ext.mutual_information(&[0], &[2], &[1])?;
            let c2 = ext.mutual_information(&[1], &[3], &[0])?;
            let g1 = ext.mutual_information(&[1], &[2], &[])?;
            let g2 = ext.mutual_information(&[0], &[3], &[])?;
            let icross = ext.mutual_information(&[2], &[3], &[])?;
            (ext, c1, c2, g1, g2, icross, None)
        }
        SimMode::Common => {
            let ext = cfg.source.extend_markov_common(&cfg.ch1, &cfg.ch2)?;
            let c1 = ext.mutual_information(&[0], &[3], &[1, 2])?;
            let c2 = ext.mutual_information(&[1], &[4], &[0, 2])?;
            let g1 = ext.mutual_information(&[1, 2], &[3], &[])?;
            let g2 = ext.mutual_information(&[0, 2], &[4], &[])?;
            let icross = ext.mutual_information(&[3], &[4], &[])?;
            let hz = ext.entropy(&[2, 3, 4])? - ext.entropy(&[3, 4])?;
            (ext, c1, c2, g1, g2, icross, Some(hz))
        }
        SimMode::Trusted => {
            return Err(Error::ConfigInvalid(String::from(
                "trusted mode is planned by trusted_plan",
            )))
        }
    };

    let rb = cfg.rb.unwrap_or_else(|| c1.min(c2).max(0.0));
    let (rk1, rk2) = cfg.key_split.unwrap_or_else(|| {
        let total = (g1 + g2 - icross - slack).max(0.0);
        (total / 2.0, total / 2.0)
    });
    let rkz = match (cfg.mode, cfg.rkz) {
        (SimMode::Common, Some(r)) => Some(r),
        (SimMode::Common, None) => Some((hz_cond.unwrap_or(0.0) - 2.0 * slack).max(0.0)),
        _ => None,
    };
    let zbins = match rkz {
        None => 1u64,
        Some(r) => {
            let k = math::ceil(cfg.n as f64 * r);
            if k >= 63.0 {
                return Err(Error::ConfigInvalid(format!(
                    "z-partition needs 2^{k} bins, beyond the supported range"
                )));
            }
            1u64 << (k as u32)
        }
    };

    let n = cfg.n;
    let sizes = IndexSizes {
        s1a: index_size(n, c1 - rb + 2.0 * slack),
        s1b: index_size(n, rb),
        s1k: index_size(n, rk1),
        s1p: index_size(n, g1 - rk1 - slack),
        s2a: index_size(n, c2 - rb + 2.0 * slack),
        s2b: index_size(n, rb),
        s2k: index_size(n, rk2),
        s2p: index_size(n, g2 - rk2 - slack),
    };
    let needed = sizes.book1_entries() + sizes.book2_entries();
    if needed > cfg.codebook_cap as u128 {
        return Err(Error::MemoryCapExceeded { needed, cap: cfg.codebook_cap });
    }
    let key_span = sizes.s1k as u128 * sizes.s2k as u128 * zbins as u128;
    if key_span > u64::MAX as u128 {
        return Err(Error::ConfigInvalid(String::from(
            "key alphabet exceeds the representable index range",
        )));
    }

    let (enc1, enc2, dec1, dec2, u1_var, u2_var) = match cfg.mode {
        SimMode::Untrusted => (
            ext.marginal(&[0, 2])?,
            ext.marginal(&[1, 3])?,
            ext.marginal(&[0, 2, 3])?,
            ext.marginal(&[1, 3, 2])?,
            2usize,
            3usize,
        ),
        SimMode::Common => (
            ext.marginal(&[0, 2, 3])?,
            ext.marginal(&[1, 2, 4])?,
            ext.marginal(&[0, 2, 3, 4])?,
            ext.marginal(&[1, 2, 4, 3])?,
            3usize,
            4usize,
        ),
        SimMode::Trusted => unreachable!(),
    };
    let su1 = ext.sizes()[u1_var];
    let su2 = ext.sizes()[u2_var];
    if su1 > u16::MAX as usize + 1 || su2 > u16::MAX as usize + 1 {
        return Err(Error::ConfigInvalid(String::from(
            "codeword alphabets beyond 16-bit symbols are not supported",
        )));
    }
    let pmf_u1 = ext.marginal(&[u1_var])?.probs().to_vec();
    let pmf_u2 = ext.marginal(&[u2_var])?.probs().to_vec();

    Ok(SimPlan {
        mode: cfg.mode,
        n,
        eps: cfg.eps,
        slack,
        rb,
        rk1,
        rk2,
        rkz,
        zbins,
        sizes,
        enc1,
        enc2,
        dec1,
        dec2,
        pmf_u1,
        pmf_u2,
    })
}

/// Resolved plan for the trusted-relay pipeline: covering-index and key-index
/// space sizes plus the typicality joints.
#[derive(Debug, Clone)]
pub struct TrustedPlan {
    pub n: usize,
    pub eps: f64,
    pub slack: f64,
    /// Exponent of the broadcast space: max{I(X;V|Y), I(Y;V|X)} + 2·slack.
    pub rate_wc: f64,
    /// Exponent of the key space: min{I(X;V), I(Y;V)} − slack.
    pub rate_wp: f64,
    pub swc: u64,
    pub swp: u64,
    /// Covering joint (X, Y, V).
    pub(crate) cover: FiniteJoint,
    /// Packing joints (X, V) and (Y, V).
    pub(crate) dec1: FiniteJoint,
    pub(crate) dec2: FiniteJoint,
    pub(crate) pmf_v: Vec<f64>,
}

pub fn trusted_plan(cfg: &SimConfig) -> Result<TrustedPlan> {
    cfg.validate()?;
    if cfg.mode != SimMode::Trusted {
        return Err(Error::ConfigInvalid(String::from("trusted_plan needs trusted mode")));
    }
    let ext = cfg.source.extend_general(&cfg.ch1)?;
    let cxy = ext.mutual_information(&[0], &[2], &[1])?;
    let cyx = ext.mutual_information(&[1], &[2], &[0])?;
    let ix = ext.mutual_information(&[0], &[2], &[])?;
    let iy = ext.mutual_information(&[1], &[2], &[])?;
    let rate_wc = cxy.max(cyx) + 2.0 * cfg.slack;
    let rate_wp = ix.min(iy) - cfg.slack;
    let swc = index_size(cfg.n, rate_wc);
    let swp = index_size(cfg.n, rate_wp);
    let needed = swc as u128 * swp as u128;
    if needed > cfg.codebook_cap as u128 {
        return Err(Error::MemoryCapExceeded { needed, cap: cfg.codebook_cap });
    }
    let sv = ext.sizes()[2];
    if sv > u16::MAX as usize + 1 {
        return Err(Error::ConfigInvalid(String::from(
            "codeword alphabets beyond 16-bit symbols are not supported",
        )));
    }
    let dec1 = ext.marginal(&[0, 2])?;
    let dec2 = ext.marginal(&[1, 2])?;
    let pmf_v = ext.marginal(&[2])?.probs().to_vec();
    Ok(TrustedPlan {
        n: cfg.n,
        eps: cfg.eps,
        slack: cfg.slack,
        rate_wc,
        rate_wp,
        swc,
        swp,
        cover: ext,
        dec1,
        dec2,
        pmf_v,
    })
}

/// Measured outcome of a run. Produced by both the Monte Carlo and the exact
/// engines; `None` marks quantities that a given engine does not provide
/// (for example leakage when the outcome space exceeds the plug-in gate, or
/// the per-user key split outside the untrusted/common pipelines).
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub mode: SimMode,
    pub n: usize,
    pub eps: f64,
    pub slack: f64,
    pub seed: u64,
    /// Monte Carlo: trials executed. Exact: number of positive-probability
    /// sequence tuples enumerated.
    pub trials_run: u64,
    pub rb: Option<f64>,
    pub rk1: Option<f64>,
    pub rk2: Option<f64>,
    pub rkz: Option<f64>,
    /// P(K1 = K2) among trials where both users formed keys from decoded
    /// indices; vacuously 1 if no trial formed keys.
    pub agreement_rate: f64,
    /// Fraction of trials where a covering step found no typical codeword.
    pub encoding_failure_rate: f64,
    /// Fraction of trials where decoding returned nothing, was ambiguous, or
    /// recovered wrong indices.
    pub decoding_failure_rate: f64,
    /// Fraction of trials that did not end with correctly formed equal keys.
    pub total_error_rate: f64,
    /// Plug-in (or exact) H(K1)/n in bits per symbol.
    pub empirical_key_entropy_rate: f64,
    /// I(K1,K2; relay observations)/n: uplink indices in untrusted/common
    /// mode, the broadcast in trusted mode.
    pub leakage_rate: Option<f64>,
    /// Delta-method standard error of the Monte Carlo leakage estimate.
    pub leakage_se: Option<f64>,
    /// I(K1,K2; broadcast)/n under the untrusted/common pipeline — the
    /// weaker quantity a trusted relay would be held to.
    pub broadcast_leakage_rate: Option<f64>,
    /// I(W1k; W2k)/n between the two key halves.
    pub partial_key_mi: Option<f64>,
}

// ---------------------------------------------------------------------------
// Shared plug-in statistics over discrete laws.
// ---------------------------------------------------------------------------

pub(crate) mod stats {
    use super::BTreeMap;
    use crate::math::{log2, neg_xlog2x, sqrt};

    pub(crate) fn entropy_bits<'a, I: Iterator<Item = &'a f64>>(probs: I) -> f64 {
        probs.map(|&p| neg_xlog2x(p)).sum()
    }

    /// Plug-in mutual information of a sampled joint law together with its
    /// delta-method standard error: the estimator is the sample mean of
    /// g = log2(p(a,b)/(p(a)p(b))), so its variance is Var(g)/trials.
    pub(crate) fn mi_se_bits<A: Ord + Copy, B: Ord + Copy>(
        joint: &BTreeMap<(A, B), f64>,
        trials: u64,
    ) -> (f64, f64) {
        let mut pa: BTreeMap<A, f64> = BTreeMap::new();
        let mut pb: BTreeMap<B, f64> = BTreeMap::new();
        for (&(a, b), &p) in joint {
            *pa.entry(a).or_insert(0.0) += p;
            *pb.entry(b).or_insert(0.0) += p;
        }
        let mut mean = 0.0;
        let mut second = 0.0;
        for (&(a, b), &p) in joint {
            if p > 0.0 {
                let g = log2(p / (pa[&a] * pb[&b]));
                mean += p * g;
                second += p * g * g;
            }
        }
        let var = (second - mean * mean).max(0.0);
        (mean.max(0.0), sqrt(var / trials as f64))
    }

    /// Mutual information in bits of a joint law keyed by (a, b), computed
    /// as H(A) + H(B) − H(A,B) and clamped at zero.
    pub(crate) fn mi_bits<A: Ord + Copy, B: Ord + Copy>(joint: &BTreeMap<(A, B), f64>) -> f64 {
        let mut pa: BTreeMap<A, f64> = BTreeMap::new();
        let mut pb: BTreeMap<B, f64> = BTreeMap::new();
        for (&(a, b), &p) in joint {
            *pa.entry(a).or_insert(0.0) += p;
            *pb.entry(b).or_insert(0.0) += p;
        }
        let h = entropy_bits(pa.values()) + entropy_bits(pb.values())
            - entropy_bits(joint.values());
        h.max(0.0)
    }
}
