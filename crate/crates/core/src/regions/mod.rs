//! Achievable-rate and key-rate evaluation for relay-aided key agreement.
//!
//! Four settings share one shape: pick test channels, extend the source,
//! read off communication rates and a key rate as exact mutual informations.
//! - untrusted relay, product auxiliaries (inner bound, with the joint-MI
//!   cross-check form);
//! - untrusted relay, arbitrary joint auxiliaries (outer bound — evaluated
//!   pointwise only, it is loose and there is nothing to optimize);
//! - untrusted relay with a common component Z both users see;
//! - trusted relay that observes the sources directly.
//!
//! Key rates are clamped at zero for reporting; the raw pre-clamp values
//! stay available because a negative raw value is itself informative (the
//! chosen channels are simply useless, not invalid).

use crate::err::{Error, Result};
use crate::prob::{CondChannel, FiniteJoint};

mod opt;
pub use opt::{
    max_key_rate_common, max_key_rate_inner, max_key_rate_trusted, OptOutcome, OptimizerConfig,
    RateCaps, TrustedOptOutcome,
};

/// One operating point: per-user description rates, the broadcast rate, and
/// the secret-key rate. All in bits per source symbol, all nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
    pub rc: f64,
    pub rk: f64,
}

/// A bound evaluated at concrete channels: clamped rates plus the raw key
/// rate and its algebraic cross-check form (equal to `rk_raw` for bounds
/// that only have one form).
#[derive(Debug, Clone, Copy)]
pub struct BoundPoint {
    pub rates: RatePoint,
    /// Key rate before the clamp at zero.
    pub rk_raw: f64,
    /// The equivalent joint-MI form of the key rate (raw). For the inner
    /// bound the two forms agree within numerics whenever the auxiliaries
    /// are conditionally independent given their own sources.
    pub rk_cross: f64,
}

/// A trusted-relay operating point: broadcast rate and key rate.
#[derive(Debug, Clone, Copy)]
pub struct TrustedBoundPoint {
    pub rc: f64,
    pub rk: f64,
    pub rk_raw: f64,
    /// Second algebraic form where one exists (reduced evaluation), else
    /// equal to `rk_raw`.
    pub rk_cross: f64,
}

fn clamp_point(r1: f64, r2: f64, rk_raw: f64, rk_cross: f64) -> BoundPoint {
    let r1c = r1.max(0.0);
    let r2c = r2.max(0.0);
    BoundPoint {
        rates: RatePoint { r1: r1c, r2: r2c, rc: r1c.max(r2c), rk: rk_raw.max(0.0) },
        rk_raw,
        rk_cross,
    }
}

fn check_cardinality(ch: &CondChannel, limit: usize) -> Result<()> {
    let size = ch.out_len();
    if size > limit {
        return Err(Error::CardinalityExceeded { size, limit });
    }
    Ok(())
}

/// Evaluate the product-auxiliary inner bound at (`ch1`, `ch2`).
///
/// Auxiliary alphabets are capped at source size + 1; larger ones cannot
/// improve the region and are rejected. `rk_cross` carries the joint-MI
/// form of the key rate for cross-checking.
pub fn inner_point(
    source: &FiniteJoint,
    ch1: &CondChannel,
    ch2: &CondChannel,
) -> Result<BoundPoint> {
    if source.num_vars() != 2 {
        return Err(Error::ShapeMismatch(alloc::string::String::from(
            "inner bound needs a two-variable source",
        )));
    }
    check_cardinality(ch1, source.sizes()[0] + 1)?;
    check_cardinality(ch2, source.sizes()[1] + 1)?;
    let ext = source.extend_markov(ch1, ch2)?; // variables (X, Y, U1, U2)
    let r1 = ext.mutual_information(&[0], &[2], &[1])?;
    let r2 = ext.mutual_information(&[1], &[3], &[0])?;
    let rk_raw = ext.mutual_information(&[1], &[2], &[])?
        + ext.mutual_information(&[0], &[3], &[])?
        - ext.mutual_information(&[2], &[3], &[])?;
    let rk_cross = ext.mutual_information(&[0, 1], &[2, 3], &[])? - r1 - r2;
    Ok(clamp_point(r1, r2, rk_raw, rk_cross))
}

/// Evaluate the outer bound at one joint auxiliary channel ((u1,u2)|(x,y)).
///
/// The channel must declare two output variables. No cardinality bound
/// applies — the feasible set is unconstrained, which is exactly why this
/// bound is loose and only evaluated pointwise.
pub fn outer_point(source: &FiniteJoint, ch: &CondChannel) -> Result<BoundPoint> {
    if ch.out_sizes().len() != 2 {
        return Err(Error::ShapeMismatch(alloc::string::String::from(
            "outer bound needs a channel with two output variables",
        )));
    }
    let ext = source.extend_general(ch)?; // (X, Y, U1, U2)
    let r1 = ext.mutual_information(&[0], &[2], &[1])?;
    let r2 = ext.mutual_information(&[1], &[3], &[0])?;
    let rk_raw = ext.mutual_information(&[0, 1], &[2, 3], &[])? - r1 - r2;
    Ok(clamp_point(r1, r2, rk_raw, rk_raw))
}

/// Evaluate the common-component inner bound at channels that may consult
/// the shared variable Z: source p(x,y,z), ch1 = (u1|x,z), ch2 = (u2|y,z).
///
/// Auxiliary alphabets are capped at |X||Z|+2 and |Y||Z|+2. With constant
/// channels the key rate is exactly H(Z); with |Z| = 1 this reduces to
/// [`inner_point`].
pub fn common_inner_point(
    source: &FiniteJoint,
    ch1: &CondChannel,
    ch2: &CondChannel,
) -> Result<BoundPoint> {
    if source.num_vars() != 3 {
        return Err(Error::ShapeMismatch(alloc::string::String::from(
            "common-component bound needs a three-variable source",
        )));
    }
    let (sx, sy, sz) = (source.sizes()[0], source.sizes()[1], source.sizes()[2]);
    check_cardinality(ch1, sx * sz + 2)?;
    check_cardinality(ch2, sy * sz + 2)?;
    let ext = source.extend_markov_common(ch1, ch2)?; // (X, Y, Z, U1, U2)
    let r1 = ext.mutual_information(&[0], &[3], &[1, 2])?;
    let r2 = ext.mutual_information(&[1], &[4], &[0, 2])?;
    let h_z_given_aux = ext.entropy(&[2, 3, 4])? - ext.entropy(&[3, 4])?;
    let rk_raw = ext.mutual_information(&[1, 2], &[3], &[])?
        + ext.mutual_information(&[0, 2], &[4], &[])?
        - ext.mutual_information(&[3], &[4], &[])?
        + h_z_given_aux;
    Ok(clamp_point(r1, r2, rk_raw, rk_raw))
}

/// Evaluate the trusted-relay bound at one relay observation channel
/// (v|x,y). The relay is honest, so only the broadcast leaks: the key rate
/// is min(I(X;V), I(Y;V)) against a broadcast rate of
/// max(I(X;V|Y), I(Y;V|X)). |V| is capped at |X||Y|+2.
pub fn trusted_point(source: &FiniteJoint, ch: &CondChannel) -> Result<TrustedBoundPoint> {
    if ch.out_sizes().len() != 1 {
        return Err(Error::ShapeMismatch(alloc::string::String::from(
            "trusted bound needs a single-output-variable channel",
        )));
    }
    let (sx, sy) = (source.sizes()[0], source.sizes()[1]);
    check_cardinality(ch, sx * sy + 2)?;
    let ext = source.extend_general(ch)?; // (X, Y, V)
    let rc = ext
        .mutual_information(&[0], &[2], &[1])?
        .max(ext.mutual_information(&[1], &[2], &[0])?);
    let rk_raw = ext
        .mutual_information(&[0], &[2], &[])?
        .min(ext.mutual_information(&[1], &[2], &[])?);
    Ok(TrustedBoundPoint { rc: rc.max(0.0), rk: rk_raw.max(0.0), rk_raw, rk_cross: rk_raw })
}

/// Trusted-relay evaluation restricted to product auxiliaries, treating the
/// pair (U1, U2) as the relay's observation. The key rate has two equal
/// algebraic forms; they are computed independently and must agree within
/// 1e-10 or the evaluation reports numerical breakdown.
pub fn trusted_reduced_inner_point(
    source: &FiniteJoint,
    ch1: &CondChannel,
    ch2: &CondChannel,
) -> Result<TrustedBoundPoint> {
    let ext = source.extend_markov(ch1, ch2)?; // (X, Y, U1, U2)
    let c1 = ext.mutual_information(&[0], &[2, 3], &[1])?;
    let c2 = ext.mutual_information(&[1], &[2, 3], &[0])?;
    let rk_a = ext.mutual_information(&[0], &[2, 3], &[])? - c1;
    let rk_b = ext.mutual_information(&[1], &[2, 3], &[])? - c2;
    if (rk_a - rk_b).abs() > 1e-10 {
        return Err(Error::DomainError(alloc::format!(
            "key-rate forms disagree: {rk_a} vs {rk_b}"
        )));
    }
    Ok(TrustedBoundPoint { rc: c1.max(c2).max(0.0), rk: rk_a.max(0.0), rk_raw: rk_a, rk_cross: rk_b })
}
