//! Secret-key generation for two users talking through a relay: exact
//! finite-alphabet information measures, achievable rate regions, Gaussian
//! closed forms, and a desk-scale finite-blocklength protocol simulator.
//!
//! Everything here is deterministic: all randomness flows from explicit
//! 64-bit seeds through counter-derived ChaCha streams, and all collection
//! iteration is order-stable, so identical inputs give bit-identical outputs.
//!
//! Components:
//! - [`prob`]: dense joint distributions over small finite alphabets,
//!   conditional channels, entropies and mutual informations in bits, and
//!   the product extensions that glue sources to auxiliary channels.
//! - [`regions`]: rate/key-rate evaluation for the untrusted-relay inner and
//!   outer bounds, the common-component variant, the trusted-relay bound,
//!   and seeded multi-start optimizers that maximize key rate under
//!   communication-rate caps.
//! - [`gaussian`]: closed-form rates for the jointly Gaussian source with
//!   quantization-noise auxiliaries, noise selection for rate targets, and
//!   the one-way-capacity comparison sweeps.
//! - [`sim`]: a concrete finite-n realization of the binning protocol —
//!   random codebooks, robust-typicality encoding, the relay's XOR
//!   broadcast, decoding, key extraction — with Monte Carlo estimation and
//!   exact exhaustive-enumeration analysis of agreement, key entropy, and
//!   leakage.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the command
//! line live in the companion `relaykey-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod err;
mod math;
mod rng;

pub mod gaussian;
pub mod prob;
pub mod regions;
pub mod sim;

pub use err::{Error, Result};
pub use rng::derive_seed;
