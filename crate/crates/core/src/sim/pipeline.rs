//! The per-trial protocol machinery: covering encoders, the relay's modular
//! combination, packing decoders, the common-randomness partition, and a
//! memoizing engine that classifies complete trials for both the Monte Carlo
//! and exact-enumeration drivers.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::err::{Error, Result};
use crate::rng::{rng_for, shuffle, STREAM_ZPART};

use super::book::{Codebook, TrustedCodebook};
use super::typ::is_typical;
use super::{SimMode, SimPlan, TrustedPlan};

/// Which user's side of the protocol an operation acts for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    One,
    Two,
}

/// Covering step: scan the user's codeword table in index order and return
/// the first (lexicographically smallest) index tuple whose codeword is
/// jointly typical with the observation, or `None` when the book contains no
/// typical codeword (an encoding failure, counted by the drivers).
///
/// `obs` is the user's observation: `[xⁿ]` (untrusted) or `[xⁿ, zⁿ]`
/// (common mode); user 2 passes `[yⁿ]` / `[yⁿ, zⁿ]`.
pub fn encode_user(
    obs: &[&[u16]],
    plan: &SimPlan,
    book: &Codebook,
    user: User,
    eps: f64,
) -> Result<Option<[u64; 4]>> {
    let (joint, entries) = match user {
        User::One => (&plan.enc1, book.sizes.book1_entries() as u64),
        User::Two => (&plan.enc2, book.sizes.book2_entries() as u64),
    };
    if obs.len() + 1 != joint.num_vars() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "encoder expects {} observation sequences, got {}",
            joint.num_vars() - 1,
            obs.len()
        )));
    }
    let mut tuple: Vec<&[u16]> = obs.to_vec();
    tuple.push(&[]);
    for flat in 0..entries {
        let word = match user {
            User::One => book.word1(flat),
            User::Two => book.word2(flat),
        };
        *tuple.last_mut().unwrap() = word;
        if is_typical(&tuple, joint, eps)? {
            let s = &book.sizes;
            let (sb, sk, sp) = match user {
                User::One => (s.s1b, s.s1k, s.s1p),
                User::Two => (s.s2b, s.s2k, s.s2p),
            };
            return Ok(Some([
                flat / (sp * sk * sb),
                flat / (sp * sk) % sb,
                flat / sp % sk,
                flat % sp,
            ]));
        }
    }
    Ok(None)
}

/// The relay's broadcast: pass both `a` indices through and combine the `b`
/// indices by addition modulo the shared `b`-space size.
pub fn relay_map(
    w1a: u64,
    w1b: u64,
    w2a: u64,
    w2b: u64,
    rb_size: u64,
) -> Result<(u64, u64, u64)> {
    if rb_size == 0 {
        return Err(Error::ConfigInvalid(alloc::string::String::from(
            "relay modulus must be at least 1",
        )));
    }
    for w in [w1b, w2b] {
        if w >= rb_size {
            return Err(Error::IndexOutOfRange { index: w, size: rb_size });
        }
    }
    let sum = ((w1b as u128 + w2b as u128) % rb_size as u128) as u64;
    Ok((w1a, sum, w2a))
}

/// Recover the other user's `b` index from the broadcast combination and
/// one's own: the modular inverse of [`relay_map`]'s middle component.
pub fn recover_other_b(combined: u64, own_b: u64, rb_size: u64) -> Result<u64> {
    if rb_size == 0 {
        return Err(Error::ConfigInvalid(alloc::string::String::from(
            "relay modulus must be at least 1",
        )));
    }
    for w in [combined, own_b] {
        if w >= rb_size {
            return Err(Error::IndexOutOfRange { index: w, size: rb_size });
        }
    }
    Ok(((combined as u128 + rb_size as u128 - own_b as u128) % rb_size as u128) as u64)
}

/// Result of the packing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOutcome {
    /// Exactly one candidate was jointly typical.
    Unique { wk: u64, wp: u64 },
    /// No candidate was jointly typical.
    NoCandidate,
    /// More than one candidate was jointly typical.
    Ambiguous,
}

fn scan_candidates(
    plan: &SimPlan,
    book: &Codebook,
    obs: &[&[u16]],
    own_word: &[u16],
    other_a: u64,
    other_b: u64,
    user: User,
    eps: f64,
) -> Result<DecodeOutcome> {
    let (joint, sk, sp) = match user {
        User::One => (&plan.dec1, book.sizes.s2k, book.sizes.s2p),
        User::Two => (&plan.dec2, book.sizes.s1k, book.sizes.s1p),
    };
    let mut tuple: Vec<&[u16]> = obs.to_vec();
    tuple.push(own_word);
    tuple.push(&[]);
    let mut found: Option<(u64, u64)> = None;
    for wk in 0..sk {
        for wp in 0..sp {
            let word = match user {
                User::One => book.word2(book.sizes.flat2([other_a, other_b, wk, wp])),
                User::Two => book.word1(book.sizes.flat1([other_a, other_b, wk, wp])),
            };
            *tuple.last_mut().unwrap() = word;
            if is_typical(&tuple, joint, eps)? {
                if found.is_some() {
                    return Ok(DecodeOutcome::Ambiguous);
                }
                found = Some((wk, wp));
            }
        }
    }
    Ok(match found {
        Some((wk, wp)) => DecodeOutcome::Unique { wk, wp },
        None => DecodeOutcome::NoCandidate,
    })
}

/// Packing step: given the broadcast `wc = (w1a, w1b⊕w2b, w2a)`, the user's
/// observation, its own selected codeword, and its own `b` index, strip the
/// combination, then search the other user's `(w_k, w′)` slice for the
/// unique codeword jointly typical with (observation, own codeword).
pub fn decode_user(
    wc: (u64, u64, u64),
    obs: &[&[u16]],
    own_word: &[u16],
    own_b: u64,
    plan: &SimPlan,
    book: &Codebook,
    user: User,
    eps: f64,
) -> Result<DecodeOutcome> {
    let s = &book.sizes;
    if wc.0 >= s.s1a {
        return Err(Error::IndexOutOfRange { index: wc.0, size: s.s1a });
    }
    if wc.2 >= s.s2a {
        return Err(Error::IndexOutOfRange { index: wc.2, size: s.s2a });
    }
    let other_b = recover_other_b(wc.1, own_b, s.s1b)?;
    let other_a = match user {
        User::One => wc.2,
        User::Two => wc.0,
    };
    scan_candidates(plan, book, obs, own_word, other_a, other_b, user, eps)
}

// ---------------------------------------------------------------------------
// Common-randomness partition of Zⁿ.
// ---------------------------------------------------------------------------

/// A seeded uniform partition of all length-n sequences over a size-`sz`
/// alphabet into bins of as-equal-as-possible size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZPartition {
    n: usize,
    sz: usize,
    pub bins: u64,
    assign: Vec<u64>,
}

/// Materialize the partition: shuffle all `sz.pow(n)` sequence ids with the
/// partition stream of `master_seed`, then cut the shuffled order into
/// `bins` consecutive chunks whose sizes differ by at most one.
pub fn build_z_partition(
    sz: usize,
    n: usize,
    bins: u64,
    master_seed: u64,
    enum_cap: u64,
) -> Result<ZPartition> {
    if bins == 0 {
        return Err(Error::ConfigInvalid(alloc::string::String::from(
            "partition needs at least one bin",
        )));
    }
    if sz == 0 || n == 0 {
        return Err(Error::ConfigInvalid(alloc::string::String::from(
            "partition needs a nonempty alphabet and positive length",
        )));
    }
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(sz as u128);
        if total > enum_cap as u128 {
            return Err(Error::EnumerationCapExceeded { needed: total, cap: enum_cap });
        }
    }
    let total = total as u64;
    let mut ids: Vec<u64> = (0..total).collect();
    let mut rng = rng_for(master_seed, STREAM_ZPART);
    shuffle(&mut ids, &mut rng);
    let mut assign = alloc::vec![0u64; total as usize];
    for (pos, &id) in ids.iter().enumerate() {
        assign[id as usize] = (pos as u128 * bins as u128 / total as u128) as u64;
    }
    Ok(ZPartition { n, sz, bins, assign })
}

impl ZPartition {
    /// Bin index of a sequence.
    pub fn bin_of(&self, zn: &[u16]) -> Result<u64> {
        if zn.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: zn.len() });
        }
        let mut id = 0u64;
        for &z in zn {
            if z as usize >= self.sz {
                return Err(Error::BadIndex { index: z as usize, limit: self.sz });
            }
            id = id * self.sz as u64 + z as u64;
        }
        Ok(self.assign[id as usize])
    }
}

// ---------------------------------------------------------------------------
// Trial engine shared by the Monte Carlo and exact drivers.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TrialClass {
    /// A covering step found no typical codeword.
    EncFail,
    /// A packing step returned no candidate or an ambiguity.
    DecUnresolved,
    /// Both packing steps returned unique candidates but some recovered
    /// index was not the one actually selected.
    WrongDecode,
    /// All indices recovered exactly.
    Success,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TrialRecord {
    pub class: TrialClass,
    /// Both users produced keys from decoded indices (Success or WrongDecode).
    pub formed: bool,
    pub k1: u64,
    pub k2: u64,
    /// Uplink index pairs (w_a·s_b + w_b), defaults on failure.
    pub w1: u64,
    pub w2: u64,
    /// Flattened broadcast value.
    pub wc: u64,
    /// The encoders' key-part outputs (defaults on failure).
    pub w1k: u64,
    pub w2k: u64,
}

pub(crate) struct Engine<'a> {
    plan: &'a SimPlan,
    book: &'a Codebook,
    zpart: Option<&'a ZPartition>,
    enc1_memo: BTreeMap<Vec<u16>, Option<[u64; 4]>>,
    enc2_memo: BTreeMap<Vec<u16>, Option<[u64; 4]>>,
    dec1_memo: BTreeMap<(Vec<u16>, u64, u64), DecodeOutcome>,
    dec2_memo: BTreeMap<(Vec<u16>, u64, u64), DecodeOutcome>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(
        plan: &'a SimPlan,
        book: &'a Codebook,
        zpart: Option<&'a ZPartition>,
    ) -> Self {
        Engine {
            plan,
            book,
            zpart,
            enc1_memo: BTreeMap::new(),
            enc2_memo: BTreeMap::new(),
            dec1_memo: BTreeMap::new(),
            dec2_memo: BTreeMap::new(),
        }
    }

    fn encode_memo(&mut self, user: User, obs: &[&[u16]]) -> Result<Option<[u64; 4]>> {
        let key: Vec<u16> = obs.iter().flat_map(|s| s.iter().copied()).collect();
        let memo = match user {
            User::One => &mut self.enc1_memo,
            User::Two => &mut self.enc2_memo,
        };
        if let Some(hit) = memo.get(&key) {
            return Ok(*hit);
        }
        let out = encode_user(obs, self.plan, self.book, user, self.plan.eps)?;
        match user {
            User::One => self.enc1_memo.insert(key, out),
            User::Two => self.enc2_memo.insert(key, out),
        };
        Ok(out)
    }

    fn decode_memo(
        &mut self,
        user: User,
        obs: &[&[u16]],
        own_word: &[u16],
        other_a: u64,
        other_b: u64,
    ) -> Result<DecodeOutcome> {
        let obs_key: Vec<u16> = obs.iter().flat_map(|s| s.iter().copied()).collect();
        let key = (obs_key, other_a, other_b);
        let memo = match user {
            User::One => &self.dec1_memo,
            User::Two => &self.dec2_memo,
        };
        if let Some(hit) = memo.get(&key) {
            return Ok(*hit);
        }
        let out = scan_candidates(
            self.plan,
            self.book,
            obs,
            own_word,
            other_a,
            other_b,
            user,
            self.plan.eps,
        )?;
        match user {
            User::One => self.dec1_memo.insert(key, out),
            User::Two => self.dec2_memo.insert(key, out),
        };
        Ok(out)
    }

    /// Run one complete trial on the given source realization. `zn` is
    /// required exactly in common mode.
    pub(crate) fn trial(
        &mut self,
        xn: &[u16],
        yn: &[u16],
        zn: Option<&[u16]>,
    ) -> Result<TrialRecord> {
        let plan = self.plan;
        let s = &self.book.sizes;
        let (obs1, obs2): (Vec<&[u16]>, Vec<&[u16]>) = match (plan.mode, zn) {
            (SimMode::Common, Some(z)) => (alloc::vec![xn, z], alloc::vec![yn, z]),
            (SimMode::Untrusted, None) => (alloc::vec![xn], alloc::vec![yn]),
            _ => {
                return Err(Error::ShapeMismatch(alloc::string::String::from(
                    "common-source sequence presence must match the mode",
                )))
            }
        };
        let kz = match (self.zpart, zn) {
            (Some(zp), Some(z)) => zp.bin_of(z)?,
            _ => 0,
        };

        let enc1 = self.encode_memo(User::One, &obs1)?;
        let enc2 = self.encode_memo(User::Two, &obs2)?;
        let e1 = enc1.unwrap_or([0; 4]);
        let e2 = enc2.unwrap_or([0; 4]);
        let w1 = e1[0] * s.s1b + e1[1];
        let w2 = e2[0] * s.s2b + e2[1];
        let bc = relay_map(e1[0], e1[1], e2[0], e2[1], s.s1b)?;
        let wc = (bc.0 * s.s1b + bc.1) * s.s2a + bc.2;
        let (w1k, w2k) = (e1[2], e2[2]);

        if enc1.is_none() || enc2.is_none() {
            return Ok(TrialRecord {
                class: TrialClass::EncFail,
                formed: false,
                k1: 0,
                k2: 0,
                w1,
                w2,
                wc,
                w1k,
                w2k,
            });
        }

        let own1 = self.book.word1(s.flat1(e1));
        let own2 = self.book.word2(s.flat2(e2));
        let other_b_for1 = recover_other_b(bc.1, e1[1], s.s1b)?;
        let other_b_for2 = recover_other_b(bc.1, e2[1], s.s1b)?;
        let d1 = self.decode_memo(User::One, &obs1, own1, bc.2, other_b_for1)?;
        let d2 = self.decode_memo(User::Two, &obs2, own2, bc.0, other_b_for2)?;

        let (hat2, hat1) = match (d1, d2) {
            (DecodeOutcome::Unique { wk: a, wp: b }, DecodeOutcome::Unique { wk: c, wp: d }) => {
                ((a, b), (c, d))
            }
            _ => {
                return Ok(TrialRecord {
                    class: TrialClass::DecUnresolved,
                    formed: false,
                    k1: 0,
                    k2: 0,
                    w1,
                    w2,
                    wc,
                    w1k,
                    w2k,
                })
            }
        };
        let wrong = hat2 != (e2[2], e2[3]) || hat1 != (e1[2], e1[3]);
        let k1 = plan.key_flat(e1[2], hat2.0, kz);
        let k2 = plan.key_flat(hat1.0, e2[2], kz);
        Ok(TrialRecord {
            class: if wrong { TrialClass::WrongDecode } else { TrialClass::Success },
            formed: true,
            k1,
            k2,
            w1,
            w2,
            wc,
            w1k,
            w2k,
        })
    }
}

// ---------------------------------------------------------------------------
// Trusted-relay engine.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WpDecode {
    Unique(u64),
    NoCandidate,
    Ambiguous,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TrustedTrialRecord {
    pub class: TrialClass,
    pub formed: bool,
    pub k1: u64,
    pub k2: u64,
    pub wc: u64,
}

pub(crate) struct TrustedEngine<'a> {
    plan: &'a TrustedPlan,
    book: &'a TrustedCodebook,
    cover_memo: BTreeMap<Vec<u16>, Option<(u64, u64)>>,
    dec1_memo: BTreeMap<(Vec<u16>, u64), WpDecode>,
    dec2_memo: BTreeMap<(Vec<u16>, u64), WpDecode>,
}

impl<'a> TrustedEngine<'a> {
    pub(crate) fn new(plan: &'a TrustedPlan, book: &'a TrustedCodebook) -> Self {
        TrustedEngine {
            plan,
            book,
            cover_memo: BTreeMap::new(),
            dec1_memo: BTreeMap::new(),
            dec2_memo: BTreeMap::new(),
        }
    }

    /// Relay covering: smallest (w_c, w′) whose codeword is jointly typical
    /// with the observed pair.
    fn cover(&mut self, xn: &[u16], yn: &[u16]) -> Result<Option<(u64, u64)>> {
        let key: Vec<u16> = xn.iter().chain(yn.iter()).copied().collect();
        if let Some(hit) = self.cover_memo.get(&key) {
            return Ok(*hit);
        }
        let mut out = None;
        'scan: for wc in 0..self.book.swc {
            for wp in 0..self.book.swp {
                let tuple = [xn, yn, self.book.word(wc, wp)];
                if is_typical(&tuple, &self.plan.cover, self.plan.eps)? {
                    out = Some((wc, wp));
                    break 'scan;
                }
            }
        }
        self.cover_memo.insert(key, out);
        Ok(out)
    }

    fn decode(&mut self, user: User, obs: &[u16], wc: u64) -> Result<WpDecode> {
        let key = (obs.to_vec(), wc);
        let memo = match user {
            User::One => &self.dec1_memo,
            User::Two => &self.dec2_memo,
        };
        if let Some(hit) = memo.get(&key) {
            return Ok(*hit);
        }
        let joint = match user {
            User::One => &self.plan.dec1,
            User::Two => &self.plan.dec2,
        };
        let mut found = None;
        let mut out = None;
        for wp in 0..self.book.swp {
            let tuple = [obs, self.book.word(wc, wp)];
            if is_typical(&tuple, joint, self.plan.eps)? {
                if found.is_some() {
                    out = Some(WpDecode::Ambiguous);
                    break;
                }
                found = Some(wp);
            }
        }
        let out = out.unwrap_or(match found {
            Some(wp) => WpDecode::Unique(wp),
            None => WpDecode::NoCandidate,
        });
        match user {
            User::One => self.dec1_memo.insert(key, out),
            User::Two => self.dec2_memo.insert(key, out),
        };
        Ok(out)
    }

    pub(crate) fn trial(&mut self, xn: &[u16], yn: &[u16]) -> Result<TrustedTrialRecord> {
        let covered = self.cover(xn, yn)?;
        let (wc, wp) = match covered {
            Some(pair) => pair,
            None => {
                return Ok(TrustedTrialRecord {
                    class: TrialClass::EncFail,
                    formed: false,
                    k1: 0,
                    k2: 0,
                    wc: 0,
                });
            }
        };
        let d1 = self.decode(User::One, xn, wc)?;
        let d2 = self.decode(User::Two, yn, wc)?;
        let (k1, k2) = match (d1, d2) {
            (WpDecode::Unique(a), WpDecode::Unique(b)) => (a, b),
            _ => {
                return Ok(TrustedTrialRecord {
                    class: TrialClass::DecUnresolved,
                    formed: false,
                    k1: 0,
                    k2: 0,
                    wc,
                })
            }
        };
        let wrong = k1 != wp || k2 != wp;
        Ok(TrustedTrialRecord {
            class: if wrong { TrialClass::WrongDecode } else { TrialClass::Success },
            formed: true,
            k1,
            k2,
            wc,
        })
    }
}

// ---------------------------------------------------------------------------
// Weighted tally shared by the exact and Monte Carlo drivers.
// ---------------------------------------------------------------------------

/// Accumulates trial outcomes with arbitrary nonnegative weights (exact
/// enumeration adds sequence probabilities; Monte Carlo adds unit counts)
/// and normalizes once at the end.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tally {
    pub total: f64,
    pub enc_fail: f64,
    pub unres: f64,
    pub wrong: f64,
    pub success: f64,
    pub formed: f64,
    pub agree: f64,
    /// Law of user 1's key over all trials (failures contribute the default).
    pub key_hist: BTreeMap<u64, f64>,
    /// Joint law of (key pair, uplink-message pair).
    pub leak: BTreeMap<((u64, u64), (u64, u64)), f64>,
    /// Joint law of (key pair, broadcast message).
    pub bc: BTreeMap<((u64, u64), u64), f64>,
    /// Joint law of the two encoders' key-part indices.
    pub partial: BTreeMap<(u64, u64), f64>,
}

impl Tally {
    fn add_class(&mut self, class: TrialClass, formed: bool, agree: bool, w: f64) {
        self.total += w;
        match class {
            TrialClass::EncFail => self.enc_fail += w,
            TrialClass::DecUnresolved => self.unres += w,
            TrialClass::WrongDecode => self.wrong += w,
            TrialClass::Success => self.success += w,
        }
        if formed {
            self.formed += w;
            if agree {
                self.agree += w;
            }
        }
    }

    pub(crate) fn add(&mut self, rec: &TrialRecord, w: f64) {
        self.add_class(rec.class, rec.formed, rec.k1 == rec.k2, w);
        *self.key_hist.entry(rec.k1).or_insert(0.0) += w;
        let kpair = (rec.k1, rec.k2);
        *self.leak.entry((kpair, (rec.w1, rec.w2))).or_insert(0.0) += w;
        *self.bc.entry((kpair, rec.wc)).or_insert(0.0) += w;
        *self.partial.entry((rec.w1k, rec.w2k)).or_insert(0.0) += w;
    }

    pub(crate) fn add_trusted(&mut self, rec: &TrustedTrialRecord, w: f64) {
        self.add_class(rec.class, rec.formed, rec.k1 == rec.k2, w);
        *self.key_hist.entry(rec.k1).or_insert(0.0) += w;
        *self.bc.entry(((rec.k1, rec.k2), rec.wc)).or_insert(0.0) += w;
    }

    /// Divide every accumulator by the total weight so the maps become
    /// probability laws and the class fields become rates.
    pub(crate) fn normalize(&mut self) {
        let t = self.total;
        if t <= 0.0 {
            return;
        }
        for v in [
            &mut self.enc_fail,
            &mut self.unres,
            &mut self.wrong,
            &mut self.success,
            &mut self.formed,
            &mut self.agree,
        ] {
            *v /= t;
        }
        for v in self.key_hist.values_mut() {
            *v /= t;
        }
        for v in self.leak.values_mut() {
            *v /= t;
        }
        for v in self.bc.values_mut() {
            *v /= t;
        }
        for v in self.partial.values_mut() {
            *v /= t;
        }
        self.total = 1.0;
    }

    pub(crate) fn agreement_rate(&self) -> f64 {
        if self.formed > 0.0 {
            self.agree / self.formed
        } else {
            1.0
        }
    }
}

/// Decompose a flat joint-symbol index into per-variable symbols
/// (row-major layout: the last variable varies fastest).
pub(crate) fn split_symbol(mut flat: usize, sizes: &[usize], out: &mut [u16]) {
    for i in (0..sizes.len()).rev() {
        out[i] = (flat % sizes[i]) as u16;
        flat /= sizes[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{dsbs, CondChannel, FiniteJoint};
    use crate::sim::{build_codebook, plan, SimConfig};
    use alloc::vec;

    #[test]
    fn relay_map_examples_and_inversion() {
        assert_eq!(relay_map(0, 3, 0, 5, 8).unwrap(), (0, 0, 0));
        assert_eq!(relay_map(2, 3, 4, 0, 8).unwrap(), (2, 3, 4));
        assert_eq!(recover_other_b(0, 3, 8).unwrap(), 5);
        for sb in 1..=9u64 {
            for w1 in 0..sb {
                for w2 in 0..sb {
                    let (_, c, _) = relay_map(0, w1, 0, w2, sb).unwrap();
                    assert_eq!(recover_other_b(c, w1, sb).unwrap(), w2);
                    assert_eq!(recover_other_b(c, w2, sb).unwrap(), w1);
                }
            }
        }
        assert!(matches!(
            relay_map(0, 8, 0, 0, 8),
            Err(Error::IndexOutOfRange { index: 8, size: 8 })
        ));
    }

    #[test]
    fn noiseless_identity_run_encodes_and_decodes_its_own_image() {
        // X = Y exactly; identity test channels; every observed sequence is
        // its own typical codeword image if present in the book.
        let src = FiniteJoint::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let mut cfg = SimConfig::untrusted(
            6,
            src,
            CondChannel::identity(2),
            CondChannel::identity(2),
        );
        cfg.eps = 0.3;
        let p = plan(&cfg).unwrap();
        let book = build_codebook(&cfg).unwrap();
        let mut eng = Engine::new(&p, &book, None);
        // balanced sequence: typical for the fair marginal
        let xn: Vec<u16> = vec![0, 1, 0, 1, 0, 1];
        let rec = eng.trial(&xn, &xn, None).unwrap();
        if rec.formed {
            assert_eq!(rec.k1, rec.k2, "identical observations must agree");
            assert_eq!(rec.class, TrialClass::Success);
        }
    }

    #[test]
    fn encoding_failure_is_reported_not_fatal() {
        // An impossible observation for the book's law: all-ones when the
        // book is drawn from a fair marginal and eps is tiny.
        let src = dsbs(0.1).unwrap();
        let mut cfg =
            SimConfig::untrusted(6, src, CondChannel::identity(2), CondChannel::identity(2));
        cfg.eps = 0.01;
        let p = plan(&cfg).unwrap();
        let book = build_codebook(&cfg).unwrap();
        let ones: Vec<u16> = vec![1; 6];
        let got = encode_user(&[&ones], &p, &book, User::One, cfg.eps).unwrap();
        assert_eq!(got, None);
        let mut eng = Engine::new(&p, &book, None);
        let rec = eng.trial(&ones, &ones, None).unwrap();
        assert_eq!(rec.class, TrialClass::EncFail);
        assert_eq!((rec.k1, rec.k2), (0, 0));
    }

    #[test]
    fn encoder_picks_the_lexicographically_smallest_typical_tuple() {
        let src = FiniteJoint::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let mut cfg = SimConfig::untrusted(
            4,
            src,
            CondChannel::identity(2),
            CondChannel::identity(2),
        );
        cfg.eps = 0.5;
        let p = plan(&cfg).unwrap();
        let book = build_codebook(&cfg).unwrap();
        let xn: Vec<u16> = vec![0, 0, 1, 1];
        if let Some(idx) = encode_user(&[&xn], &p, &book, User::One, cfg.eps).unwrap() {
            let flat = book.sizes.flat1(idx);
            // every earlier entry must be non-typical
            for earlier in 0..flat {
                let w = book.word1(earlier);
                assert!(!is_typical(&[&xn, w], &p.enc1, cfg.eps).unwrap());
            }
        }
    }

    #[test]
    fn z_partition_bins_are_balanced_and_deterministic() {
        let part = build_z_partition(2, 4, 4, 9, 1_000_000).unwrap();
        let again = build_z_partition(2, 4, 4, 9, 1_000_000).unwrap();
        assert_eq!(part, again);
        // 16 ids into 4 bins: exactly 4 each
        let mut counts = [0u32; 4];
        for id in 0..16u16 {
            let zn = [(id >> 3) & 1, (id >> 2) & 1, (id >> 1) & 1, id & 1];
            counts[part.bin_of(&zn).unwrap() as usize] += 1;
        }
        assert_eq!(counts, [4, 4, 4, 4]);
        let other = build_z_partition(2, 4, 4, 10, 1_000_000).unwrap();
        assert_ne!(part, other);
    }

    #[test]
    fn z_partition_respects_the_enumeration_cap() {
        assert!(matches!(
            build_z_partition(4, 16, 2, 0, 1_000_000),
            Err(Error::EnumerationCapExceeded { .. })
        ));
    }
}
