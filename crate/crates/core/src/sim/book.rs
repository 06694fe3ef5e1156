//! Random codebooks: i.i.d. codeword tables drawn from the auxiliary
//! marginals, indexed by the split integer indices.

use alloc::string::String;
use alloc::vec::Vec;

use crate::err::Result;
use crate::rng::{rng_for, CdfSampler, STREAM_BOOK1, STREAM_BOOK2};

use super::{plan, trusted_plan, IndexSizes, SimConfig};

/// The two users' codeword tables. Entry order is row-major over
/// (w_a, w_b, w_k, w′), so flat index 0 is the all-zero index tuple and
/// ascending flat order is ascending lexicographic order on the tuple —
/// the order the smallest-indices encoding rule scans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    pub n: usize,
    pub sizes: IndexSizes,
    /// Master seed the tables were derived from.
    pub seed: u64,
    words1: Vec<u16>,
    words2: Vec<u16>,
}

impl Codebook {
    pub(crate) fn word1(&self, flat: u64) -> &[u16] {
        let i = flat as usize * self.n;
        &self.words1[i..i + self.n]
    }

    pub(crate) fn word2(&self, flat: u64) -> &[u16] {
        let i = flat as usize * self.n;
        &self.words2[i..i + self.n]
    }

    /// Plain-text table: one codeword per line, `user w_a,w_b,w_k,w_p sym…`,
    /// all of user 1's codewords in index order, then user 2's.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (user, entries) in [(1u8, self.sizes.book1_entries()), (2, self.sizes.book2_entries())]
        {
            let s = &self.sizes;
            let (sb, sk, sp) = if user == 1 { (s.s1b, s.s1k, s.s1p) } else { (s.s2b, s.s2k, s.s2p) };
            for flat in 0..entries as u64 {
                let wp = flat % sp;
                let wk = flat / sp % sk;
                let wb = flat / (sp * sk) % sb;
                let wa = flat / (sp * sk * sb);
                let word = if user == 1 { self.word1(flat) } else { self.word2(flat) };
                out.push_str(&alloc::format!("{user} {wa},{wb},{wk},{wp}"));
                for &sym in word {
                    out.push_str(&alloc::format!(" {sym}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

fn draw_table(pmf: &[f64], entries: u64, n: usize, seed: u64, stream: u64) -> Vec<u16> {
    let mut rng = rng_for(seed, stream);
    let sampler = CdfSampler::new(pmf);
    let mut words = Vec::with_capacity(entries as usize * n);
    for _ in 0..entries {
        for _ in 0..n {
            words.push(sampler.sample(&mut rng) as u16);
        }
    }
    words
}

/// Draw both users' codeword tables for the resolved plan of `cfg`.
/// Identical configurations give bit-identical books.
pub fn build_codebook(cfg: &SimConfig) -> Result<Codebook> {
    let p = plan(cfg)?;
    let words1 =
        draw_table(&p.pmf_u1, p.sizes.book1_entries() as u64, p.n, cfg.master_seed, STREAM_BOOK1);
    let words2 =
        draw_table(&p.pmf_u2, p.sizes.book2_entries() as u64, p.n, cfg.master_seed, STREAM_BOOK2);
    Ok(Codebook { n: p.n, sizes: p.sizes, seed: cfg.master_seed, words1, words2 })
}

/// The trusted relay's covering table, indexed by (w_c, w′) row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustedCodebook {
    pub n: usize,
    pub swc: u64,
    pub swp: u64,
    pub seed: u64,
    words: Vec<u16>,
}

impl TrustedCodebook {
    pub(crate) fn word(&self, wc: u64, wp: u64) -> &[u16] {
        let i = (wc * self.swp + wp) as usize * self.n;
        &self.words[i..i + self.n]
    }

    /// Plain-text table: one codeword per line, `r w_c,w_p sym…`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for wc in 0..self.swc {
            for wp in 0..self.swp {
                out.push_str(&alloc::format!("r {wc},{wp}"));
                for &sym in self.word(wc, wp) {
                    out.push_str(&alloc::format!(" {sym}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

pub fn build_trusted_codebook(cfg: &SimConfig) -> Result<TrustedCodebook> {
    let p = trusted_plan(cfg)?;
    let words = draw_table(&p.pmf_v, p.swc * p.swp, p.n, cfg.master_seed, STREAM_BOOK1);
    Ok(TrustedCodebook { n: p.n, swc: p.swc, swp: p.swp, seed: cfg.master_seed, words })
}
