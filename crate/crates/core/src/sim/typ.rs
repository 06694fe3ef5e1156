//! Robust joint typicality for tuples of finite-alphabet sequences.

use crate::err::{Error, Result};
use crate::prob::FiniteJoint;

/// Decide whether the sequences are jointly typical for `joint` at
/// multiplicative tolerance `eps`: for every symbol tuple `a`, the empirical
/// count over the n positions must satisfy |count − n·p(a)| ≤ eps·n·p(a).
/// Tuples with p(a) = 0 must therefore never occur.
///
/// `seqs` holds one sequence per variable of `joint`, all the same length.
pub fn is_typical(seqs: &[&[u16]], joint: &FiniteJoint, eps: f64) -> Result<bool> {
    if seqs.len() != joint.num_vars() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} sequences for a {}-variable joint",
            seqs.len(),
            joint.num_vars()
        )));
    }
    let n = seqs[0].len();
    for s in seqs {
        if s.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: s.len() });
        }
    }
    let sizes = joint.sizes();
    let mut counts = alloc::vec![0u32; joint.probs().len()];
    for t in 0..n {
        let mut flat = 0usize;
        for (v, seq) in seqs.iter().enumerate() {
            let sym = seq[t] as usize;
            if sym >= sizes[v] {
                return Err(Error::BadIndex { index: sym, limit: sizes[v] });
            }
            flat = flat * sizes[v] + sym;
        }
        counts[flat] += 1;
    }
    let nf = n as f64;
    Ok(counts
        .iter()
        .zip(joint.probs())
        .all(|(&c, &p)| (c as f64 - nf * p).abs() <= eps * nf * p))
}
