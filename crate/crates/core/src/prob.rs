//! Dense joint distributions over small finite alphabets, conditional
//! channels, and exact information measures (all in bits).
//!
//! Tables are row-major with the last variable fastest. Everything is exact
//! arithmetic over the full table — no sampling, no sparse approximations —
//! which is why alphabet-size products are capped (default 10^7 entries).
//! Normalization is never repaired silently: constructors reject bad mass,
//! and fixing it requires the explicit [`FiniteJoint::renormalize`] call.

use alloc::string::String;
use alloc::{vec, vec::Vec};

use crate::err::{Error, Result};
use crate::math;

/// Tolerance for "sums to one" checks on distributions and channel rows.
pub const NORM_TOL: f64 = 1e-12;

/// Default cap on dense table entries (shapes, not bytes).
pub const DEFAULT_ENTRY_CAP: usize = 10_000_000;

fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * sizes[i + 1];
    }
    s
}

fn checked_len(sizes: &[usize], cap: usize) -> Result<usize> {
    let mut total: u128 = 1;
    for &s in sizes {
        if s == 0 {
            return Err(Error::ShapeMismatch(String::from("alphabet of size 0")));
        }
        total *= s as u128;
        if total > cap as u128 {
            return Err(Error::TableTooLarge { entries: total, cap });
        }
    }
    Ok(total as usize)
}

fn check_mass(probs: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        if p < 0.0 {
            return Err(Error::NegativeMass { index: i, value: p });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// A joint probability table over one or more finite variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJoint {
    sizes: Vec<usize>,
    probs: Vec<f64>,
    labels: Option<Vec<String>>,
    entry_cap: usize,
}

impl FiniteJoint {
    /// Build and validate: entries nonnegative, total mass 1 within
    /// [`NORM_TOL`], `probs.len()` equal to the product of `sizes`.
    pub fn new(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        Self::with_cap(sizes, probs, DEFAULT_ENTRY_CAP)
    }

    /// Like [`FiniteJoint::new`] with an explicit dense-entry cap.
    pub fn with_cap(sizes: Vec<usize>, probs: Vec<f64>, entry_cap: usize) -> Result<Self> {
        let expect = checked_len(&sizes, entry_cap)?;
        if probs.len() != expect {
            return Err(Error::ShapeMismatch(alloc::format!(
                "table has {} entries, sizes imply {expect}",
                probs.len()
            )));
        }
        check_mass(&probs)?;
        Ok(FiniteJoint { sizes, probs, labels: None, entry_cap })
    }

    /// Build without the normalization check (shape and nonnegativity are
    /// still enforced). The result is unusable until [`renormalize`d]
    /// (`renormalize`) — measures on an unnormalized table are meaningless.
    pub fn new_unnormalized(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let expect = checked_len(&sizes, DEFAULT_ENTRY_CAP)?;
        if probs.len() != expect {
            return Err(Error::ShapeMismatch(alloc::format!(
                "table has {} entries, sizes imply {expect}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if p < 0.0 {
                return Err(Error::NegativeMass { index: i, value: p });
            }
        }
        Ok(FiniteJoint { sizes, probs, labels: None, entry_cap: DEFAULT_ENTRY_CAP })
    }

    // Internal constructor for tables produced by operations that preserve
    // mass by construction.
    fn from_parts(sizes: Vec<usize>, probs: Vec<f64>, entry_cap: usize) -> Self {
        debug_assert_eq!(probs.len(), sizes.iter().product::<usize>());
        FiniteJoint { sizes, probs, labels: None, entry_cap }
    }

    /// Attach display labels, one per variable.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.sizes.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} labels for {} variables",
                labels.len(),
                self.sizes.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn num_vars(&self) -> usize {
        self.sizes.len()
    }

    pub fn entry_cap(&self) -> usize {
        self.entry_cap
    }

    /// Probability of one cell, addressed by per-variable indices.
    pub fn prob_at(&self, idx: &[usize]) -> Result<f64> {
        if idx.len() != self.sizes.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} indices for {} variables",
                idx.len(),
                self.sizes.len()
            )));
        }
        let mut flat = 0usize;
        for (k, (&i, &s)) in idx.iter().zip(&self.sizes).enumerate() {
            if i >= s {
                return Err(Error::BadIndex { index: i, limit: s });
            }
            flat = flat * s + i;
            let _ = k;
        }
        Ok(self.probs[flat])
    }

    /// Re-run the construction checks (useful after manual edits via clone).
    pub fn validate(&self) -> Result<()> {
        let expect = checked_len(&self.sizes, self.entry_cap)?;
        if self.probs.len() != expect {
            return Err(Error::ShapeMismatch(String::from("entry count drifted")));
        }
        check_mass(&self.probs)
    }

    /// Scale the table so it sums to exactly 1. The one sanctioned repair
    /// path for off-by-rounding inputs; zero or negative total mass errors.
    pub fn renormalize(&mut self) -> Result<()> {
        let mut sum = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p < 0.0 {
                return Err(Error::NegativeMass { index: i, value: p });
            }
            sum += p;
        }
        if sum <= 0.0 {
            return Err(Error::DomainError(String::from(
                "cannot renormalize a table with zero total mass",
            )));
        }
        for p in &mut self.probs {
            *p /= sum;
        }
        Ok(())
    }

    // Bounds-check a variable group and reject repeats (within the group).
    fn check_group(&self, vars: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.sizes.len()];
        for &v in vars {
            if v >= self.sizes.len() {
                return Err(Error::BadIndex { index: v, limit: self.sizes.len() });
            }
            if seen[v] {
                return Err(Error::BadIndex { index: v, limit: self.sizes.len() });
            }
            seen[v] = true;
        }
        Ok(())
    }

    // Sum the table down to the given (ordered) subset of variables.
    fn accumulate(&self, vars: &[usize]) -> Result<Vec<f64>> {
        self.check_group(vars)?;
        let sub_sizes: Vec<usize> = vars.iter().map(|&v| self.sizes[v]).collect();
        let full_str = strides(&self.sizes);
        let sub_str = strides(&sub_sizes);
        let total: usize = sub_sizes.iter().product::<usize>().max(1);
        let mut out = vec![0.0f64; total];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut si = 0usize;
            for (k, &v) in vars.iter().enumerate() {
                si += ((i / full_str[v]) % self.sizes[v]) * sub_str[k];
            }
            out[si] += p;
        }
        Ok(out)
    }

    /// Marginal over `vars`, in the order given (so this also permutes).
    pub fn marginal(&self, vars: &[usize]) -> Result<FiniteJoint> {
        let probs = self.accumulate(vars)?;
        let sizes: Vec<usize> = vars.iter().map(|&v| self.sizes[v]).collect();
        let mut out = FiniteJoint::from_parts(sizes, probs, self.entry_cap);
        if let Some(labels) = &self.labels {
            out.labels = Some(vars.iter().map(|&v| labels[v].clone()).collect());
        }
        Ok(out)
    }

    /// Joint entropy of a subset of variables, in bits. The empty subset has
    /// entropy 0.
    pub fn entropy(&self, vars: &[usize]) -> Result<f64> {
        let acc = self.accumulate(vars)?;
        Ok(acc.iter().map(|&p| math::neg_xlog2x(p)).sum())
    }

    /// Conditional mutual information I(A; B | C) in bits, computed as
    /// H(A,C) + H(B,C) - H(A,B,C) - H(C). Exact up to f64 rounding, so it
    /// can dip a hair below zero (never past about -1e-12 at these scales).
    pub fn mutual_information(&self, a: &[usize], b: &[usize], given: &[usize]) -> Result<f64> {
        self.check_group(a)?;
        self.check_group(b)?;
        self.check_group(given)?;
        let mut seen = vec![0u8; self.sizes.len()];
        for &v in a.iter().chain(b).chain(given) {
            seen[v] += 1;
            if seen[v] > 1 {
                return Err(Error::OverlappingGroups { var: v });
            }
        }
        let mut ac: Vec<usize> = a.to_vec();
        ac.extend_from_slice(given);
        let mut bc: Vec<usize> = b.to_vec();
        bc.extend_from_slice(given);
        let mut abc: Vec<usize> = a.to_vec();
        abc.extend_from_slice(b);
        abc.extend_from_slice(given);
        Ok(self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(given)?)
    }

    /// Extend a two-variable source p(x,y) with per-user test channels:
    /// result is p(x,y,u1,u2) = p(x,y) · ch1(u1|x) · ch2(u2|y).
    ///
    /// The (X,Y) marginal of the result differs from the source only by the
    /// channels' row-sum rounding (each row sums to 1 within [`NORM_TOL`]).
    /// Zero-mass source cells are skipped. Labels are not propagated.
    pub fn extend_markov(&self, ch1: &CondChannel, ch2: &CondChannel) -> Result<FiniteJoint> {
        if self.sizes.len() != 2 {
            return Err(Error::ShapeMismatch(String::from(
                "markov extension needs a two-variable source",
            )));
        }
        let (sx, sy) = (self.sizes[0], self.sizes[1]);
        ch1.expect_shape(&[sx], 1, "first channel")?;
        ch2.expect_shape(&[sy], 1, "second channel")?;
        let (su1, su2) = (ch1.out_sizes[0], ch2.out_sizes[0]);
        let sizes = vec![sx, sy, su1, su2];
        let total = checked_len(&sizes, self.entry_cap)?;
        let mut probs = vec![0.0f64; total];
        for x in 0..sx {
            let r1 = ch1.row(x);
            for y in 0..sy {
                let pxy = self.probs[x * sy + y];
                if pxy == 0.0 {
                    continue;
                }
                let r2 = ch2.row(y);
                let base = (x * sy + y) * su1 * su2;
                for (u1, &q1) in r1.iter().enumerate() {
                    let pq = pxy * q1;
                    if pq == 0.0 {
                        continue;
                    }
                    let row_base = base + u1 * su2;
                    for (u2, &q2) in r2.iter().enumerate() {
                        probs[row_base + u2] = pq * q2;
                    }
                }
            }
        }
        Ok(FiniteJoint::from_parts(sizes, probs, self.entry_cap))
    }

    /// Extend a three-variable source p(x,y,z) with channels that may
    /// consult the shared component: p(x,y,z,u1,u2) =
    /// p(x,y,z) · ch1(u1|x,z) · ch2(u2|y,z).
    pub fn extend_markov_common(
        &self,
        ch1: &CondChannel,
        ch2: &CondChannel,
    ) -> Result<FiniteJoint> {
        if self.sizes.len() != 3 {
            return Err(Error::ShapeMismatch(String::from(
                "common extension needs a three-variable source",
            )));
        }
        let (sx, sy, sz) = (self.sizes[0], self.sizes[1], self.sizes[2]);
        ch1.expect_shape(&[sx, sz], 1, "first channel")?;
        ch2.expect_shape(&[sy, sz], 1, "second channel")?;
        let (su1, su2) = (ch1.out_sizes[0], ch2.out_sizes[0]);
        let sizes = vec![sx, sy, sz, su1, su2];
        let total = checked_len(&sizes, self.entry_cap)?;
        let mut probs = vec![0.0f64; total];
        for x in 0..sx {
            for y in 0..sy {
                for z in 0..sz {
                    let pxyz = self.probs[(x * sy + y) * sz + z];
                    if pxyz == 0.0 {
                        continue;
                    }
                    let r1 = ch1.row(x * sz + z);
                    let r2 = ch2.row(y * sz + z);
                    let base = ((x * sy + y) * sz + z) * su1 * su2;
                    for (u1, &q1) in r1.iter().enumerate() {
                        let pq = pxyz * q1;
                        if pq == 0.0 {
                            continue;
                        }
                        let row_base = base + u1 * su2;
                        for (u2, &q2) in r2.iter().enumerate() {
                            probs[row_base + u2] = pq * q2;
                        }
                    }
                }
            }
        }
        Ok(FiniteJoint::from_parts(sizes, probs, self.entry_cap))
    }

    /// Extend a two-variable source with one channel that reads both
    /// variables: p(x,y,v…) = p(x,y) · ch(v…|x,y). The channel may emit one
    /// output variable (a relay observation V) or several (a joint auxiliary
    /// pair). No conditional-independence structure is implied or checked.
    pub fn extend_general(&self, ch: &CondChannel) -> Result<FiniteJoint> {
        if self.sizes.len() != 2 {
            return Err(Error::ShapeMismatch(String::from(
                "general extension needs a two-variable source",
            )));
        }
        let (sx, sy) = (self.sizes[0], self.sizes[1]);
        if ch.in_sizes != [sx, sy] {
            return Err(Error::ShapeMismatch(alloc::format!(
                "channel inputs {:?} do not match source sizes [{sx}, {sy}]",
                ch.in_sizes
            )));
        }
        let out_len = ch.out_len();
        let mut sizes = vec![sx, sy];
        sizes.extend_from_slice(&ch.out_sizes);
        let total = checked_len(&sizes, self.entry_cap)?;
        let mut probs = vec![0.0f64; total];
        for xy in 0..sx * sy {
            let pxy = self.probs[xy];
            if pxy == 0.0 {
                continue;
            }
            let row = ch.row(xy);
            let base = xy * out_len;
            for (o, &q) in row.iter().enumerate() {
                probs[base + o] = pxy * q;
            }
        }
        Ok(FiniteJoint::from_parts(sizes, probs, self.entry_cap))
    }
}

/// A conditional distribution: one probability row over the output
/// variables for every joint setting of the input variables. Rows are
/// row-major over `out_sizes`, inputs row-major over `in_sizes`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondChannel {
    in_sizes: Vec<usize>,
    out_sizes: Vec<usize>,
    rows: Vec<f64>,
}

impl CondChannel {
    /// Build and validate: every row nonnegative and summing to 1 within
    /// [`NORM_TOL`].
    pub fn new(in_sizes: Vec<usize>, out_sizes: Vec<usize>, rows: Vec<f64>) -> Result<Self> {
        let n_in = checked_len(&in_sizes, DEFAULT_ENTRY_CAP)?;
        let n_out = checked_len(&out_sizes, DEFAULT_ENTRY_CAP)?;
        if n_in.checked_mul(n_out).is_none_or(|t| t != rows.len()) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "channel has {} entries, sizes imply {n_in}x{n_out}",
                rows.len()
            )));
        }
        for r in 0..n_in {
            let row = &rows[r * n_out..(r + 1) * n_out];
            let mut sum = 0.0;
            for (i, &p) in row.iter().enumerate() {
                if p < 0.0 {
                    return Err(Error::NegativeMass { index: r * n_out + i, value: p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { sum });
            }
        }
        Ok(CondChannel { in_sizes, out_sizes, rows })
    }

    /// The channel that copies its input: one input variable, same alphabet.
    pub fn identity(size: usize) -> Self {
        let mut rows = vec![0.0; size * size];
        for i in 0..size {
            rows[i * size + i] = 1.0;
        }
        CondChannel { in_sizes: vec![size], out_sizes: vec![size], rows }
    }

    /// The channel that ignores its input and always emits symbol 0.
    pub fn constant(in_sizes: Vec<usize>, out_size: usize) -> Self {
        let n_in: usize = in_sizes.iter().product();
        let mut rows = vec![0.0; n_in * out_size];
        for r in 0..n_in {
            rows[r * out_size] = 1.0;
        }
        CondChannel { in_sizes, out_sizes: vec![out_size], rows }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::DomainError(alloc::format!(
                "crossover probability {p} outside [0, 1]"
            )));
        }
        CondChannel::new(vec![2], vec![2], vec![1.0 - p, p, p, 1.0 - p])
    }

    /// One-parameter symmetric-noise family: input symbol `i` maps to output
    /// `i` with probability `1 - t` and spreads `t` evenly over the other
    /// `out_size - 1` symbols. Requires `in_size <= out_size`. With
    /// `out_size == 2` this is exactly [`CondChannel::bsc`].
    pub fn symmetric(in_size: usize, out_size: usize, t: f64) -> Result<Self> {
        if in_size > out_size || out_size < 2 {
            return Err(Error::ShapeMismatch(alloc::format!(
                "symmetric family needs in <= out and out >= 2, got {in_size} -> {out_size}"
            )));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::DomainError(alloc::format!("noise weight {t} outside [0, 1]")));
        }
        let off = t / (out_size - 1) as f64;
        let mut rows = vec![off; in_size * out_size];
        for i in 0..in_size {
            rows[i * out_size + i] = 1.0 - t;
        }
        CondChannel::new(vec![in_size], vec![out_size], rows)
    }

    /// Deterministic channel from an explicit map over flat input indices.
    pub fn from_map(
        in_sizes: Vec<usize>,
        out_size: usize,
        map: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let n_in: usize = in_sizes.iter().product();
        let mut rows = vec![0.0; n_in * out_size];
        for r in 0..n_in {
            let o = map(r);
            if o >= out_size {
                return Err(Error::BadIndex { index: o, limit: out_size });
            }
            rows[r * out_size + o] = 1.0;
        }
        Ok(CondChannel { in_sizes, out_sizes: vec![out_size], rows })
    }

    /// Combine two single-input channels into the product channel
    /// ((u1,u2) | (x,y)) with independent components. The output keeps the
    /// two variables separate; use [`CondChannel::flatten_outputs`] to view
    /// the pair as one alphabet.
    pub fn product(a: &CondChannel, b: &CondChannel) -> Result<CondChannel> {
        if a.in_sizes.len() != 1 || b.in_sizes.len() != 1 || a.out_sizes.len() != 1
            || b.out_sizes.len() != 1
        {
            return Err(Error::ShapeMismatch(String::from(
                "product needs two single-variable channels",
            )));
        }
        let (ia, ib) = (a.in_sizes[0], b.in_sizes[0]);
        let (oa, ob) = (a.out_sizes[0], b.out_sizes[0]);
        let mut rows = vec![0.0; ia * ib * oa * ob];
        for x in 0..ia {
            for y in 0..ib {
                let base = (x * ib + y) * oa * ob;
                for u1 in 0..oa {
                    let pa = a.rows[x * oa + u1];
                    for u2 in 0..ob {
                        rows[base + u1 * ob + u2] = pa * b.rows[y * ob + u2];
                    }
                }
            }
        }
        Ok(CondChannel { in_sizes: vec![ia, ib], out_sizes: vec![oa, ob], rows })
    }

    /// Merge all output variables into a single flat alphabet (rows are
    /// unchanged; only the declared shape changes).
    pub fn flatten_outputs(mut self) -> CondChannel {
        let total: usize = self.out_sizes.iter().product();
        self.out_sizes = vec![total];
        self
    }

    pub fn in_sizes(&self) -> &[usize] {
        &self.in_sizes
    }

    pub fn out_sizes(&self) -> &[usize] {
        &self.out_sizes
    }

    /// Number of joint input settings (rows).
    pub fn in_len(&self) -> usize {
        self.in_sizes.iter().product()
    }

    /// Number of joint output symbols (row width).
    pub fn out_len(&self) -> usize {
        self.out_sizes.iter().product()
    }

    pub fn row(&self, input: usize) -> &[f64] {
        let w = self.out_len();
        &self.rows[input * w..(input + 1) * w]
    }

    pub fn rows_flat(&self) -> &[f64] {
        &self.rows
    }

    fn expect_shape(&self, in_sizes: &[usize], out_vars: usize, what: &str) -> Result<()> {
        if self.in_sizes != in_sizes {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{what}: inputs {:?} do not match {:?}",
                self.in_sizes,
                in_sizes
            )));
        }
        if self.out_sizes.len() != out_vars {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{what}: expected {out_vars} output variable(s), got {}",
                self.out_sizes.len()
            )));
        }
        Ok(())
    }
}

/// Doubly symmetric binary source: X uniform on {0,1}, Y = X xor a Bernoulli
/// crossover with probability `p`. The workhorse test source.
pub fn dsbs(p: f64) -> Result<FiniteJoint> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(alloc::format!(
            "crossover probability {p} outside [0, 1]"
        )));
    }
    let same = (1.0 - p) / 2.0;
    let diff = p / 2.0;
    FiniteJoint::new(vec![2, 2], vec![same, diff, diff, same])
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen high-precision references (independent evaluation, 40 digits).
    const H_BERN_01: f64 = 0.4689955935892812;
    const MI_DSBS_01: f64 = 0.5310044064107188;
    const H_JOINT_DSBS_01: f64 = 1.4689955935892811;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn validate_rejects_negative_mass() {
        let err = FiniteJoint::new(vec![2], vec![1.1, -0.1]).unwrap_err();
        assert!(matches!(err, Error::NegativeMass { index: 1, .. }));
    }

    #[test]
    fn validate_rejects_bad_total() {
        let err = FiniteJoint::new(vec![2], vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn validate_rejects_shape_drift() {
        let err = FiniteJoint::new(vec![2, 2], vec![0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn entry_cap_is_enforced() {
        let err = FiniteJoint::with_cap(vec![10, 10], vec![0.01; 100], 99).unwrap_err();
        assert!(matches!(err, Error::TableTooLarge { cap: 99, .. }));
    }

    #[test]
    fn renormalize_is_explicit() {
        let mut j = FiniteJoint::new_unnormalized(vec![2], vec![0.2, 0.2]).unwrap();
        assert!(j.validate().is_err());
        j.renormalize().unwrap();
        assert!(j.validate().is_ok());
        assert_eq!(j.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn entropy_uniform_and_deterministic() {
        let u2 = FiniteJoint::new(vec![2], vec![0.5, 0.5]).unwrap();
        assert_eq!(u2.entropy(&[0]).unwrap(), 1.0);
        let u4 = FiniteJoint::new(vec![4], vec![0.25; 4]).unwrap();
        assert_eq!(u4.entropy(&[0]).unwrap(), 2.0);
        let det = FiniteJoint::new(vec![3], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(det.entropy(&[0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_matches_reference_bernoulli() {
        let b = FiniteJoint::new(vec![2], vec![0.9, 0.1]).unwrap();
        assert!(close(b.entropy(&[0]).unwrap(), H_BERN_01, 1e-14));
    }

    #[test]
    fn entropy_of_empty_subset_is_zero() {
        let j = dsbs(0.1).unwrap();
        assert_eq!(j.entropy(&[]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rejects_bad_and_repeated_indices() {
        let j = dsbs(0.1).unwrap();
        assert!(matches!(j.entropy(&[2]), Err(Error::BadIndex { index: 2, .. })));
        assert!(matches!(j.entropy(&[0, 0]), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn joint_entropy_dsbs() {
        let j = dsbs(0.1).unwrap();
        assert!(close(j.entropy(&[0, 1]).unwrap(), H_JOINT_DSBS_01, 1e-14));
    }

    #[test]
    fn mi_independent_is_zero() {
        let j = FiniteJoint::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let mi = j.mutual_information(&[0], &[1], &[]).unwrap();
        assert!(mi.abs() <= 1e-12);
    }

    #[test]
    fn mi_dsbs_matches_reference() {
        let j = dsbs(0.1).unwrap();
        let mi = j.mutual_information(&[0], &[1], &[]).unwrap();
        assert!(close(mi, MI_DSBS_01, 1e-14));
    }

    #[test]
    fn mi_rejects_overlap() {
        let j = dsbs(0.1).unwrap();
        let err = j.mutual_information(&[0], &[0], &[]).unwrap_err();
        assert!(matches!(err, Error::OverlappingGroups { var: 0 }));
        let err = j.mutual_information(&[0], &[1], &[1]).unwrap_err();
        assert!(matches!(err, Error::OverlappingGroups { var: 1 }));
    }

    #[test]
    fn conditional_mi_on_a_chain() {
        // X -> Y -> U with U = Y through a noisy channel: I(X;U|Y) must be 0.
        let j = dsbs(0.1).unwrap();
        let ext = j
            .extend_markov(&CondChannel::identity(2), &CondChannel::bsc(0.3).unwrap())
            .unwrap();
        let mi = ext.mutual_information(&[0], &[3], &[1]).unwrap();
        assert!(mi.abs() <= 1e-12);
    }

    #[test]
    fn marginal_orders_and_permutes() {
        let j = FiniteJoint::new(vec![2, 3], vec![0.1, 0.2, 0.0, 0.3, 0.1, 0.3]).unwrap();
        let m = j.marginal(&[1, 0]).unwrap();
        assert_eq!(m.sizes(), &[3, 2]);
        assert!(close(m.prob_at(&[2, 1]).unwrap(), 0.3, 1e-15));
        assert!(close(m.prob_at(&[0, 0]).unwrap(), 0.1, 1e-15));
    }

    #[test]
    fn extend_markov_identity_channels_copy_the_source() {
        let j = dsbs(0.1).unwrap();
        let ext = j.extend_markov(&CondChannel::identity(2), &CondChannel::identity(2)).unwrap();
        assert_eq!(ext.sizes(), &[2, 2, 2, 2]);
        for x in 0..2 {
            for y in 0..2 {
                for u1 in 0..2 {
                    for u2 in 0..2 {
                        let p = ext.prob_at(&[x, y, u1, u2]).unwrap();
                        if u1 == x && u2 == y {
                            assert_eq!(p, j.prob_at(&[x, y]).unwrap());
                        } else {
                            assert_eq!(p, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extend_markov_preserves_source_marginal() {
        let j = FiniteJoint::new(vec![2, 3], vec![0.15, 0.2, 0.05, 0.25, 0.05, 0.3]).unwrap();
        let ch1 = CondChannel::new(vec![2], vec![3], vec![0.5, 0.25, 0.25, 0.1, 0.6, 0.3]).unwrap();
        let ch2 = CondChannel::new(
            vec![3],
            vec![4],
            vec![0.4, 0.3, 0.2, 0.1, 0.25, 0.25, 0.25, 0.25, 0.7, 0.1, 0.1, 0.1],
        )
        .unwrap();
        let ext = j.extend_markov(&ch1, &ch2).unwrap();
        let back = ext.marginal(&[0, 1]).unwrap();
        for (a, b) in back.probs().iter().zip(j.probs()) {
            assert!(close(*a, *b, 1e-14));
        }
    }

    #[test]
    fn extend_markov_gives_conditional_independence() {
        let j = dsbs(0.2).unwrap();
        let ch1 = CondChannel::new(vec![2], vec![3], vec![0.6, 0.3, 0.1, 0.2, 0.2, 0.6]).unwrap();
        let ch2 = CondChannel::bsc(0.25).unwrap();
        let ext = j.extend_markov(&ch1, &ch2).unwrap();
        // First auxiliary depends on everything else only through X.
        let mi = ext.mutual_information(&[2], &[1, 3], &[0]).unwrap();
        assert!(mi.abs() <= 1e-10);
        // And symmetrically for the second through Y.
        let mi = ext.mutual_information(&[3], &[0, 2], &[1]).unwrap();
        assert!(mi.abs() <= 1e-10);
    }

    #[test]
    fn extend_markov_rejects_mismatched_channel() {
        let j = dsbs(0.1).unwrap();
        let ch_bad = CondChannel::identity(3);
        assert!(matches!(
            j.extend_markov(&ch_bad, &CondChannel::identity(2)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn extend_common_shape_and_marginal() {
        // p(x,y,z) = p(z) p(x|z) p(y|z) with binary everything.
        let mut probs = vec![0.0; 8];
        for z in 0..2usize {
            for x in 0..2usize {
                for y in 0..2usize {
                    let px = if x == z { 0.9 } else { 0.1 };
                    let py = if y == z { 0.8 } else { 0.2 };
                    probs[(x * 2 + y) * 2 + z] = 0.5 * px * py;
                }
            }
        }
        let j = FiniteJoint::new(vec![2, 2, 2], probs).unwrap();
        let ch1 = CondChannel::new(
            vec![2, 2],
            vec![2],
            vec![0.7, 0.3, 0.4, 0.6, 0.2, 0.8, 0.9, 0.1],
        )
        .unwrap();
        let ch2 = CondChannel::constant(vec![2, 2], 3);
        let ext = j.extend_markov_common(&ch1, &ch2).unwrap();
        assert_eq!(ext.sizes(), &[2, 2, 2, 2, 3]);
        let back = ext.marginal(&[0, 1, 2]).unwrap();
        for (a, b) in back.probs().iter().zip(j.probs()) {
            assert!(close(*a, *b, 1e-14));
        }
        // u1 sees (y, u2) only through (x, z).
        let mi = ext.mutual_information(&[3], &[1, 4], &[0, 2]).unwrap();
        assert!(mi.abs() <= 1e-10);
    }

    #[test]
    fn extend_general_carries_joint_outputs() {
        let j = dsbs(0.1).unwrap();
        let pair = CondChannel::product(
            &CondChannel::bsc(0.1).unwrap(),
            &CondChannel::bsc(0.2).unwrap(),
        )
        .unwrap();
        let ext = j.extend_general(&pair).unwrap();
        assert_eq!(ext.sizes(), &[2, 2, 2, 2]);
        let back = ext.marginal(&[0, 1]).unwrap();
        for (a, b) in back.probs().iter().zip(j.probs()) {
            assert!(close(*a, *b, 1e-14));
        }
    }

    #[test]
    fn channel_row_validation() {
        let err = CondChannel::new(vec![1], vec![2], vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
        let err = CondChannel::new(vec![1], vec![2], vec![1.5, -0.5]).unwrap_err();
        assert!(matches!(err, Error::NegativeMass { .. }));
        assert!(CondChannel::new(vec![2], vec![2], vec![0.9, 0.1, 0.3, 0.7]).is_ok());
    }

    #[test]
    fn product_channel_factorizes() {
        let a = CondChannel::bsc(0.1).unwrap();
        let b = CondChannel::bsc(0.3).unwrap();
        let p = CondChannel::product(&a, &b).unwrap();
        assert_eq!(p.in_sizes(), &[2, 2]);
        assert_eq!(p.out_sizes(), &[2, 2]);
        // row (x=1, y=0), output (u1=1, u2=1): 0.9 * 0.3
        assert!(close(p.row(2)[3], 0.9 * 0.3, 1e-15));
        let flat = p.flatten_outputs();
        assert_eq!(flat.out_sizes(), &[4]);
    }

    #[test]
    fn symmetric_family_endpoints() {
        let id_like = CondChannel::symmetric(2, 3, 0.0).unwrap();
        assert_eq!(id_like.row(0), &[1.0, 0.0, 0.0]);
        let spread = CondChannel::symmetric(2, 3, 1.0).unwrap();
        assert_eq!(spread.row(1)[1], 0.0);
        assert!(close(spread.row(1)[0], 0.5, 1e-15));
    }

    #[test]
    fn dsbs_table() {
        let j = dsbs(0.2).unwrap();
        assert_eq!(j.probs(), &[0.4, 0.1, 0.1, 0.4]);
        assert!(dsbs(1.5).is_err());
    }
}
