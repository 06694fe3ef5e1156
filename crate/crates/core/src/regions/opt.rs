//! Cap-constrained key-rate maximization over test channels.
//!
//! Strategy: a coarse grid over one-parameter symmetric-noise channel
//! families picks promising feasible seeds; each restart then runs projected
//! coordinate ascent on the channel rows (finite-difference ascent direction
//! per simplex row, Euclidean projection back, backtracking step). Rate caps
//! are enforced by exact filtering — any iterate that violates a cap is
//! rejected outright, never penalized approximately.
//!
//! Determinism: restart r draws from a ChaCha stream seeded by
//! (master seed, restart index); ascent itself is deterministic; the final
//! reduction breaks exact key-rate ties toward the lexicographically
//! smallest flattened channel. Constant channels sit at rate zero and are
//! always feasible (caps are validated nonnegative), so the search always
//! returns a point.

use alloc::string::String;
use alloc::{vec, vec::Vec};

use rand_chacha::ChaCha12Rng;

use super::{common_inner_point, inner_point, trusted_point, BoundPoint, TrustedBoundPoint};
use crate::err::{Error, Result};
use crate::math;
use crate::prob::{CondChannel, FiniteJoint};
use crate::rng::{next_unit, rng_for, STREAM_RESTART_BASE};

/// Knobs for the multi-start search. `Default` gives the reference setting:
/// 32 restarts, 300 ascent sweeps, 1e-7 bit convergence, 51 grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: u32,
    pub max_iters: u32,
    pub convergence_tol: f64,
    pub grid_resolution: u32,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 32,
            max_iters: 300,
            convergence_tol: 1e-7,
            grid_resolution: 51,
            seed: 0x52454c41594b4559, // arbitrary fixed default; callers overriding seeds get fresh searches
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::ConfigInvalid(String::from("restarts must be at least 1")));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::ConfigInvalid(String::from("convergence_tol must be positive")));
        }
        if self.grid_resolution < 2 {
            return Err(Error::ConfigInvalid(String::from("grid_resolution must be at least 2")));
        }
        Ok(())
    }
}

/// Upper limits on the three communication rates. `f64::INFINITY` means
/// unconstrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCaps {
    pub r1: f64,
    pub r2: f64,
    pub rc: f64,
}

impl RateCaps {
    pub fn unbounded() -> Self {
        RateCaps { r1: f64::INFINITY, r2: f64::INFINITY, rc: f64::INFINITY }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("r1", self.r1), ("r2", self.r2), ("rc", self.rc)] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::ConfigInvalid(alloc::format!(
                    "cap {name} = {v} must be nonnegative"
                )));
            }
        }
        Ok(())
    }

    fn admits(&self, p: &BoundPoint) -> bool {
        p.rates.r1 <= self.r1 && p.rates.r2 <= self.r2 && p.rates.rc <= self.rc
    }
}

/// Result of a two-channel search (untrusted or common-component mode).
#[derive(Debug, Clone)]
pub struct OptOutcome {
    pub best_rk: f64,
    pub ch1: CondChannel,
    pub ch2: CondChannel,
    /// Full evaluation at the winning channels.
    pub point: BoundPoint,
    /// Best feasible key rate found by each restart, in restart order.
    pub restart_best: Vec<f64>,
}

/// Result of the single-channel trusted-relay search.
#[derive(Debug, Clone)]
pub struct TrustedOptOutcome {
    pub best_rk: f64,
    pub ch: CondChannel,
    pub point: TrustedBoundPoint,
    pub restart_best: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Generic simplex-rows search engine.
// ---------------------------------------------------------------------------

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    let mut k = 0;
    for (i, &s) in sorted.iter().enumerate() {
        acc += s;
        let t = (acc - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
            k = i + 1;
        }
    }
    debug_assert!(k > 0);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
        sum += *x;
    }
    // kill residual rounding so downstream row validation never trips
    if sum > 0.0 {
        for x in v.iter_mut() {
            *x /= sum;
        }
    } else {
        v[0] = 1.0;
    }
}

fn dirichlet_row(dim: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let mut row = vec![0.0; dim];
    let mut sum = 0.0;
    for x in row.iter_mut() {
        // exponential draws normalized: flat Dirichlet on the simplex
        let u = next_unit(rng).max(1e-300);
        *x = -math::ln(u);
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
    row
}

fn lex_less(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    for (ra, rb) in a.iter().zip(b) {
        for (&x, &y) in ra.iter().zip(rb) {
            match x.total_cmp(&y) {
                core::cmp::Ordering::Less => return true,
                core::cmp::Ordering::Greater => return false,
                core::cmp::Ordering::Equal => {}
            }
        }
    }
    false
}

/// One projected-coordinate-ascent run from `rows`. `eval` returns the
/// objective when the point is feasible, `None` otherwise. Returns the best
/// objective reached; `rows` holds the matching point.
fn ascend(
    rows: &mut [Vec<f64>],
    eval: &mut dyn FnMut(&[Vec<f64>]) -> Option<f64>,
    max_iters: u32,
    tol: f64,
) -> Option<f64> {
    const FD_STEP: f64 = 1e-6;
    const BACKTRACKS: u32 = 9;
    let mut best = eval(rows)?;
    for _ in 0..max_iters {
        let mut sweep_gain = 0.0;
        for r in 0..rows.len() {
            let dim = rows[r].len();
            if dim < 2 {
                continue;
            }
            // finite-difference gradient along renormalized coordinate bumps
            let mut grad = vec![0.0; dim];
            for j in 0..dim {
                let saved = rows[r].clone();
                for (jj, x) in rows[r].iter_mut().enumerate() {
                    let bumped = if jj == j { saved[jj] + FD_STEP } else { saved[jj] };
                    *x = bumped / (1.0 + FD_STEP);
                }
                grad[j] = match eval(rows) {
                    Some(v) => (v - best) / FD_STEP,
                    None => -1.0, // stepping there leaves the feasible set
                };
                rows[r] = saved;
            }
            let mean = grad.iter().sum::<f64>() / dim as f64;
            let mut scale = 0.0f64;
            for g in grad.iter_mut() {
                *g -= mean;
                scale = scale.max(g.abs());
            }
            if scale < 1e-14 {
                continue;
            }
            // backtracking line search along the projected direction
            let mut step = 0.5;
            let saved = rows[r].clone();
            for _ in 0..BACKTRACKS {
                for (j, x) in rows[r].iter_mut().enumerate() {
                    *x = saved[j] + step * grad[j] / scale;
                }
                project_simplex(&mut rows[r]);
                if let Some(v) = eval(rows) {
                    if v > best + 1e-15 {
                        sweep_gain += v - best;
                        best = v;
                        break;
                    }
                }
                rows[r] = saved.clone();
                step *= 0.5;
            }
        }
        if sweep_gain < tol {
            break;
        }
    }
    Some(best)
}

/// Blend `rows` toward the deterministic constant rows until `eval` accepts
/// the point. k walks 0, 1/8, …, 1; k = 1 is the constant point itself,
/// which is feasible by construction.
fn blend_to_feasible(
    rows: &mut [Vec<f64>],
    eval: &mut dyn FnMut(&[Vec<f64>]) -> Option<f64>,
) -> Option<f64> {
    let raw = rows.to_vec();
    for step in 0..=8 {
        let k = step as f64 / 8.0;
        for (r, row) in rows.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let constant = if j == 0 { 1.0 } else { 0.0 };
                *x = (1.0 - k) * raw[r][j] + k * constant;
            }
        }
        if let Some(v) = eval(rows) {
            return Some(v);
        }
    }
    None
}

struct SearchSpec<'a> {
    row_dims: Vec<usize>,
    /// Deterministic seed points tried before random restarts, best first.
    fixed_seeds: Vec<Vec<Vec<f64>>>,
    eval: &'a mut dyn FnMut(&[Vec<f64>]) -> Option<f64>,
}

struct SearchBest {
    value: f64,
    rows: Vec<Vec<f64>>,
    restart_best: Vec<f64>,
}

fn run_search(spec: SearchSpec<'_>, cfg: &OptimizerConfig) -> SearchBest {
    let SearchSpec { row_dims, fixed_seeds, eval } = spec;
    let constant: Vec<Vec<f64>> = row_dims
        .iter()
        .map(|&d| {
            let mut row = vec![0.0; d];
            row[0] = 1.0;
            row
        })
        .collect();

    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut restart_best = Vec::with_capacity(cfg.restarts as usize);

    for restart in 0..cfg.restarts {
        let mut rows: Vec<Vec<f64>> = match restart as usize {
            0 => constant.clone(),
            r if r - 1 < fixed_seeds.len() => fixed_seeds[r - 1].clone(),
            _ => {
                let mut rng = rng_for(cfg.seed, STREAM_RESTART_BASE + restart as u64);
                row_dims.iter().map(|&d| dirichlet_row(d, &mut rng)).collect()
            }
        };
        let started = match eval(&rows) {
            Some(_) => true,
            None => blend_to_feasible(&mut rows, eval).is_some(),
        };
        let reached = if started { ascend(&mut rows, eval, cfg.max_iters, cfg.convergence_tol) } else { None };
        let reached = match reached {
            Some(v) => v,
            None => {
                // fall back to the always-feasible constant point
                rows = constant.clone();
                eval(&rows).expect("constant channels must be feasible")
            }
        };
        restart_best.push(reached);
        let replace = match &best {
            None => true,
            Some((bv, brows)) => {
                reached > *bv || (reached == *bv && lex_less(&rows, brows))
            }
        };
        if replace {
            best = Some((reached, rows));
        }
    }

    let (value, rows) = best.expect("at least one restart");
    SearchBest { value, rows, restart_best }
}

// ---------------------------------------------------------------------------
// Concrete searches.
// ---------------------------------------------------------------------------

fn rows_of(ch: &CondChannel) -> Vec<Vec<f64>> {
    (0..ch.in_len()).map(|r| ch.row(r).to_vec()).collect()
}

fn grid_ts(resolution: u32) -> impl Iterator<Item = f64> {
    let n = resolution.max(2);
    (0..n).map(move |i| i as f64 / (n - 1) as f64)
}

/// Maximize the untrusted-relay inner-bound key rate over product test
/// channels at the cardinality bounds (|U1| = |X|+1, |U2| = |Y|+1), subject
/// to the rate caps. Returns the best key rate, the winning channels, and
/// per-restart bests.
pub fn max_key_rate_inner(
    source: &FiniteJoint,
    caps: RateCaps,
    cfg: &OptimizerConfig,
) -> Result<OptOutcome> {
    cfg.validate()?;
    caps.validate()?;
    if source.num_vars() != 2 {
        return Err(Error::ShapeMismatch(String::from(
            "inner-bound search needs a two-variable source",
        )));
    }
    let (sx, sy) = (source.sizes()[0], source.sizes()[1]);
    let (su1, su2) = (sx + 1, sy + 1);

    let build = |rows: &[Vec<f64>]| -> Result<(CondChannel, CondChannel)> {
        let flat1: Vec<f64> = rows[..sx].iter().flatten().copied().collect();
        let flat2: Vec<f64> = rows[sx..].iter().flatten().copied().collect();
        Ok((
            CondChannel::new(vec![sx], vec![su1], flat1)?,
            CondChannel::new(vec![sy], vec![su2], flat2)?,
        ))
    };
    let mut eval = |rows: &[Vec<f64>]| -> Option<f64> {
        let (ch1, ch2) = build(rows).ok()?;
        let p = inner_point(source, &ch1, &ch2).ok()?;
        caps.admits(&p).then_some(p.rates.rk)
    };

    // Coarse symmetric-family grid supplies the deterministic seeds.
    let mut grid: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    for t1 in grid_ts(cfg.grid_resolution) {
        let c1 = CondChannel::symmetric(sx, su1, t1)?;
        for t2 in grid_ts(cfg.grid_resolution) {
            let c2 = CondChannel::symmetric(sy, su2, t2)?;
            let mut rows = rows_of(&c1);
            rows.extend(rows_of(&c2));
            if let Some(v) = eval(&rows) {
                grid.push((v, rows));
            }
        }
    }
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    grid.truncate(8);
    let fixed_seeds: Vec<_> = grid.into_iter().map(|(_, rows)| rows).collect();

    let mut dims = vec![su1; sx];
    dims.extend(vec![su2; sy]);
    let found = run_search(SearchSpec { row_dims: dims, fixed_seeds, eval: &mut eval }, cfg);

    let (ch1, ch2) = build(&found.rows)?;
    let point = inner_point(source, &ch1, &ch2)?;
    Ok(OptOutcome { best_rk: found.value, ch1, ch2, point, restart_best: found.restart_best })
}

/// Common-component sibling of [`max_key_rate_inner`]: channels read (x, z)
/// and (y, z), alphabets at the |X||Z|+2 / |Y||Z|+2 bounds, objective the
/// common-component key rate.
pub fn max_key_rate_common(
    source: &FiniteJoint,
    caps: RateCaps,
    cfg: &OptimizerConfig,
) -> Result<OptOutcome> {
    cfg.validate()?;
    caps.validate()?;
    if source.num_vars() != 3 {
        return Err(Error::ShapeMismatch(String::from(
            "common-component search needs a three-variable source",
        )));
    }
    let (sx, sy, sz) = (source.sizes()[0], source.sizes()[1], source.sizes()[2]);
    let (in1, in2) = (sx * sz, sy * sz);
    let (su1, su2) = (in1 + 2, in2 + 2);

    let build = |rows: &[Vec<f64>]| -> Result<(CondChannel, CondChannel)> {
        let flat1: Vec<f64> = rows[..in1].iter().flatten().copied().collect();
        let flat2: Vec<f64> = rows[in1..].iter().flatten().copied().collect();
        Ok((
            CondChannel::new(vec![sx, sz], vec![su1], flat1)?,
            CondChannel::new(vec![sy, sz], vec![su2], flat2)?,
        ))
    };
    let mut eval = |rows: &[Vec<f64>]| -> Option<f64> {
        let (ch1, ch2) = build(rows).ok()?;
        let p = common_inner_point(source, &ch1, &ch2).ok()?;
        caps.admits(&p).then_some(p.rates.rk)
    };

    let mut grid: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    for t1 in grid_ts(cfg.grid_resolution) {
        let c1 = CondChannel::symmetric(in1, su1, t1)?;
        let rows1 = rows_of(&c1);
        for t2 in grid_ts(cfg.grid_resolution) {
            let c2 = CondChannel::symmetric(in2, su2, t2)?;
            let mut rows = rows1.clone();
            rows.extend(rows_of(&c2));
            if let Some(v) = eval(&rows) {
                grid.push((v, rows));
            }
        }
    }
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    grid.truncate(8);
    let fixed_seeds: Vec<_> = grid.into_iter().map(|(_, rows)| rows).collect();

    let mut dims = vec![su1; in1];
    dims.extend(vec![su2; in2]);
    let found = run_search(SearchSpec { row_dims: dims, fixed_seeds, eval: &mut eval }, cfg);

    let (ch1, ch2) = build(&found.rows)?;
    let point = common_inner_point(source, &ch1, &ch2)?;
    Ok(OptOutcome { best_rk: found.value, ch1, ch2, point, restart_best: found.restart_best })
}

/// Maximize the trusted-relay key rate over relay observation channels
/// (v|x,y) with |V| = |X||Y|+2, subject to a broadcast-rate cap.
pub fn max_key_rate_trusted(
    source: &FiniteJoint,
    rc_cap: f64,
    cfg: &OptimizerConfig,
) -> Result<TrustedOptOutcome> {
    cfg.validate()?;
    if rc_cap.is_nan() || rc_cap < 0.0 {
        return Err(Error::ConfigInvalid(alloc::format!(
            "cap rc = {rc_cap} must be nonnegative"
        )));
    }
    if source.num_vars() != 2 {
        return Err(Error::ShapeMismatch(String::from(
            "trusted search needs a two-variable source",
        )));
    }
    let (sx, sy) = (source.sizes()[0], source.sizes()[1]);
    let n_in = sx * sy;
    let sv = n_in + 2;

    let build = |rows: &[Vec<f64>]| -> Result<CondChannel> {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        CondChannel::new(vec![sx, sy], vec![sv], flat)
    };
    let mut eval = |rows: &[Vec<f64>]| -> Option<f64> {
        let ch = build(rows).ok()?;
        let p = trusted_point(source, &ch).ok()?;
        (p.rc <= rc_cap).then_some(p.rk)
    };

    // Seeds: forward-x and forward-y maps, then the symmetric family grid.
    let mut fixed_seeds: Vec<Vec<Vec<f64>>> = Vec::new();
    for map in [
        CondChannel::from_map(vec![sx, sy], sv, |xy| xy / sy)?, // v = x
        CondChannel::from_map(vec![sx, sy], sv, |xy| xy % sy)?, // v = y
    ] {
        let rows = rows_of(&map);
        if eval(&rows).is_some() {
            fixed_seeds.push(rows);
        }
    }
    let mut grid: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    for t in grid_ts(cfg.grid_resolution) {
        let c = CondChannel::symmetric(n_in, sv, t)?;
        let rows = rows_of(&c);
        if let Some(v) = eval(&rows) {
            grid.push((v, rows));
        }
    }
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    grid.truncate(6);
    fixed_seeds.extend(grid.into_iter().map(|(_, rows)| rows));

    let found =
        run_search(SearchSpec { row_dims: vec![sv; n_in], fixed_seeds, eval: &mut eval }, cfg);

    let ch = build(&found.rows)?;
    let point = trusted_point(source, &ch)?;
    Ok(TrustedOptOutcome { best_rk: found.value, ch, point, restart_best: found.restart_best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::dsbs;

    const CAP_01: f64 = 0.5310044064107188; // 1 - h(0.1)

    fn quick_cfg() -> OptimizerConfig {
        OptimizerConfig { restarts: 6, max_iters: 60, convergence_tol: 1e-6, grid_resolution: 21, seed: 7 }
    }

    #[test]
    fn unbounded_caps_reach_the_shared_mi() {
        let src = dsbs(0.1).unwrap();
        let out = max_key_rate_inner(&src, RateCaps::unbounded(), &quick_cfg()).unwrap();
        assert!(out.best_rk >= CAP_01 - 0.01, "got {}", out.best_rk);
        assert!(out.best_rk <= CAP_01 + 1e-9);
        assert_eq!(out.restart_best.len(), 6);
    }

    #[test]
    fn caps_are_respected_exactly() {
        let src = dsbs(0.1).unwrap();
        let caps = RateCaps { r1: 0.1, r2: 0.1, rc: 0.1 };
        let out = max_key_rate_inner(&src, caps, &quick_cfg()).unwrap();
        assert!(out.point.rates.r1 <= 0.1);
        assert!(out.point.rates.r2 <= 0.1);
        assert!(out.point.rates.rc <= 0.1);
        assert!(out.best_rk > 0.0);
    }

    #[test]
    fn search_is_deterministic() {
        let src = dsbs(0.2).unwrap();
        let caps = RateCaps { r1: 0.3, r2: 0.3, rc: 0.3 };
        let a = max_key_rate_inner(&src, caps, &quick_cfg()).unwrap();
        let b = max_key_rate_inner(&src, caps, &quick_cfg()).unwrap();
        assert_eq!(a.best_rk.to_bits(), b.best_rk.to_bits());
        assert_eq!(a.ch1.rows_flat(), b.ch1.rows_flat());
        assert_eq!(a.ch2.rows_flat(), b.ch2.rows_flat());
        assert_eq!(a.restart_best, b.restart_best);
    }

    #[test]
    fn zero_caps_yield_zero_key_rate_not_an_error() {
        let src = dsbs(0.1).unwrap();
        let caps = RateCaps { r1: 0.0, r2: 0.0, rc: 0.0 };
        let out = max_key_rate_inner(&src, caps, &quick_cfg()).unwrap();
        assert_eq!(out.best_rk, 0.0);
    }

    #[test]
    fn config_validation() {
        let src = dsbs(0.1).unwrap();
        let mut cfg = quick_cfg();
        cfg.restarts = 0;
        assert!(matches!(
            max_key_rate_inner(&src, RateCaps::unbounded(), &cfg),
            Err(Error::ConfigInvalid(_))
        ));
        let mut cfg = quick_cfg();
        cfg.convergence_tol = 0.0;
        assert!(max_key_rate_inner(&src, RateCaps::unbounded(), &cfg).is_err());
        let caps = RateCaps { r1: -0.1, r2: 1.0, rc: 1.0 };
        assert!(matches!(
            max_key_rate_inner(&src, caps, &quick_cfg()),
            Err(Error::ConfigInvalid(_))
        ));
    }

    #[test]
    fn trusted_search_finds_forwarding() {
        let src = dsbs(0.1).unwrap();
        let out = max_key_rate_trusted(&src, f64::INFINITY, &quick_cfg()).unwrap();
        // forwarding either source attains min(I(X;V), I(Y;V)) = 1 - h(p)
        assert!(out.best_rk >= CAP_01 - 1e-6, "got {}", out.best_rk);
        let capped = max_key_rate_trusted(&src, 0.2, &quick_cfg()).unwrap();
        assert!(capped.point.rc <= 0.2);
    }
}
