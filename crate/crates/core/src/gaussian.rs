//! Closed forms for the jointly Gaussian source pair with additive-Gaussian
//! quantization channels: the achievable rate point for chosen noise
//! variances, the noise variance realizing a target description rate, the
//! cap-limited key rate, the one-way reference capacities, and the
//! comparison sweeps that plot them against each other.
//!
//! All rates are in bits. Unbounded communication rates are written as
//! `f64::INFINITY`; formulas take the analytic limit where it exists and
//! return [`Error::DomainError`] where it does not. Perfect correlation
//! (rho = 1) makes the capped key rate diverge and is rejected there.

use alloc::format;
use alloc::vec::Vec;

use crate::err::{Error, Result};
use crate::math;
use crate::regions::RatePoint;

/// Source correlation plus the two quantization noise variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    /// Correlation coefficient of the unit-variance source pair, in [0, 1].
    pub rho: f64,
    /// Noise variance of user 1's description channel; must be positive.
    pub nq1: f64,
    /// Noise variance of user 2's description channel; must be positive.
    pub nq2: f64,
}

impl GaussianParams {
    pub fn new(rho: f64, nq1: f64, nq2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::DomainError(format!("rho = {rho} outside [0, 1]")));
        }
        for (name, v) in [("nq1", nq1), ("nq2", nq2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::DomainError(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(GaussianParams { rho, nq1, nq2 })
    }
}

fn check_rho_strict(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::DomainError(format!("rho = {rho} outside [0, 1)")));
    }
    Ok(())
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::DomainError(format!("rate {name} = {v} must be nonnegative")));
    }
    Ok(())
}

/// Achievable rates for fixed noise variances: description rates
/// r_i = ½·log2((1 + nq_i − rho²) / nq_i), relay broadcast rc = max(r1, r2),
/// and key rate
/// rk = ½·log2(((1+nq1)(1+nq2) − rho²) / ((1+nq1−rho²)(1+nq2−rho²))).
pub fn gaussian_inner_point(p: &GaussianParams) -> Result<RatePoint> {
    let p = GaussianParams::new(p.rho, p.nq1, p.nq2)?;
    let rr = p.rho * p.rho;
    let r1 = 0.5 * math::log2((1.0 + p.nq1 - rr) / p.nq1);
    let r2 = 0.5 * math::log2((1.0 + p.nq2 - rr) / p.nq2);
    let rk = 0.5
        * math::log2(
            ((1.0 + p.nq1) * (1.0 + p.nq2) - rr) / ((1.0 + p.nq1 - rr) * (1.0 + p.nq2 - rr)),
        );
    Ok(RatePoint { r1, r2, rc: r1.max(r2), rk: rk.max(0.0) })
}

/// The noise variance that makes a description rate exactly
/// min{ri, rc}: nq = (1 − rho²) / (2^{2·min{ri, rc}} − 1).
///
/// Requires 0 < min{ri, rc} < ∞. The zero-noise limit as the rate grows
/// without bound is not representable (the formula tends to 0, which is not
/// a valid noise variance), so a literal infinite budget is rejected.
pub fn noise_for_rates(rho: f64, ri: f64, rc: f64) -> Result<f64> {
    check_rho_strict(rho)?;
    check_rate("ri", ri)?;
    check_rate("rc", rc)?;
    let m = ri.min(rc);
    if m <= 0.0 {
        return Err(Error::DomainError(format!("min rate {m} must be positive")));
    }
    if !m.is_finite() {
        return Err(Error::DomainError(format!(
            "min rate is infinite; the zero-noise limit has no finite variance"
        )));
    }
    Ok((1.0 - rho * rho) / (math::exp2(2.0 * m) - 1.0))
}

/// Largest key rate under per-link caps:
/// ½·log2((1 − rho²·2^{−2(min{r1,rc} + min{r2,rc})}) / (1 − rho²)).
/// Infinite rates give the analytic limit ½·log2(1/(1 − rho²)).
pub fn max_key_rate_gaussian(rho: f64, r1: f64, r2: f64, rc: f64) -> Result<f64> {
    check_rho_strict(rho)?;
    check_rate("r1", r1)?;
    check_rate("r2", r2)?;
    check_rate("rc", rc)?;
    let m = r1.min(rc) + r2.min(rc);
    let rr = rho * rho;
    Ok(0.5 * math::log2((1.0 - rr * math::exp2(-2.0 * m)) / (1.0 - rr)))
}

/// Reference point: key rate of the one-way system from user i to the other
/// user, ½·log2((1 − rho²·2^{−2·min{ri,rc}}) / (1 − rho²)).
pub fn oneway_capacity(rho: f64, ri: f64, rc: f64) -> Result<f64> {
    check_rho_strict(rho)?;
    check_rate("ri", ri)?;
    check_rate("rc", rc)?;
    let m = ri.min(rc);
    let rr = rho * rho;
    Ok(0.5 * math::log2((1.0 - rr * math::exp2(-2.0 * m)) / (1.0 - rr)))
}

/// Which comparison to sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    /// Fix the rates; sweep the time-sharing weight alpha over [0, 1] and
    /// report cstar = alpha·c1to2 + (1−alpha)·c2to1 against the fixed rk.
    Alpha { r1: f64, r2: f64 },
    /// Tie both description rates to the broadcast cap, r1 = r2 = beta·rc,
    /// and sweep beta over [0, 2] so the saturated plateau past beta = 1 is
    /// visible.
    Beta,
}

/// One sweep sample: the sweep variable, the two-user key rate, both one-way
/// capacities, and their time-sharing combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub rk: f64,
    pub c1to2: f64,
    pub c2to1: f64,
    pub cstar: f64,
}

/// Evaluate the key rate against one-way alternatives on a uniform grid of
/// `points` samples including both endpoints (at least 2).
pub fn comparison_sweep(mode: SweepMode, rho: f64, rc: f64, points: u32) -> Result<Vec<SweepRow>> {
    if points < 2 {
        return Err(Error::ConfigInvalid(format!("sweep needs at least 2 points, got {points}")));
    }
    check_rho_strict(rho)?;
    check_rate("rc", rc)?;
    let n = points as usize;
    let mut rows = Vec::with_capacity(n);
    match mode {
        SweepMode::Alpha { r1, r2 } => {
            let rk = max_key_rate_gaussian(rho, r1, r2, rc)?;
            let c1to2 = oneway_capacity(rho, r1, rc)?;
            let c2to1 = oneway_capacity(rho, r2, rc)?;
            for i in 0..n {
                let x = i as f64 / (n - 1) as f64;
                rows.push(SweepRow { x, rk, c1to2, c2to1, cstar: x * c1to2 + (1.0 - x) * c2to1 });
            }
        }
        SweepMode::Beta => {
            for i in 0..n {
                let x = 2.0 * i as f64 / (n - 1) as f64;
                let r = x * rc;
                let rk = max_key_rate_gaussian(rho, r, r, rc)?;
                let c = oneway_capacity(rho, r, rc)?;
                rows.push(SweepRow { x, rk, c1to2: c, c2to1: c, cstar: c });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    // frozen high-precision evaluations of the closed forms
    const NOISE_06_06_1: f64 = 0.49329553179067737;
    const NOISE_06_04_1: f64 = 0.8635798503543851;
    const NOISE_0_1_1: f64 = 0.3333333333333333;
    const RK_FIG_A: f64 = 0.2538973200993481;
    const C_1TO2: f64 = 0.19898779331910627;
    const C_2TO1: f64 = 0.15483757492128683;
    const RK_LIMIT_06: f64 = 0.32192809488736235;
    const RK_LIMIT_03: f64 = 0.06803077478801421;
    const RK_BETA_025: f64 = 0.17877600230904184;
    const RK_BETA_050: f64 = 0.2538973200993481;
    const RK_BETA_075: f64 = 0.28871441401787434;
    const RK_BETA_100: f64 = 0.30551239865367613;

    #[test]
    fn params_validation() {
        assert!(GaussianParams::new(-0.1, 1.0, 1.0).is_err());
        assert!(GaussianParams::new(1.1, 1.0, 1.0).is_err());
        assert!(GaussianParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(GaussianParams::new(0.5, 0.0, 1.0).is_err());
        assert!(GaussianParams::new(0.5, 1.0, -2.0).is_err());
        assert!(GaussianParams::new(0.5, f64::INFINITY, 1.0).is_err());
        assert!(GaussianParams::new(1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn independent_sources_key_nothing() {
        let p = GaussianParams::new(0.0, 0.7, 1.3).unwrap();
        let pt = gaussian_inner_point(&p).unwrap();
        assert_eq!(pt.rk, 0.0);
        assert!(pt.r1 > 0.0 && pt.r2 > 0.0);
    }

    #[test]
    fn matched_noise_hits_the_target_description_rate() {
        let p = GaussianParams::new(0.6, NOISE_06_06_1, NOISE_06_06_1).unwrap();
        let pt = gaussian_inner_point(&p).unwrap();
        assert!((pt.r1 - 0.6).abs() < 1e-12, "r1 = {}", pt.r1);
        assert!((pt.r2 - 0.6).abs() < 1e-12);
        assert_eq!(pt.rc, pt.r1.max(pt.r2));
    }

    #[test]
    fn huge_noise_means_useless_descriptions() {
        let p = GaussianParams::new(0.6, 1e9, 1e9).unwrap();
        let pt = gaussian_inner_point(&p).unwrap();
        assert!(pt.r1 < 1e-8);
        assert!(pt.rk < 1e-8);
    }

    #[test]
    fn noise_selection_matches_frozen_values() {
        assert!((noise_for_rates(0.6, 0.6, 1.0).unwrap() - NOISE_06_06_1).abs() < 1e-15);
        assert!((noise_for_rates(0.6, 0.4, 1.0).unwrap() - NOISE_06_04_1).abs() < 1e-15);
        assert!((noise_for_rates(0.0, 1.0, 1.0).unwrap() - NOISE_0_1_1).abs() < 1e-15);
        // the broadcast cap binds when smaller than the description rate
        assert_eq!(
            noise_for_rates(0.6, 5.0, 0.6).unwrap().to_bits(),
            noise_for_rates(0.6, 0.6, 1.0).unwrap().to_bits()
        );
    }

    #[test]
    fn noise_selection_domain_errors() {
        assert!(noise_for_rates(0.6, 0.0, 1.0).is_err());
        assert!(noise_for_rates(0.6, 1.0, 0.0).is_err());
        assert!(noise_for_rates(0.6, f64::INFINITY, f64::INFINITY).is_err());
        assert!(noise_for_rates(1.0, 0.6, 1.0).is_err());
        assert!(noise_for_rates(-0.2, 0.6, 1.0).is_err());
        assert!(noise_for_rates(0.6, -0.6, 1.0).is_err());
    }

    #[test]
    fn capped_key_rate_frozen_point() {
        let rk = max_key_rate_gaussian(0.6, 0.6, 0.4, 1.0).unwrap();
        assert!((rk - RK_FIG_A).abs() < 1e-15, "rk = {rk}");
    }

    #[test]
    fn capped_key_rate_edges() {
        assert_eq!(max_key_rate_gaussian(0.9, 0.0, 0.0, 1.0).unwrap(), 0.0);
        let lim = max_key_rate_gaussian(0.6, f64::INFINITY, f64::INFINITY, f64::INFINITY).unwrap();
        assert!((lim - RK_LIMIT_06).abs() < 1e-15);
        let lim3 = max_key_rate_gaussian(0.3, f64::INFINITY, 9.0, 9.0).unwrap();
        assert!((lim3 - RK_LIMIT_03).abs() < 1e-12);
        assert!(max_key_rate_gaussian(1.0, 0.5, 0.5, 1.0).is_err());
        assert!(max_key_rate_gaussian(0.6, -0.1, 0.5, 1.0).is_err());
    }

    #[test]
    fn capped_key_rate_monotone_and_saturating() {
        let base = max_key_rate_gaussian(0.6, 0.4, 0.4, 1.0).unwrap();
        assert!(max_key_rate_gaussian(0.6, 0.5, 0.4, 1.0).unwrap() > base);
        assert!(max_key_rate_gaussian(0.6, 0.4, 0.5, 1.0).unwrap() > base);
        // rc stops mattering once it clears both description rates
        let a = max_key_rate_gaussian(0.6, 0.6, 0.4, 0.6).unwrap();
        let b = max_key_rate_gaussian(0.6, 0.6, 0.4, 5.0).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn oneway_frozen_points() {
        assert!((oneway_capacity(0.6, 0.6, 1.0).unwrap() - C_1TO2).abs() < 1e-15);
        assert!((oneway_capacity(0.6, 0.4, 1.0).unwrap() - C_2TO1).abs() < 1e-15);
        assert_eq!(oneway_capacity(0.6, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn selection_rule_reproduces_the_capped_key_rate() {
        let (rho, r1, r2, rc) = (0.6, 0.6, 0.4, 1.0);
        let p = GaussianParams::new(
            rho,
            noise_for_rates(rho, r1, rc).unwrap(),
            noise_for_rates(rho, r2, rc).unwrap(),
        )
        .unwrap();
        let pt = gaussian_inner_point(&p).unwrap();
        let direct = max_key_rate_gaussian(rho, r1, r2, rc).unwrap();
        assert!((pt.rk - direct).abs() < 1e-12);
        assert!((pt.r1 - r1).abs() < 1e-12);
        assert!((pt.r2 - r2).abs() < 1e-12);
    }

    #[test]
    fn two_way_key_beats_both_oneway_capacities() {
        for &rho in &[0.3, 0.6, 0.9] {
            for &r1 in &[0.2, 0.6, 1.5] {
                for &r2 in &[0.1, 0.4, 2.0] {
                    for &rc in &[0.3, 1.0, f64::INFINITY] {
                        let rk = max_key_rate_gaussian(rho, r1, r2, rc).unwrap();
                        let c1 = oneway_capacity(rho, r1, rc).unwrap();
                        let c2 = oneway_capacity(rho, r2, rc).unwrap();
                        assert!(rk >= c1.max(c2) - 1e-12, "rho={rho} r1={r1} r2={r2} rc={rc}");
                    }
                }
            }
        }
        // strictly better at the reference comparison point
        let rk = max_key_rate_gaussian(0.6, 0.6, 0.4, 1.0).unwrap();
        assert!(rk - C_1TO2.max(C_2TO1) > 0.05);
    }

    #[test]
    fn alpha_sweep_shape_and_ordering() {
        let rows =
            comparison_sweep(SweepMode::Alpha { r1: 0.6, r2: 0.4 }, 0.6, 1.0, 101).unwrap();
        assert_eq!(rows.len(), 101);
        assert_eq!(rows[0].x, 0.0);
        assert_eq!(rows[100].x, 1.0);
        // key rate does not depend on the time-sharing weight
        assert!(rows.iter().all(|r| r.rk.to_bits() == rows[0].rk.to_bits()));
        assert!((rows[100].cstar - C_1TO2).abs() < 1e-15);
        assert!((rows[0].cstar - C_2TO1).abs() < 1e-15);
        for r in &rows {
            assert!(r.rk > r.cstar, "alpha = {}", r.x);
        }
    }

    #[test]
    fn beta_sweep_saturates_past_one() {
        let rows = comparison_sweep(SweepMode::Beta, 0.6, 1.0, 101).unwrap();
        assert_eq!(rows.len(), 101);
        assert_eq!(rows[0].x, 0.0);
        assert_eq!(rows[0].rk, 0.0);
        assert_eq!(rows[100].x, 2.0);
        let rk_at = |beta: f64| {
            rows.iter()
                .find(|r| (r.x - beta).abs() < 1e-9)
                .unwrap_or_else(|| panic!("beta grid misses {beta}"))
                .rk
        };
        assert!((rk_at(1.0) - RK_BETA_100).abs() < 1e-12);
        assert_eq!(rk_at(1.0).to_bits(), rk_at(1.5).to_bits());
        assert_eq!(rk_at(1.0).to_bits(), rk_at(2.0).to_bits());
        assert!(rk_at(0.5) < rk_at(1.0));
    }

    #[test]
    fn beta_spot_values_match_frozen_constants() {
        for (beta, want) in
            [(0.25, RK_BETA_025), (0.5, RK_BETA_050), (0.75, RK_BETA_075), (1.0, RK_BETA_100)]
        {
            let rk = max_key_rate_gaussian(0.6, beta, beta, 1.0).unwrap();
            assert!((rk - want).abs() < 1e-15, "beta = {beta}: {rk} vs {want}");
        }
    }

    #[test]
    fn sweep_config_errors() {
        assert!(comparison_sweep(SweepMode::Beta, 0.6, 1.0, 1).is_err());
        assert!(comparison_sweep(SweepMode::Beta, 1.0, 1.0, 11).is_err());
        assert!(comparison_sweep(SweepMode::Alpha { r1: f64::NAN, r2: 0.4 }, 0.6, 1.0, 11).is_err());
    }
}
