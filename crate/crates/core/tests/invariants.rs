//! Property tests: information identities and bound invariants that must
//! hold for every distribution and channel, not just the curated examples.

use proptest::prelude::*;
use relaykey_core::prob::{CondChannel, FiniteJoint};
use relaykey_core::regions::inner_point;

/// Normalize a raw positive vector into a pmf.
fn pmf(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

/// Normalize raw positives into stochastic rows of width `w`.
fn rows(raw: &[f64], w: usize) -> Vec<f64> {
    raw.chunks(w).flat_map(|c| pmf(c)).collect()
}

/// One random instance: a two-variable source plus cardinality-bounded
/// product test channels.
#[derive(Debug, Clone)]
struct Instance {
    source: FiniteJoint,
    ch1: CondChannel,
    ch2: CondChannel,
}

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (2usize..=4, 2usize..=4)
        .prop_flat_map(|(sx, sy)| {
            let su1 = 2usize..=(sx + 1);
            let su2 = 2usize..=(sy + 1);
            (Just(sx), Just(sy), su1, su2)
        })
        .prop_flat_map(|(sx, sy, su1, su2)| {
            let src = prop::collection::vec(0.01f64..1.0, sx * sy);
            let c1 = prop::collection::vec(0.01f64..1.0, sx * su1);
            let c2 = prop::collection::vec(0.01f64..1.0, sy * su2);
            (Just((sx, sy, su1, su2)), src, c1, c2)
        })
        .prop_map(|((sx, sy, su1, su2), src, c1, c2)| Instance {
            source: FiniteJoint::new(vec![sx, sy], pmf(&src)).unwrap(),
            ch1: CondChannel::new(vec![sx], vec![su1], rows(&c1, su1)).unwrap(),
            ch2: CondChannel::new(vec![sy], vec![su2], rows(&c2, su2)).unwrap(),
        })
}

proptest! {
    #[test]
    fn entropy_chain_rule_holds(inst in instance_strategy()) {
        let s = &inst.source;
        let hx = s.entropy(&[0]).unwrap();
        let hy = s.entropy(&[1]).unwrap();
        let hxy = s.entropy(&[0, 1]).unwrap();
        let mi = s.mutual_information(&[0], &[1], &[]).unwrap();
        prop_assert!((hx + hy - mi - hxy).abs() < 1e-10,
            "chain rule violated: {hx} + {hy} - {mi} != {hxy}");
    }

    #[test]
    fn extension_preserves_the_source_marginal(inst in instance_strategy()) {
        let ext = inst.source.extend_markov(&inst.ch1, &inst.ch2).unwrap();
        let back = ext.marginal(&[0, 1]).unwrap();
        for (a, b) in back.probs().iter().zip(inst.source.probs()) {
            prop_assert!((a - b).abs() < 1e-12, "marginal drifted: {a} vs {b}");
        }
    }

    #[test]
    fn mutual_information_is_nonnegative(inst in instance_strategy()) {
        let ext = inst.source.extend_markov(&inst.ch1, &inst.ch2).unwrap();
        for (a, b, g) in [
            (vec![0usize], vec![1usize], vec![]),
            (vec![0], vec![2], vec![1]),
            (vec![1], vec![3], vec![0]),
            (vec![2], vec![3], vec![]),
            (vec![0, 1], vec![2, 3], vec![]),
        ] {
            let v = ext.mutual_information(&a, &b, &g).unwrap();
            prop_assert!(v >= -1e-12, "negative information: I({a:?};{b:?}|{g:?}) = {v}");
        }
    }

    #[test]
    fn processing_cannot_create_correlation(inst in instance_strategy()) {
        // U1 — X — Y — U2 in a chain: every downstream pair is bounded by
        // the source correlation.
        let ext = inst.source.extend_markov(&inst.ch1, &inst.ch2).unwrap();
        let ixy = ext.mutual_information(&[0], &[1], &[]).unwrap();
        let iu1y = ext.mutual_information(&[2], &[1], &[]).unwrap();
        let ixu2 = ext.mutual_information(&[0], &[3], &[]).unwrap();
        let iu1u2 = ext.mutual_information(&[2], &[3], &[]).unwrap();
        prop_assert!(iu1y <= ixy + 1e-10);
        prop_assert!(ixu2 <= ixy + 1e-10);
        prop_assert!(iu1u2 <= ixy + 1e-10);
        prop_assert!(iu1u2 <= iu1y + 1e-10);
        prop_assert!(iu1u2 <= ixu2 + 1e-10);
    }

    #[test]
    fn key_rate_forms_agree_and_respect_the_source(inst in instance_strategy()) {
        let p = inner_point(&inst.source, &inst.ch1, &inst.ch2).unwrap();
        prop_assert!((p.rk_raw - p.rk_cross).abs() < 1e-10,
            "the two key-rate forms diverged: {} vs {}", p.rk_raw, p.rk_cross);
        let ixy = inst.source.mutual_information(&[0], &[1], &[]).unwrap();
        prop_assert!(p.rates.rk <= ixy + 1e-10,
            "key rate {} exceeds source correlation {}", p.rates.rk, ixy);
        prop_assert!(p.rates.r1 >= 0.0 && p.rates.r2 >= 0.0 && p.rates.rk >= 0.0);
        prop_assert!((p.rates.rc - p.rates.r1.max(p.rates.r2)).abs() < 1e-15);
    }
}
