use rand::Rng;

use super::{BaselineDecision, BaselineMethod};
use crate::inference::Direction;
use crate::qv::SamplePair;

/// Number of distinct values (`-0.0` and `0.0` count once).
pub fn unique_count(v: &[f64]) -> usize {
    let mut bits: Vec<u64> = v.iter().map(|&a| (a + 0.0).to_bits()).collect();
    bits.sort_unstable();
    bits.dedup();
    bits.len()
}

/// Ratio of unique-value counts `S = #unique(x) / #unique(y)`; `XtoY` when
/// `S < 1`, a fair coin from `rng` when `S = 1`.
pub fn strawman<R: Rng + ?Sized>(pair: &SamplePair, rng: &mut R) -> BaselineDecision {
    let ux = unique_count(pair.x()) as f64;
    let uy = unique_count(pair.y()) as f64;
    let ratio = ux / uy;
    let direction = if ratio < 1.0 {
        Direction::XtoY
    } else if ratio > 1.0 {
        Direction::YtoX
    } else if rng.random_bool(0.5) {
        Direction::XtoY
    } else {
        Direction::YtoX
    };
    BaselineDecision {
        method: BaselineMethod::Strawman,
        direction,
        score_xy: ratio,
        score_yx: uy / ux,
        native_confidence: ratio.ln().abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn with_uniques(ux: usize, uy: usize) -> SamplePair {
        let n = ux.max(uy) * 2;
        let x = (0..n).map(|i| (i % ux) as f64).collect();
        let y = (0..n).map(|i| (i % uy) as f64 * 0.5).collect();
        SamplePair::new(x, y).unwrap()
    }

    #[test]
    fn ratio_decides() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = strawman(&with_uniques(5, 10), &mut rng);
        assert_eq!(d.score_xy, 0.5);
        assert_eq!(d.direction, Direction::XtoY);
        let d = strawman(&with_uniques(10, 5), &mut rng);
        assert_eq!(d.score_xy, 2.0);
        assert_eq!(d.direction, Direction::YtoX);
    }

    #[test]
    fn equal_counts_flip_seeded_coin() {
        let p = with_uniques(7, 7);
        let mut seen = std::collections::HashSet::new();
        for seed in 0..32 {
            let a = strawman(&p, &mut ChaCha8Rng::seed_from_u64(seed)).direction;
            let b = strawman(&p, &mut ChaCha8Rng::seed_from_u64(seed)).direction;
            assert_eq!(a, b);
            seen.insert(a);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn signed_zero_counts_once() {
        assert_eq!(unique_count(&[0.0, -0.0, 1.0, 1.0]), 2);
    }
}
