//! Binary search over integer squared-distance thresholds driven by a
//! decision procedure that returns witnesses.

use num_rational::Ratio;

/// `m + ⌈log2 d⌉ + 2`.
pub fn call_bound(m: u32, d: usize) -> u64 {
    m as u64 + crate::histructs::ceil_log2(d.max(1)) as u64 + 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct SearchResult {
    pub pair: (usize, usize),
    pub dist: u128,
    pub calls: u64,
}

/// `decide(t)` returns a pair at squared distance at most `(1+ξ)²·t` when
/// some pair lies within `t`, and `None` only if none does.
///
/// Keeps `lo`, below which no pair exists, the smallest threshold `u` that
/// was answered, and the best witness. Queries alternate between the
/// largest `t` that would certify the witness and the midpoint of
/// `(lo, u)`. On return the witness is within `(1+ξ)²` of the minimum.
pub(crate) fn threshold_search<E>(
    seed_pair: (usize, usize),
    seed_dist: u128,
    xi: Ratio<u64>,
    mut decide: impl FnMut(u128) -> Result<Option<((usize, usize), u128)>, E>,
) -> Result<SearchResult, E> {
    let (a, b) = (*xi.numer() as u128, *xi.denom() as u128);
    let (num, den) = ((a + b) * (a + b), b * b);
    let mut best = (seed_pair, seed_dist);
    let mut u = seed_dist as i128;
    let mut lo: i128 = -1;
    let mut calls = 0;
    let mut top = true;
    loop {
        let certified = best.1.saturating_mul(den) <= num.saturating_mul((lo + 1) as u128);
        if u - lo <= 1 || certified {
            break;
        }
        let t = if top {
            best.1.saturating_mul(den).div_ceil(num) as i128 - 1
        } else {
            lo + (u - lo) / 2
        };
        top = !top;
        let t = t.clamp(lo + 1, u - 1);
        calls += 1;
        match decide(t as u128)? {
            Some((pair, dist)) => {
                if dist < best.1 {
                    best = (pair, dist);
                }
                u = t.min(dist as i128);
            }
            None => lo = t,
        }
    }
    Ok(SearchResult { pair: best.0, dist: best.1, calls })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exact_oracle(dists: &[u128]) -> impl FnMut(u128) -> Result<Option<((usize, usize), u128)>, ()> + '_ {
        move |t| Ok(dists.iter().position(|&d| d <= t).map(|i| ((i, i + 1), dists[i])))
    }

    #[test]
    fn bound_values() {
        assert_eq!(call_bound(16, 1), 18);
        assert_eq!(call_bound(16, 3), 20);
        assert_eq!(call_bound(4, 4), 8);
    }

    #[test]
    fn single_pair_takes_one_call() {
        let r = threshold_search((0, 1), 9, Ratio::from_integer(0), exact_oracle(&[9])).unwrap();
        assert_eq!((r.dist, r.calls), (9, 1));
        let z = threshold_search((0, 1), 0, Ratio::from_integer(0), exact_oracle(&[0])).unwrap();
        assert_eq!((z.dist, z.calls), (0, 0));
    }

    proptest! {
        #[test]
        fn finds_minimum(mut dists in proptest::collection::vec(0u128..100_000, 1..40)) {
            let seed = dists[0];
            let want = *dists.iter().min().unwrap();
            dists.sort_unstable_by(|x, y| y.cmp(x));
            let r = threshold_search((0, 1), seed, Ratio::from_integer(0), exact_oracle(&dists)).unwrap();
            prop_assert_eq!(r.dist, want);
        }

        #[test]
        fn approximate_oracle_stays_within_slack(dists in proptest::collection::vec(1u128..100_000, 1..40)) {
            // answers with anything up to (1 + 1/2)² t
            let xi = Ratio::new(1, 2);
            let opt = *dists.iter().min().unwrap();
            let loose = |t: u128| -> Result<_, ()> {
                Ok(dists.iter().enumerate().filter(|(_, &d)| 4 * d <= 9 * t).max_by_key(|(_, &d)| d).map(|(i, &d)| ((i, i), d)))
            };
            let r = threshold_search((0, 0), dists[0], xi, loose).unwrap();
            prop_assert!(4 * r.dist <= 9 * opt);
        }
    }
}
