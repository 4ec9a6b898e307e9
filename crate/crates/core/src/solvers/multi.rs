//! Reduction from many ε-close pairs to a unique one by random shrinking.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cp::{close_pairs_sweep, cp_walk};
use super::walk::{Attempt, WalkStats};
use super::{CpInstance, SolverError};
use crate::geometry::{dist_sq, EpsSq, Point};
use crate::histructs::Variant;
use crate::qsim::grover_search_list;

/// Smallest `p^{2k}` (`p` prime, `k ≥ 1`) in `[t, ⌊9t/8⌋]`.
pub fn even_prime_power_at_least(t: u64) -> Option<u64> {
    let hi = t * 9 / 8;
    let mut best: Option<u64> = None;
    let mut p = 2u64;
    while p * p <= hi {
        if (2..p).take_while(|q| q * q <= p).all(|q| p % q != 0) {
            let mut v = p * p;
            while v < t {
                v = match v.checked_mul(p * p) {
                    Some(x) => x,
                    None => break,
                };
            }
            if v >= t && v <= hi {
                best = Some(best.map_or(v, |b: u64| b.min(v)));
            }
        }
        p += 1;
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub size: usize,
    /// Permutation domain size.
    pub q: u64,
    /// Size of the next candidate set; equals `size` on the final round.
    pub next_size: usize,
}

impl RoundRecord {
    pub fn ratio(&self) -> f64 {
        self.next_size as f64 / self.size as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiOutcome {
    pub pair: Option<(usize, usize)>,
    pub dist_sq: Option<u128>,
    pub rounds: Vec<RoundRecord>,
    /// Whether the answer came from the final search over a small set.
    pub by_fallback: bool,
    pub stats: WalkStats,
}

/// Runs the unique-solution walk once per round on the basic structure over
/// the current candidate set `T`. When it fails, `T` is replaced by the
/// elements mapped into the first `min(⌈4q/5⌉, ⌊9|T|/10⌋)` slots of a random
/// permutation of `[q]`, `q` the even prime power above `|T|` or `|T|`
/// itself. A set of at most `n^{2/3}` points is searched directly over all
/// of its pairs.
pub fn cp_multi_to_unique<R: Rng>(inst: &CpInstance, eps: EpsSq, rng: &mut R) -> Result<MultiOutcome, SolverError> {
    let n = inst.n();
    let small = (n as f64).powf(2.0 / 3.0);
    let orig = inst.points();
    let mut t: Vec<usize> = (0..n).collect();
    let mut out = MultiOutcome { pair: None, dist_sq: None, rounds: Vec::new(), by_fallback: false, stats: WalkStats::default() };
    let finish = |out: &mut MultiOutcome, i: usize, j: usize| -> Result<(), SolverError> {
        let d = dist_sq(&orig[i], &orig[j])?;
        if eps.admits(d) {
            let (a, b) = (orig[i].index(), orig[j].index());
            out.pair = Some((a.min(b), a.max(b)));
            out.dist_sq = Some(d.0);
        }
        Ok(())
    };
    while t.len() >= 2 {
        if t.len() as f64 <= small {
            let pairs: Vec<(usize, usize)> =
                (0..t.len()).flat_map(|a| (a + 1..t.len()).map(move |b| (a, b))).collect();
            let hit = grover_search_list(&pairs, |&(a, b)| eps.admits(dist_sq(&orig[t[a]], &orig[t[b]]).unwrap()), rng);
            out.by_fallback = true;
            out.stats.checks += hit.queries;
            if let Some(k) = hit.found {
                finish(&mut out, t[pairs[k].0], t[pairs[k].1])?;
            }
            return Ok(out);
        }
        let sub: Vec<Point> = t.iter().enumerate().map(|(k, &i)| orig[i].with_index(k)).collect();
        let close = close_pairs_sweep(&sub, eps);
        let witnesses = if close.len() == 1 { vec![[(0, close[0].0), (0, close[0].1)]] } else { vec![] };
        let ws = cp_walk(sub, inst.m(), eps, Variant::Basic, witnesses)?;
        match ws.attempt(rng, &mut out.stats)? {
            Attempt::Found((a, b)) => {
                out.rounds.push(RoundRecord { size: t.len(), q: t.len() as u64, next_size: t.len() });
                finish(&mut out, t[a], t[b])?;
                return Ok(out);
            }
            Attempt::Failed(e) => out.stats.failure_events += e,
            Attempt::Unmarked => {}
        }
        let size = t.len() as u64;
        let q = even_prime_power_at_least(size).unwrap_or(size);
        let keep = ((4 * q).div_ceil(5)).min(size * 9 / 10) as usize;
        let mut sigma: Vec<u64> = (0..q).collect();
        sigma.shuffle(rng);
        let next: Vec<usize> = sigma[..keep].iter().filter(|&&s| s < size).map(|&s| t[s as usize]).collect();
        out.rounds.push(RoundRecord { size: t.len(), q, next_size: next.len() });
        t = next;
    }
    Ok(out)
}
