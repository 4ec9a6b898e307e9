//! Brute-force reference answers. Nothing here calls into the solvers or the
//! structures; distances are recomputed with a separate loop.

use thiserror::Error;

use crate::geometry::{EpsSq, Point, SqDistance};
use crate::reductions::CnfFormula;

pub const MAX_PAIRWISE_POINTS: usize = 2000;
pub const MAX_SAT_VARS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("{what} of size {size} exceeds enumeration cap {cap}")]
    CapExceeded { what: &'static str, size: usize, cap: usize },
}

/// A witness pair together with its exact squared distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub pair: (usize, usize),
    pub dist: SqDistance,
}

fn sq(a: &[u64], b: &[u64]) -> u128 {
    let mut total = 0u128;
    for k in 0..a.len() {
        let (x, y) = (a[k] as i128, b[k] as i128);
        total += ((x - y) * (x - y)) as u128;
    }
    total
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

fn check_cap(what: &'static str, size: usize) -> Result<(), OracleError> {
    if size > MAX_PAIRWISE_POINTS {
        return Err(OracleError::CapExceeded { what, size, cap: MAX_PAIRWISE_POINTS });
    }
    Ok(())
}

/// Closest pair over all `n(n−1)/2` pairs. The witness is reported by point
/// index, smaller index first; ties go to the lexicographically smallest pair.
pub fn brute_cp(points: &[Point]) -> Result<OracleResult, OracleError> {
    if points.len() < 2 {
        return Err(OracleError::TooFewPoints(points.len()));
    }
    check_cap("point set", points.len())?;
    let mut best: Option<(u128, (usize, usize))> = None;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d = sq(points[a].coords(), points[b].coords());
            let key = (d, ordered(points[a].index(), points[b].index()));
            if best.map_or(true, |cur| key < cur) {
                best = Some(key);
            }
        }
    }
    let (d, pair) = best.expect("at least one pair");
    Ok(OracleResult { pair, dist: SqDistance(d) })
}

/// Closest cross pair; the witness is `(index in A, index in B)`.
pub fn brute_bcp(a: &[Point], b: &[Point]) -> Result<OracleResult, OracleError> {
    if a.is_empty() || b.is_empty() {
        return Err(OracleError::TooFewPoints(a.len().min(b.len())));
    }
    check_cap("color class", a.len().max(b.len()))?;
    let mut best: Option<(u128, (usize, usize))> = None;
    for p in a {
        for q in b {
            let key = (sq(p.coords(), q.coords()), (p.index(), q.index()));
            if best.map_or(true, |cur| key < cur) {
                best = Some(key);
            }
        }
    }
    let (d, pair) = best.expect("nonempty classes");
    Ok(OracleResult { pair, dist: SqDistance(d) })
}

fn within(d: u128, eps: EpsSq) -> bool {
    d * eps.den() <= eps.num()
}

/// Whether some pair lies within ε (boundary included).
pub fn exists_close_pair(points: &[Point], eps: EpsSq) -> bool {
    (0..points.len()).any(|a| {
        (a + 1..points.len()).any(|b| within(sq(points[a].coords(), points[b].coords()), eps))
    })
}

/// Every pair within ε, by index, smaller index first.
pub fn close_pairs(points: &[Point], eps: EpsSq) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if within(sq(points[a].coords(), points[b].coords()), eps) {
                out.push(ordered(points[a].index(), points[b].index()));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Whether some cross pair lies within ε.
pub fn exists_close_cross_pair(a: &[Point], b: &[Point], eps: EpsSq) -> bool {
    a.iter().any(|p| b.iter().any(|q| within(sq(p.coords(), q.coords()), eps)))
}

/// Orthogonal pair `(i, j)` with `a[i]·b[j] = 0`, lexicographically smallest.
pub fn brute_ov(a: &[Vec<u8>], b: &[Vec<u8>]) -> Result<Option<(usize, usize)>, OracleError> {
    check_cap("vector set", a.len().max(b.len()))?;
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if x.iter().zip(y).all(|(&u, &v)| u == 0 || v == 0) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Satisfying assignment found by enumerating all `2^n` assignments in
/// increasing binary order (variable 1 is the lowest bit).
pub fn brute_sat(phi: &CnfFormula) -> Result<Option<Vec<bool>>, OracleError> {
    let n = phi.num_vars();
    if n > MAX_SAT_VARS {
        return Err(OracleError::CapExceeded { what: "formula", size: n, cap: MAX_SAT_VARS });
    }
    'outer: for mask in 0u64..(1u64 << n) {
        for clause in phi.clauses() {
            let sat = clause.iter().any(|&lit| {
                let v = (lit.unsigned_abs() - 1) as u64;
                let value = mask >> v & 1 == 1;
                value == (lit > 0)
            });
            if !sat {
                continue 'outer;
            }
        }
        return Ok(Some((0..n).map(|v| mask >> v & 1 == 1).collect()));
    }
    Ok(None)
}

/// Element distinctness by sorting.
pub fn distinct(values: &[i64]) -> bool {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.windows(2).all(|w| w[0] != w[1])
}
