use rand::Rng;

use super::cost::{minfind_queries, CostProfile};
use super::{BcpInstance, CpInstance, SolveReport, SolverError};
use crate::geometry::{dist_sq_coords, Point};
use crate::qsim::quantum_min_find;
use crate::scalar::Real;

/// Minimum-finding rounds; each succeeds with probability at least 1/2.
const ROUNDS: usize = 7;

#[derive(Clone, Copy, Debug)]
pub enum BaselineInput<'a> {
    Cp(&'a CpInstance),
    Bcp(&'a BcpInstance),
}

/// Minimum finding over every pair distance, repeated and checked.
pub fn baseline_minfind_solve<R: Rng>(input: BaselineInput<'_>, rng: &mut R) -> Result<SolveReport, SolverError> {
    let (first, second): (&[Point], &[Point]) = match input {
        BaselineInput::Cp(c) => (c.points(), c.points()),
        BaselineInput::Bcp(b) => (b.a(), b.b()),
    };
    let mono = matches!(input, BaselineInput::Cp(_));
    let mut values: Vec<(u128, usize, usize)> = Vec::new();
    for (i, p) in first.iter().enumerate() {
        let start = if mono { i + 1 } else { 0 };
        for q in &second[start..] {
            values.push((dist_sq_coords(p.coords(), q.coords()).0, p.index(), q.index()));
        }
    }
    if values.is_empty() {
        return Err(SolverError::TooFewPoints(first.len()));
    }
    let mut queries = 0;
    let mut best = None;
    for _ in 0..ROUNDS {
        let o = quantum_min_find(&values, rng)?;
        queries += o.queries;
        let v = values[o.index];
        if best.is_none_or(|b| v < b) {
            best = Some(v);
        }
    }
    let (d, i, j) = best.expect("rounds > 0");
    let pair = if mono { (i.min(j), i.max(j)) } else { (i, j) };
    let mut rep = SolveReport::new("baseline_minfind_solve").solved(pair, Some(d));
    rep.queries = queries;
    Ok(rep)
}

/// Minimum finding over `n(n−1)/2` pairs at `d` operations per distance.
pub fn baseline_minfind_cost<T: Real>(n: u64, d: usize, profile: CostProfile) -> T {
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    minfind_queries::<T>(pairs.max(1.0), profile) * T::count(d)
}
