use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CnfFormula, ReductionError};
use crate::solvers::OvInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

type EvalFn<T> = dyn Fn(usize) -> (Vec<T>, u64) + Send + Sync;

/// Lazily evaluated map `i ↦ x_i` with a per-query operation counter.
pub struct VectorOracle<T> {
    side: Side,
    size: usize,
    dim: usize,
    eval: Arc<EvalFn<T>>,
    queries: AtomicU64,
    total_cost: AtomicU64,
    max_cost: AtomicU64,
}

impl<T> fmt::Debug for VectorOracle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorOracle")
            .field("side", &self.side)
            .field("size", &self.size)
            .field("dim", &self.dim)
            .field("queries", &self.queries())
            .finish()
    }
}

impl<T> VectorOracle<T> {
    pub fn new(
        side: Side,
        size: usize,
        dim: usize,
        eval: impl Fn(usize) -> (Vec<T>, u64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            side,
            size,
            dim,
            eval: Arc::new(eval),
            queries: AtomicU64::new(0),
            total_cost: AtomicU64::new(0),
            max_cost: AtomicU64::new(0),
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn query(&self, index: usize) -> Result<Vec<T>, ReductionError> {
        if index >= self.size {
            return Err(ReductionError::IndexOutOfRange { index, size: self.size });
        }
        let (v, cost) = (self.eval)(index);
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.total_cost.fetch_add(cost, Ordering::Relaxed);
        self.max_cost.fetch_max(cost, Ordering::Relaxed);
        Ok(v)
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn total_cost(&self) -> u64 {
        self.total_cost.load(Ordering::Relaxed)
    }

    /// Largest operation count charged to a single query.
    pub fn max_query_cost(&self) -> u64 {
        self.max_cost.load(Ordering::Relaxed)
    }

    /// Evaluates every index.
    pub fn materialize(&self) -> Vec<Vec<T>> {
        (0..self.size).map(|i| self.query(i).expect("index in range")).collect()
    }
}

/// Splits the variables into halves and maps each half-assignment `j` (bit
/// `t` of `j` is variable `t+1` of the half) to the clause-falsification
/// vector: entry `c` is 0 iff the half-assignment satisfies clause `c`.
pub fn sat_to_ov(phi: &CnfFormula) -> (VectorOracle<u8>, VectorOracle<u8>) {
    let phi = Arc::new(phi.padded_even());
    let half = phi.num_vars() / 2;
    let size = 1usize << half;
    let m = phi.num_clauses();
    let make = |side: Side| {
        let phi = Arc::clone(&phi);
        let offset = if side == Side::A { 0 } else { half };
        VectorOracle::new(side, size, m, move |j| {
            let mut ops = half as u64;
            let v = phi
                .clauses()
                .iter()
                .map(|clause| {
                    let mut satisfied = false;
                    for &lit in clause {
                        ops += 1;
                        let var = lit.unsigned_abs() as usize - 1;
                        if var >= offset && var < offset + half {
                            let value = j >> (var - offset) & 1 == 1;
                            if value == (lit > 0) {
                                satisfied = true;
                                break;
                            }
                        }
                    }
                    u8::from(!satisfied)
                })
                .collect();
            (v, ops)
        })
    };
    (make(Side::A), make(Side::B))
}

impl OvInstance {
    /// Materialises a pair of oracles for exhaustive checking.
    pub fn from_oracles(fa: &VectorOracle<u8>, fb: &VectorOracle<u8>) -> Result<Self, crate::solvers::InstanceError> {
        OvInstance::new(fa.materialize(), fb.materialize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_clause_example() {
        let phi = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        let (fa, fb) = sat_to_ov(&phi);
        assert_eq!(fa.query(1).unwrap(), vec![0]);
        assert_eq!(fa.query(0).unwrap(), vec![1]);
        assert_eq!(fb.query(1).unwrap(), vec![0]);
        assert_eq!(fb.query(0).unwrap(), vec![1]);
        assert_eq!(fa.queries(), 2);
        assert!(fa.query(2).is_err());
    }

    #[test]
    fn oracle_is_pure() {
        let phi = CnfFormula::new(4, vec![vec![1, -3], vec![2, 4], vec![-1, -4]]).unwrap();
        let (fa, _) = sat_to_ov(&phi);
        for j in 0..4 {
            assert_eq!(fa.query(j).unwrap(), fa.query(j).unwrap());
        }
        let k = phi.width() as u64;
        let bound = k * phi.num_clauses() as u64 * phi.num_vars() as u64;
        assert!(fa.max_query_cost() <= bound);
    }

    #[test]
    fn odd_variable_count_is_padded() {
        let phi = CnfFormula::new(3, vec![vec![3]]).unwrap();
        let (fa, fb) = sat_to_ov(&phi);
        assert_eq!(fa.size(), 4);
        // variable 3 is the first variable of the B half
        assert_eq!(fb.query(1).unwrap(), vec![0]);
        assert_eq!(fa.query(3).unwrap(), vec![1]);
    }
}
