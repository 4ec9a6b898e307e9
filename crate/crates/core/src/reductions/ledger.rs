use serde::{Deserialize, Serialize};

use super::VectorOracle;

/// One call to the downstream solver: the largest instance size and the
/// largest per-query cost of realising its input oracles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCall {
    pub n_j: f64,
    pub c_j: f64,
}

impl OracleCall {
    /// A call whose instance is served by the given pair of oracles.
    pub fn from_oracles<T>(fa: &VectorOracle<T>, fb: &VectorOracle<T>) -> Self {
        Self {
            n_j: fa.size().max(fb.size()) as f64,
            c_j: fa.max_query_cost().max(fb.max_query_cost()) as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionLedger {
    pub calls: Vec<OracleCall>,
}

impl ReductionLedger {
    /// Number of solver calls `k(n)`.
    pub fn k(&self) -> usize {
        self.calls.len()
    }

    pub fn sizes(&self) -> Vec<f64> {
        self.calls.iter().map(|c| c.n_j).collect()
    }

    pub fn max_cost(&self) -> f64 {
        self.calls.iter().map(|c| c.c_j).fold(0.0, f64::max)
    }

    /// `Σ_j c_j · q(n_j)^{1−ε}`.
    pub fn lhs(&self, q: impl Fn(f64) -> f64, eps: f64) -> f64 {
        self.calls.iter().map(|c| c.c_j * q(c.n_j).powf(1.0 - eps)).sum()
    }

    /// `d · p(n)^{1−δ}`.
    pub fn rhs(d: f64, p_n: f64, delta: f64) -> f64 {
        d * p_n.powf(1.0 - delta)
    }
}

pub fn reduction_cost_ledger(calls: &[OracleCall]) -> ReductionLedger {
    ReductionLedger { calls: calls.to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run() {
        let l = reduction_cost_ledger(&[]);
        assert_eq!(l.k(), 0);
        assert_eq!(l.lhs(|n| n, 0.1), 0.0);
    }

    #[test]
    fn sums_calls() {
        let l = reduction_cost_ledger(&[OracleCall { n_j: 16.0, c_j: 2.0 }, OracleCall { n_j: 4.0, c_j: 1.0 }]);
        assert!((l.lhs(|n| n, 0.5) - 10.0).abs() < 1e-12);
        assert_eq!(l.max_cost(), 2.0);
        assert!((ReductionLedger::rhs(3.0, 64.0, 0.5) - 24.0).abs() < 1e-12);
    }
}
