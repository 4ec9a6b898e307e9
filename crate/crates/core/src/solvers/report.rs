use serde::{Deserialize, Serialize};

use crate::qsim::CostLedger;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Solved,
    NoAnswer,
    RetryCapExhausted,
    CostOnly,
}

/// Cost-model totals in `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub setup: f64,
    pub update: f64,
    pub check: f64,
    pub eps: f64,
    pub delta: f64,
    pub total: f64,
}

impl CostSummary {
    pub fn from_ledger<T: Real>(l: &CostLedger<T>) -> Self {
        Self {
            setup: l.setup.to_f64_lossy(),
            update: l.update.to_f64_lossy(),
            check: l.check.to_f64_lossy(),
            eps: l.eps.to_f64_lossy(),
            delta: l.delta.to_f64_lossy(),
            total: l.total.to_f64_lossy(),
        }
    }

    /// A bare total without walk structure.
    pub fn total_only(total: f64) -> Self {
        Self { setup: 0.0, update: 0.0, check: 0.0, eps: 1.0, delta: 1.0, total }
    }
}

/// Outcome of one solver run. A present `answer` always comes with its
/// squared distance recomputed from the instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub status: Status,
    pub answer: Option<(usize, usize)>,
    pub dist_sq: Option<u128>,
    pub cost: Option<CostSummary>,
    pub oracle_calls: u64,
    pub call_bound: Option<u64>,
    pub queries: u64,
    pub failure_events: u64,
    pub retries: u64,
    pub retry_cap: u32,
    pub notes: Vec<String>,
}

impl SolveReport {
    pub fn new(solver: &str) -> Self {
        Self {
            solver: solver.to_string(),
            status: Status::NoAnswer,
            answer: None,
            dist_sq: None,
            cost: None,
            oracle_calls: 0,
            call_bound: None,
            queries: 0,
            failure_events: 0,
            retries: 0,
            retry_cap: super::RETRY_CAP,
            notes: Vec::new(),
        }
    }

    pub fn cost_only(solver: &str, cost: CostSummary) -> Self {
        Self { status: Status::CostOnly, cost: Some(cost), ..Self::new(solver) }
    }

    pub(crate) fn solved(mut self, pair: (usize, usize), dist_sq: Option<u128>) -> Self {
        self.status = Status::Solved;
        self.answer = Some(pair);
        self.dist_sq = dist_sq;
        self
    }

    pub fn within_call_bound(&self) -> bool {
        self.call_bound.is_none_or(|b| self.oracle_calls <= b)
    }
}
