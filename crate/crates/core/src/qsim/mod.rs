//! Exact classical simulators for amplitude amplification, minimum finding
//! and Szegedy-style walks on Johnson graphs, plus the walk cost formula.

mod calibration;
mod cost;
mod grover;
mod johnson;
mod minfind;
mod walk;

use thiserror::Error;

pub use calibration::{calibrate, default_grid, fixture_family, Calibration, FamilyMember, CALIBRATION_FIXTURE};
pub use cost::{cost_eval, CostLedger};
pub use grover::{
    grover_recursion, grover_search_list, grover_simulate, optimal_iterations, GroverRun, SearchOutcome,
};
pub use johnson::{binomial, Chain, JohnsonChain, ProductChain, MAX_EDGE_DIM};
pub use minfind::{durr_hoyer_budget, quantum_min_find, MinFindOutcome};
pub use walk::{mnrs_run, MnrsSchedule, OpCounts, WalkSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("marked count {marked} exceeds search space {size}")]
    TooManyMarked { marked: u64, size: u64 },
    #[error("search space is empty")]
    EmptySpace,
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("Johnson parameters need 1 <= r < n <= 63, got n={n}, r={r}")]
    BadJohnson { n: usize, r: usize },
    #[error("edge space of dimension {dim} exceeds the bound {max}")]
    SizeBound { dim: usize, max: usize },
    #[error("{what} must lie in (0, 1], got {value}")]
    OutOfUnitInterval { what: &'static str, value: f64 },
    #[error("malformed calibration fixture: {0}")]
    Fixture(String),
}
