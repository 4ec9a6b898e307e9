//! End-to-end solvers. Every solver has a real mode, which runs the classical
//! control flow with simulated quantum subroutines on an actual instance, and
//! a cost mode, which evaluates the query/cost model at any `n`.

mod baseline;
mod bcp;
mod cost;
mod cp;
mod ed;
mod instances;
mod kdtree;
mod multi;
mod ov;
mod report;
mod search;
mod walk;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Point};
use crate::histructs::HiError;
use crate::qsim::QsimError;

pub use baseline::{baseline_minfind_cost, baseline_minfind_solve, BaselineInput};
pub use bcp::{bcp_approx_cost, bcp_approx_decide, bcp_approx_solve, bcp_exact_cost, bcp_exact_solve, bcp_exact_block_size};
pub use cost::{CostProfile, NnCost};
pub use cp::{cp_eps_cost, cp_eps_decide, cp_solve};
pub use ed::ed_to_cp;
pub use instances::{BcpInstance, CpInstance, InstanceError, OvInstance};
pub use kdtree::KdTree;
pub use multi::{cp_multi_to_unique, even_prime_power_at_least, MultiOutcome, RoundRecord};
pub use ov::{ov_presence_cost, ov_solve, OV_MAX_DIM};
pub use report::{CostSummary, SolveReport, Status};
pub use search::call_bound;
pub use walk::{Decision, WalkStats, MAX_EXACT_WALK_N, RETRY_CAP, SUCCESS_REPEAT_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Structure(#[from] HiError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("structure failures persisted after {0} retries")]
    RetryCapExhausted(u32),
    #[error("approximation slack must be positive")]
    ZeroXi,
    #[error("dimension {d} exceeds the supported maximum {max}")]
    DimensionTooLarge { d: usize, max: usize },
}

/// Real execution or cost-model evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Real,
    Cost,
}

/// Copies of `points` whose index is their position.
fn positional(points: &[Point]) -> Vec<Point> {
    points.iter().enumerate().map(|(i, p)| p.with_index(i)).collect()
}
