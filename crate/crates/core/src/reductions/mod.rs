//! Fine-grained gadget reductions realised as lazy index-to-vector oracles.

mod cnf;
mod ledger;
mod ov_bcp;
mod sat_ov;
mod zov_bcp;

use thiserror::Error;

pub use cnf::{parse_dimacs, random_cnf, CnfFormula};
pub use ledger::{reduction_cost_ledger, OracleCall, ReductionLedger};
pub use ov_bcp::{gadget_a, gadget_b, ov_to_bcp};
pub use sat_ov::{sat_to_ov, Side, VectorOracle};
pub use zov_bcp::{zov_to_bcp, PaddedBcpPoint, ZovBcp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("literal {lit} references a variable outside 1..={vars}")]
    BadLiteral { lit: i64, vars: usize },
    #[error("DIMACS parse error on line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("oracle index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("entry {value} violates |entry| < n^k = {bound}")]
    EntryTooLarge { value: i64, bound: u128 },
    #[error("vectors have mismatched dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("parameters overflow exact arithmetic")]
    Overflow,
}
