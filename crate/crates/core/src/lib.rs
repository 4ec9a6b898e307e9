//! History-independent closest-pair structures, quantum search and walk
//! simulation, and executable fine-grained reductions.

pub mod cli;
pub mod geometry;
pub mod histructs;
pub mod oracles;
pub mod qsim;
pub mod reductions;
pub mod scalar;
pub mod solvers;

pub use num_rational::Ratio;
pub use scalar::Real;

pub type CostLedgerF64 = qsim::CostLedger<f64>;
pub type GroverRunF64 = qsim::GroverRun<f64>;
pub type WalkSystemF64 = qsim::WalkSystem<f64>;
pub type CostLedgerF32 = qsim::CostLedger<f32>;
pub type GroverRunF32 = qsim::GroverRun<f32>;
pub type WalkSystemF32 = qsim::WalkSystem<f32>;
