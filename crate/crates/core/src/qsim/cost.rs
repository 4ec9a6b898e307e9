use super::QsimError;
use crate::scalar::Real;

/// Walk-search cost `S + (1/√ε)·((1/√δ)·U + C)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostLedger<T> {
    pub setup: T,
    pub update: T,
    pub check: T,
    pub eps: T,
    pub delta: T,
    pub total: T,
}

impl<T: Real> CostLedger<T> {
    pub fn update_term(&self) -> T {
        self.update / (self.eps.sqrt() * self.delta.sqrt())
    }

    pub fn check_term(&self) -> T {
        self.check / self.eps.sqrt()
    }
}

pub fn cost_eval<T: Real>(setup: T, update: T, check: T, eps: T, delta: T) -> Result<CostLedger<T>, QsimError> {
    for (what, v) in [("eps", eps), ("delta", delta)] {
        if !(v > T::zero() && v <= T::one()) {
            return Err(QsimError::OutOfUnitInterval { what, value: v.to_f64_lossy() });
        }
    }
    let total = setup + (update / delta.sqrt() + check) / eps.sqrt();
    Ok(CostLedger { setup, update, check, eps, delta, total })
}
