use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Which terms a cost-model evaluation keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CostProfile {
    /// Every counted operation, logarithmic factors included.
    Operations,
    /// Polynomial terms only; logarithmic factors are set to one.
    Leading,
}

/// Nearest-neighbor cost charged per block in exact bichromatic search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NnCost {
    /// Build `r·lg r`, worst-case query `r^{1−1/d}`.
    KdTree,
    /// Build `r^{d/2}`, query `lg r`.
    Paper,
}

pub(crate) fn lg<T: Real>(x: f64, profile: CostProfile) -> T {
    match profile {
        CostProfile::Operations => T::lit(x.max(2.0).log2()),
        CostProfile::Leading => T::one(),
    }
}

/// Queries spent by one unknown-count search over `n` items when nothing
/// is marked.
pub(crate) fn search_queries<T: Real>(n: f64, profile: CostProfile) -> T {
    match profile {
        CostProfile::Leading => T::lit(std::f64::consts::FRAC_PI_4 * n.sqrt()),
        CostProfile::Operations => {
            let mut guess = n.max(1.0).floor();
            let mut q = 0.0;
            loop {
                q += (std::f64::consts::FRAC_PI_4 * (n / guess).sqrt()).floor() + 1.0;
                if guess <= 1.0 {
                    break;
                }
                guess = (guess / 2.0).floor();
            }
            T::lit(q)
        }
    }
}

/// Minimum-finding queries over `n` values.
pub(crate) fn minfind_queries<T: Real>(n: f64, profile: CostProfile) -> T {
    match profile {
        CostProfile::Leading => T::lit(n.sqrt()),
        CostProfile::Operations => T::lit(crate::qsim::durr_hoyer_budget(n as usize) as f64),
    }
}
