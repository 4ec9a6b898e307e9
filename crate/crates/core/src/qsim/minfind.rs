//! Dürr–Høyer minimum finding on top of [`grover_search_list`].

use rand::Rng;

use super::{grover_search_list, QsimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinFindOutcome {
    pub index: usize,
    pub queries: u64,
}

/// Query budget `22.5·√N + 1.4·lg²N` after which the threshold loop stops.
pub fn durr_hoyer_budget(n: usize) -> u64 {
    let nf = n as f64;
    let lg = nf.log2().max(0.0);
    (22.5 * nf.sqrt() + 1.4 * lg * lg).ceil() as u64
}

/// Keeps a threshold index `y` and searches for a strictly smaller value
/// until the search fails or the budget runs out. The result is a true
/// minimum with probability at least 1/2.
pub fn quantum_min_find<T: PartialOrd, R: Rng + ?Sized>(
    values: &[T],
    rng: &mut R,
) -> Result<MinFindOutcome, QsimError> {
    if values.is_empty() {
        return Err(QsimError::EmptyInput);
    }
    if values.len() == 1 {
        return Ok(MinFindOutcome { index: 0, queries: 0 });
    }
    let budget = durr_hoyer_budget(values.len());
    let mut y = rng.gen_range(0..values.len());
    let mut queries = 0;
    let idx: Vec<usize> = (0..values.len()).collect();
    while queries < budget {
        let out = grover_search_list(&idx, |&j| values[j] < values[y], rng);
        queries += out.queries;
        match out.found {
            Some(j) => y = j,
            None => break,
        }
    }
    Ok(MinFindOutcome { index: y, queries })
}
