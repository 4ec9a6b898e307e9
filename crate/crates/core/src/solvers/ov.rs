use rand::Rng;

use super::cost::{search_queries, CostProfile};
use super::{OvInstance, SolveReport, SolverError};
use crate::qsim::grover_search_list;
use crate::scalar::Real;

/// Largest dimension accepted by [`ov_solve`].
pub const OV_MAX_DIM: usize = 12;
/// Searches per presence check; a miss is one-sided.
const PRESENCE_TRIES: usize = 3;

fn mask(v: &[u8]) -> u64 {
    v.iter().enumerate().fold(0, |m, (k, &b)| m | (b as u64) << k)
}

fn locate<R: Rng>(masks: &[u64], v: u64, rng: &mut R, queries: &mut u64) -> Option<usize> {
    for _ in 0..PRESENCE_TRIES {
        let out = grover_search_list(masks, |&x| x == v, rng);
        *queries += out.queries;
        if out.found.is_some() {
            return out.found;
        }
    }
    None
}

/// Presence of each of the `2^d` values in `A` and in `B` by search, then a
/// scan over value pairs for an orthogonal one, whose indices are extracted
/// by a final search on each side.
pub fn ov_solve<R: Rng>(inst: &OvInstance, rng: &mut R) -> Result<SolveReport, SolverError> {
    let d = inst.d();
    if d > OV_MAX_DIM {
        return Err(SolverError::DimensionTooLarge { d, max: OV_MAX_DIM });
    }
    let ma: Vec<u64> = inst.a().iter().map(|v| mask(v)).collect();
    let mb: Vec<u64> = inst.b().iter().map(|v| mask(v)).collect();
    let mut queries = 0;
    let mut presence = [vec![false; 1 << d], vec![false; 1 << d]];
    for v in 0..1u64 << d {
        presence[0][v as usize] = locate(&ma, v, rng, &mut queries).is_some();
        presence[1][v as usize] = locate(&mb, v, rng, &mut queries).is_some();
    }
    let presence_queries = queries;
    let mut rep = SolveReport::new("ov_solve");
    'scan: for v in 0..1u64 << d {
        for w in 0..1u64 << d {
            if v & w == 0 && presence[0][v as usize] && presence[1][w as usize] {
                if let (Some(i), Some(j)) = (locate(&ma, v, rng, &mut queries), locate(&mb, w, rng, &mut queries)) {
                    debug_assert_eq!(ma[i] & mb[j], 0);
                    rep = rep.solved((i, j), None);
                    break 'scan;
                }
            }
        }
    }
    rep.queries = queries;
    rep.notes.push(format!("presence checks used {presence_queries} queries"));
    Ok(rep)
}

/// Queries of the `2·2^d` presence checks over `n` vectors per side.
pub fn ov_presence_cost<T: Real>(n: u64, d: usize, profile: CostProfile) -> T {
    T::lit(2.0 * (1u64 << d) as f64) * search_queries::<T>(n as f64, profile)
}
