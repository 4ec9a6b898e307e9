use rand::Rng;

use super::cost::{lg, CostProfile};
use super::search::{call_bound, threshold_search};
use super::walk::{Decision, Side, WalkSearch, WalkStats, Witness};
use super::{positional, CpInstance, SolveReport, SolverError};
use crate::geometry::{dist_sq, dist_sq_coords, unit_neighbor_bound, Color, EpsSq, GridParams, Point};
use crate::histructs::{Variant, SKIP_BUDGET_FACTOR};
use crate::qsim::{cost_eval, CostLedger};
use crate::scalar::Real;

/// Pairs of positions within `eps`, found by a sweep along the first axis.
pub(crate) fn close_pairs_sweep(points: &[Point], eps: EpsSq) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i].coords()[0]);
    let mut out = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        let x = points[i].coords()[0];
        for &j in &order[k + 1..] {
            let dx = (points[j].coords()[0] - x) as u128;
            if !eps.admits(crate::geometry::SqDistance(dx * dx)) {
                break;
            }
            if eps.admits(dist_sq_coords(points[i].coords(), points[j].coords())) {
                out.push((i.min(j), i.max(j)));
            }
        }
    }
    out.sort_unstable();
    out
}

pub(crate) fn cp_walk(points: Vec<Point>, m: u32, eps: EpsSq, variant: Variant, witnesses: Vec<Witness>) -> Result<WalkSearch, SolverError> {
    let grid = GridParams::unit(points[0].dim(), eps)?;
    Ok(WalkSearch { variant, grid, coord_bits: m, sides: vec![Side::new(Color::A, points)], witnesses })
}

fn decide_positions<R: Rng>(
    points: &[Point],
    m: u32,
    eps: EpsSq,
    rng: &mut R,
    stats: &mut WalkStats,
) -> Result<Option<((usize, usize), u128)>, SolverError> {
    let witnesses = close_pairs_sweep(points, eps).into_iter().map(|(i, j)| [(0, i), (0, j)]).collect();
    let ws = cp_walk(points.to_vec(), m, eps, Variant::Augmented, witnesses)?;
    let Some((i, j)) = ws.decide(rng, stats)? else { return Ok(None) };
    let d = dist_sq(&points[i], &points[j])?;
    debug_assert!(eps.admits(d));
    Ok(Some(((i, j), d.0)))
}

/// Walk search for a pair within `eps` on the augmented structure over
/// `⌈n^{2/3}⌉`-subsets. A returned pair is verified to lie within `eps`.
pub fn cp_eps_decide<R: Rng>(inst: &CpInstance, eps: EpsSq, rng: &mut R) -> Result<Decision, SolverError> {
    let points = positional(inst.points());
    let mut stats = WalkStats::default();
    if points.len() < 2 {
        return Ok(Decision { pair: None, dist_sq: None, stats });
    }
    let found = decide_positions(&points, inst.m(), eps, rng, &mut stats)?;
    let orig = inst.points();
    Ok(match found {
        Some(((i, j), d)) if eps.admits(dist_sq(&orig[i], &orig[j])?) => {
            Decision { pair: Some((orig[i].index(), orig[j].index())), dist_sq: Some(d), stats }
        }
        _ => Decision { pair: None, dist_sq: None, stats },
    })
}

/// Setup, update and check costs of the walk on `n` points in dimension `d`.
pub fn cp_eps_cost<T: Real>(n: u64, d: usize, profile: CostProfile) -> Result<CostLedger<T>, SolverError> {
    let nf = n.max(2) as f64;
    let r = nf.powf(2.0 / 3.0).ceil();
    let df = T::count(d);
    let nb = T::lit(unit_neighbor_bound(d) as f64);
    let log = lg::<T>(nf, profile);
    let u = match profile {
        CostProfile::Operations => df + log + T::lit(SKIP_BUDGET_FACTOR as f64) * log + df * nb,
        CostProfile::Leading => df + df * nb,
    };
    let eps = T::lit((r * r / (nf * nf)).min(1.0));
    let delta = T::lit(1.0 / r);
    Ok(cost_eval(T::lit(r) * u, u, T::one(), eps, delta)?)
}

/// Closest pair by binary search over thresholds with [`cp_eps_decide`],
/// seeded with the distance of the first two points.
pub fn cp_solve<R: Rng>(inst: &CpInstance, rng: &mut R) -> Result<SolveReport, SolverError> {
    let n = inst.n();
    if n < 2 {
        return Err(SolverError::TooFewPoints(n));
    }
    let points = positional(inst.points());
    let seed = dist_sq(&points[0], &points[1])?.0;
    let mut stats = WalkStats::default();
    let res = threshold_search((0, 1), seed, num_rational::Ratio::from_integer(0), |t| {
        decide_positions(&points, inst.m(), EpsSq::for_integer_threshold(t), rng, &mut stats)
    })?;
    let orig = inst.points();
    let (i, j) = res.pair;
    let d = dist_sq(&orig[i], &orig[j])?;
    let mut rep = SolveReport::new("cp_solve").solved((orig[i].index(), orig[j].index()), Some(d.0));
    rep.oracle_calls = res.calls;
    rep.call_bound = Some(call_bound(inst.m(), inst.d()));
    fill_stats(&mut rep, &stats);
    Ok(rep)
}

pub(crate) fn fill_stats(rep: &mut SolveReport, stats: &WalkStats) {
    rep.queries += stats.updates + stats.checks;
    rep.failure_events += stats.failure_events;
    rep.retries += stats.retries;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sweep_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let pts: Vec<Point> =
                (0..40).map(|i| Point::new(i, vec![rng.gen_range(0..64), rng.gen_range(0..64)]).unwrap()).collect();
            let eps = EpsSq::integer(rng.gen_range(1..80)).unwrap();
            assert_eq!(close_pairs_sweep(&pts, eps), crate::oracles::close_pairs(&pts, eps));
        }
    }

    #[test]
    fn decide_boundary_and_empty() {
        let inst = CpInstance::from_coords(vec![vec![0, 0], vec![3, 4], vec![20, 20]], 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let yes = cp_eps_decide(&inst, EpsSq::integer(25).unwrap(), &mut rng).unwrap();
        assert_eq!(yes.pair, Some((0, 1)));
        assert_eq!(yes.dist_sq, Some(25));
        let no = cp_eps_decide(&inst, EpsSq::integer(24).unwrap(), &mut rng).unwrap();
        assert_eq!(no.pair, None);
    }

    #[test]
    fn two_points() {
        let inst = CpInstance::from_coords(vec![vec![1], vec![7]], 3).unwrap();
        let rep = cp_solve(&inst, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(rep.answer, Some((0, 1)));
        assert_eq!(rep.dist_sq, Some(36));
        assert!(rep.oracle_calls <= 2);
    }

    #[test]
    fn leading_cost_scales() {
        let a = cp_eps_cost::<f64>(1 << 10, 2, CostProfile::Leading).unwrap().total;
        let b = cp_eps_cost::<f64>(1 << 20, 2, CostProfile::Leading).unwrap().total;
        let slope = (b / a).log2() / 10.0;
        assert!((slope - 2.0 / 3.0).abs() < 0.05, "{slope}");
    }
}
