use std::collections::{HashMap, HashSet};
use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcpair::cli::gen;
use qcpair::geometry::{
    are_eps_neighbors, box_id, dist_sq, enumerate_eps_neighbors, fine_neighbor_bound, unit_neighbor_bound, BoxId,
    Color, EpsSq, GridParams, Point, SqDistance,
};
use qcpair::histructs::{HiError, HiStructure, StructureConfig, Variant};
use qcpair::oracles;
use qcpair::qsim::{calibrate, default_grid, fixture_family, grover_simulate, Calibration, Chain, JohnsonChain};
use qcpair::reductions::{ov_to_bcp, random_cnf, sat_to_ov, zov_to_bcp};
use qcpair::solvers::{
    bcp_approx_solve, bcp_exact_cost, bcp_exact_solve, cp_eps_cost, cp_multi_to_unique, cp_solve, ov_presence_cost,
    ov_solve, CostProfile, NnCost, OvInstance,
};

const VARIANTS: [Variant; 3] = [Variant::Basic, Variant::Augmented, Variant::Bichromatic];
const GROVER_TOL: f64 = 1e-12;
const GROVER_EXAMPLE_TOL: f64 = 5e-5;
const MNRS_MIN_SUCCESS: f64 = 0.25;
const MNRS_MAX_RATIO: f64 = 4.0;
const MULTI_MIN_SUCCESS: f64 = 0.9;
const SHRINK_MAX: f64 = 0.9;
const BCP_EXACT_MIN_SUCCESS: f64 = 0.9;
const SLOPE_TOL: f64 = 0.05;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn grid_for(variant: Variant, d: usize, eps: u128, xi: Ratio<u64>) -> GridParams {
    let e = EpsSq::integer(eps).unwrap();
    match variant {
        Variant::Bichromatic => GridParams::for_xi(d, e, xi).unwrap(),
        _ => GridParams::unit(d, e).unwrap(),
    }
}

struct Colored {
    color: Color,
    point: Point,
}

/// `k` random points on distinct indices; for the basic variant only those
/// the unique-pair promise admits.
fn random_set(rng: &mut ChaCha8Rng, variant: Variant, cfg: &StructureConfig, k: usize, d: usize, m: u32) -> Vec<Colored> {
    let mut scratch = HiStructure::new(variant, cfg.clone()).unwrap();
    let mut idx: Vec<usize> = (0..cfg.universe).collect();
    idx.shuffle(rng);
    let mut out = Vec::new();
    for &i in idx.iter().take(k) {
        let color = if variant == Variant::Bichromatic && rng.gen_bool(0.5) { Color::B } else { Color::A };
        let point = Point::new(i, (0..d).map(|_| rng.gen_range(0..1u64 << m)).collect()).unwrap();
        match scratch.insert(color, i, &point) {
            Ok(()) => out.push(Colored { color, point }),
            Err(HiError::PromiseViolation(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut bad = Vec::new();
    for v in VARIANTS {
        for t in 0..1000 {
            let d = rng.gen_range(1..=3);
            let n = 256;
            let cfg = StructureConfig::new(grid_for(v, d, 2, Ratio::new(1, 2)), n, n, 8, rng.gen());
            let k = rng.gen_range(0..=n);
            let all = random_set(&mut rng, v, &cfg, k, d, 8);
            let keep = rng.gen_range(0..=all.len());
            let build = |rng: &mut ChaCha8Rng, upto: usize| {
                let mut h = HiStructure::new(v, cfg.clone()).unwrap();
                let mut ins: Vec<usize> = (0..upto).collect();
                ins.shuffle(rng);
                for &j in &ins {
                    h.insert(all[j].color, all[j].point.index(), &all[j].point).unwrap();
                }
                let mut del: Vec<usize> = (keep..upto).collect();
                del.shuffle(rng);
                for j in del {
                    h.delete(all[j].color, all[j].point.index(), &all[j].point).unwrap();
                }
                h.canonical_serialize()
            };
            let first = build(&mut rng, keep);
            let second = build(&mut rng, all.len());
            if first != second {
                bad.push(format!("{v:?} triple {t}"));
            }
        }
    }
    check(bad.is_empty(), format!("3000 triples, {} serialization mismatches {:?}", bad.len(), bad.iter().take(3).collect::<Vec<_>>()))
}

/// Boxes holding one point whose point has an ε-partner alone in another box.
fn singleton_partner_boxes(pts: &[Point], grid: &GridParams) -> HashSet<BoxId> {
    let mut count: HashMap<BoxId, usize> = HashMap::new();
    let ids: Vec<BoxId> = pts.iter().map(|p| box_id(p, grid).unwrap()).collect();
    for g in &ids {
        *count.entry(g.clone()).or_default() += 1;
    }
    let alone: Vec<usize> = (0..pts.len()).filter(|&i| count[&ids[i]] == 1).collect();
    alone
        .iter()
        .filter(|&&i| alone.iter().any(|&j| j != i && grid.eps().admits(dist_sq(&pts[i], &pts[j]).unwrap())))
        .map(|&i| ids[i].clone())
        .collect()
}

fn box_level_cross(a: &[Point], b: &[Point], grid: &GridParams) -> bool {
    let ids = |s: &[Point]| s.iter().map(|p| box_id(p, grid).unwrap()).collect::<HashSet<_>>();
    let (ia, ib) = (ids(a), ids(b));
    ia.iter().any(|g| ib.iter().any(|h| are_eps_neighbors(g, h, grid).unwrap()))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let xi = Ratio::new(1, 2);
    let eps = 9;
    let (mut instances, mut mutations, mut positive, mut skipped) = (0, 0u64, 0u64, 0u64);
    let mut errors: Vec<String> = Vec::new();
    for v in VARIANTS {
        for t in 0..1000 {
            let n = rng.gen_range(2..=200);
            let d = rng.gen_range(1..=3);
            let m = rng.gen_range(3..=9);
            let grid = grid_for(v, d, eps, xi);
            let cfg = StructureConfig::new(grid.clone(), n, n, m, rng.gen());
            let mut h = HiStructure::new(v, cfg.clone()).unwrap();
            let mut live: Vec<Colored> = Vec::new();
            let mut free: [Vec<usize>; 2] = [(0..n).collect(), (0..n).collect()];
            let mut fail = |msg: String| errors.push(format!("{v:?} instance {t}: {msg}"));
            for _ in 0..2 * n {
                let del = !live.is_empty() && rng.gen_bool(0.3);
                if del {
                    let c = live.swap_remove(rng.gen_range(0..live.len()));
                    h.delete(c.color, c.point.index(), &c.point).unwrap();
                    free[c.color.slot()].push(c.point.index());
                } else {
                    let color = if v == Variant::Bichromatic && rng.gen_bool(0.5) { Color::B } else { Color::A };
                    let slot = &mut free[color.slot()];
                    if slot.is_empty() {
                        continue;
                    }
                    let i = slot[rng.gen_range(0..slot.len())];
                    let p = Point::new(i, (0..d).map(|_| rng.gen_range(0..1u64 << m)).collect()).unwrap();
                    match h.insert(color, i, &p) {
                        Ok(()) => {
                            slot.retain(|&x| x != i);
                            live.push(Colored { color, point: p });
                        }
                        Err(HiError::PromiseViolation(_)) => {
                            skipped += 1;
                            continue;
                        }
                        Err(e) => {
                            fail(e.to_string());
                            break;
                        }
                    }
                }
                mutations += 1;
                if let Err(e) = h.audit() {
                    fail(e.to_string());
                    break;
                }
                let of = |c: Color| live.iter().filter(|x| x.color == c).map(|x| x.point.clone()).collect::<Vec<_>>();
                let (a, b) = (of(Color::A), of(Color::B));
                let want = match v {
                    Variant::Bichromatic => box_level_cross(&a, &b, &grid),
                    _ => oracles::exists_close_pair(&a, grid.eps()),
                };
                let got = h.has_close_pair();
                if got.is_some() && got != Some(want) {
                    fail(format!("flag {got:?}, brute force {want}"));
                    break;
                }
                positive += want as u64;
                if v == Variant::Bichromatic && oracles::exists_close_cross_pair(&a, &b, grid.eps()) && !want {
                    fail("ε-close cross pair without neighboring boxes".into());
                    break;
                }
                if let HiStructure::Augmented(tree) = &h {
                    let partnered = singleton_partner_boxes(&a, &grid);
                    for (id, members, ext) in tree.box_counters() {
                        let want = members.len() == 1 && partnered.contains(&id);
                        if (ext != 0) != want {
                            fail(format!("external counter {ext} on box {:?} with {} points", id.0, members.len()));
                        }
                    }
                }
            }
            instances += 1;
        }
    }
    check(
        errors.is_empty(),
        format!(
            "{instances} instances, {mutations} audited mutations, {positive} with a flagged pair, {skipped} promise rejections, {} errors {:?}",
            errors.len(),
            errors.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

/// Corners of the closed box `g` are at `k·w` and `(k+1)·w`; integer points
/// of a box are compared against its closure by exact arithmetic.
fn criterion_3() -> Outcome {
    let mut errs = Vec::new();
    let mut checked = 0u64;
    let mut push = |ok: bool, what: String| {
        checked += 1;
        if !ok && errs.len() < 5 {
            errs.push(what);
        }
    };
    let xis = [Ratio::new(1, 10), Ratio::new(1, 2)];
    for eps in 1..=30u128 {
        let e = EpsSq::integer(eps).unwrap();
        let unit = GridParams::unit(1, e).unwrap();
        let fines: Vec<GridParams> = xis.iter().map(|&x| GridParams::for_xi(1, e, x).unwrap()).collect();
        let pts: Vec<Point> = (0..80u64).map(|x| Point::new(0, vec![x]).unwrap()).collect();
        for p in &pts {
            for q in &pts {
                let dd = dist_sq(p, q).unwrap();
                let (bp, bq) = (box_id(p, &unit).unwrap(), box_id(q, &unit).unwrap());
                if bp == bq {
                    push(e.admits(dd), format!("d=1 ε²={eps}: same box {p:?} {q:?} too far"));
                }
                if e.admits(dd) {
                    push(are_eps_neighbors(&bp, &bq, &unit).unwrap(), format!("d=1 ε²={eps}: close {p:?} {q:?} not neighbors"));
                }
                for (g, &xi) in fines.iter().zip(&xis) {
                    let (fp, fq) = (box_id(p, g).unwrap(), box_id(q, g).unwrap());
                    if are_eps_neighbors(&fp, &fq, g).unwrap() {
                        push(e.admits_relaxed(dd, xi), format!("d=1 ε²={eps} ξ={xi}: neighbors {p:?} {q:?} too far"));
                    }
                }
            }
        }
        let b = BoxId(vec![50]);
        push(enumerate_eps_neighbors(&b, &unit).len() as u128 <= unit_neighbor_bound(1), format!("d=1 count ε²={eps}"));
        for (g, &xi) in fines.iter().zip(&xis) {
            push(enumerate_eps_neighbors(&b, g).len() as u128 <= fine_neighbor_bound(1, xi), format!("d=1 fine count ε²={eps}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for d in 2..=3usize {
        for s in 0..10_000 {
            let eps = rng.gen_range(1..=400u128);
            let e = EpsSq::integer(eps).unwrap();
            let unit = GridParams::unit(d, e).unwrap();
            let xi = xis[s % 2];
            let fine = GridParams::for_xi(d, e, xi).unwrap();
            let reach = 2 * (eps as f64).sqrt().ceil() as i64 + 2;
            let p: Vec<u64> = (0..d).map(|_| rng.gen_range(100..1000)).collect();
            let q: Vec<u64> = p.iter().map(|&x| (x as i64 + rng.gen_range(-reach..=reach)) as u64).collect();
            let (p, q) = (Point::new(0, p).unwrap(), Point::new(1, q).unwrap());
            let dd = dist_sq(&p, &q).unwrap();
            let (bp, bq) = (box_id(&p, &unit).unwrap(), box_id(&q, &unit).unwrap());
            if bp == bq {
                push(e.admits(dd), format!("d={d} ε²={eps}: same box too far"));
            }
            if e.admits(dd) {
                push(are_eps_neighbors(&bp, &bq, &unit).unwrap(), format!("d={d} ε²={eps}: close pair not neighbors"));
            }
            let (fp, fq) = (box_id(&p, &fine).unwrap(), box_id(&q, &fine).unwrap());
            if are_eps_neighbors(&fp, &fq, &fine).unwrap() {
                push(e.admits_relaxed(dd, xi), format!("d={d} ε²={eps} ξ={xi}: fine neighbors too far"));
            }
            let mid = BoxId(vec![1000; d]);
            push(enumerate_eps_neighbors(&mid, &unit).len() as u128 <= unit_neighbor_bound(d), format!("d={d} count"));
            if s < 200 {
                push(enumerate_eps_neighbors(&mid, &fine).len() as u128 <= fine_neighbor_bound(d, xi), format!("d={d} fine count"));
            }
        }
    }
    check(errs.is_empty(), format!("{checked} checks, failures {errs:?}"))
}

/// Full state vector: oracle flips the first `m` amplitudes, diffusion
/// reflects about the mean.
fn grover_state_vector(n: usize, m: usize, k: usize) -> f64 {
    let mut a = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..k {
        a[..m].iter_mut().for_each(|x| *x = -*x);
        let mean = a.iter().sum::<f64>() / n as f64;
        a.iter_mut().for_each(|x| *x = 2.0 * mean - *x);
    }
    a[..m].iter().map(|x| x * x).sum()
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=1024usize {
        let ms = [1, 2, n.div_ceil(3), n / 2, n];
        for &m in ms.iter().filter(|&&m| m >= 1 && m <= n) {
            let theta = ((m as f64) / (n as f64)).sqrt().asin();
            let kmax = (std::f64::consts::FRAC_PI_4 / theta).ceil() as usize + 1;
            for k in 0..=kmax {
                let closed = ((2 * k + 1) as f64 * theta).sin().powi(2);
                let sim = grover_state_vector(n, m, k);
                let lib = grover_simulate::<f64>(n as u64, m as u64, k as u64).unwrap().success_prob;
                worst = worst.max((sim - closed).abs()).max((lib - closed).abs());
                cases += 1;
            }
        }
    }
    let ex = grover_simulate::<f64>(64, 1, 6).unwrap().success_prob;
    let ex_sim = grover_state_vector(64, 1, 6);
    check(
        worst <= GROVER_TOL && (ex - 0.9966).abs() <= GROVER_EXAMPLE_TOL && (ex_sim - ex).abs() <= GROVER_TOL,
        format!("{cases} (N,M,k) cases, max deviation {worst:.2e}; N=64 M=1 k=6 gives {ex:.6}"),
    )
}

fn criterion_5() -> Outcome {
    let mut errs = Vec::new();
    let mut count = 0;
    for n in 3..=12usize {
        for r in 2..n {
            let j = JohnsonChain::new(n, r).unwrap();
            count += 1;
            if let Err(e) = j.verify_spectrum() {
                errs.push(format!("J({n},{r}) spectrum: {e}"));
            }
            let gap = j.spectral_gap();
            // exact gap of J(n,r): n / (r(n−r))
            if gap != Ratio::new(n as i64, (r * (n - r)) as i64) || gap < Ratio::new(1, r as i64) {
                errs.push(format!("J({n},{r}) gap {gap}"));
            }
        }
    }
    let g63 = JohnsonChain::new(6, 3).unwrap().spectral_gap();
    check(errs.is_empty() && g63 == Ratio::new(2, 3), format!("{count} chains, J(6,3) gap {g63}, failures {errs:?}"))
}

fn criterion_6() -> Outcome {
    let cal = Calibration::fixture();
    let (cw, co) = default_grid();
    let fresh = calibrate(&cw, &co, MNRS_MIN_SUCCESS).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = fresh.c_w == cal.c_w && fresh.c_o == cal.c_o;
    for m in fixture_family() {
        let s = m.success(cal.c_w, cal.c_o).map_err(|e| e.to_string())?;
        let r = m.length_ratio(cal.c_w, cal.c_o).map_err(|e| e.to_string())?;
        ok &= s >= MNRS_MIN_SUCCESS && r <= MNRS_MAX_RATIO;
        lines.push(format!("{} success {s:.6} length ratio {r:.3}", m.label()));
    }
    check(ok, format!("c_w={} c_o={}: {}", cal.c_w, cal.c_o, lines.join("; ")))
}

fn call_bound(m: u32, d: usize) -> u64 {
    let mut lg = 0;
    while (1usize << lg) < d {
        lg += 1;
    }
    m as u64 + lg + 2
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut wrong, mut over, mut max_calls) = (0, 0, 0);
    for _ in 0..500 {
        let n = rng.gen_range(2..=300);
        let d = rng.gen_range(1..=3);
        let inst = gen::cp_uniform(&mut rng, n, d, 16).unwrap();
        let rep = cp_solve(&inst, &mut rng).map_err(|e| e.to_string())?;
        let want = oracles::brute_cp(inst.points()).unwrap().dist.0;
        wrong += (rep.dist_sq != Some(want)) as usize;
        over += (rep.oracle_calls > call_bound(16, d)) as usize;
        max_calls = max_calls.max(rep.oracle_calls);
    }
    let (mut hits, mut worst_ratio, mut rounds, mut fallback) = (0, 0.0f64, 0, 0);
    for _ in 0..200 {
        let n = rng.gen_range(40..=300);
        let d = rng.gen_range(1..=3);
        let eps_sq = [4u128, 9, 25][d - 1];
        let inst = gen::cp_planted(&mut rng, n, d, 10, eps_sq, n / 4).unwrap();
        let eps = EpsSq::integer(eps_sq).unwrap();
        let out = cp_multi_to_unique(&inst, eps, &mut rng).map_err(|e| e.to_string())?;
        let found = out.pair.is_some_and(|(i, j)| {
            eps.admits(dist_sq(inst.by_index(i).unwrap(), inst.by_index(j).unwrap()).unwrap())
        });
        hits += found as usize;
        fallback += out.by_fallback as usize;
        for r in out.rounds.iter().filter(|r| r.next_size != r.size) {
            worst_ratio = worst_ratio.max(r.ratio());
            rounds += 1;
        }
    }
    let rate = hits as f64 / 200.0;
    check(
        wrong == 0 && over == 0 && rate >= MULTI_MIN_SUCCESS && worst_ratio <= SHRINK_MAX,
        format!(
            "cp_solve: {wrong}/500 wrong, {over} over the call bound (max {max_calls} calls); multi-pair: success {rate:.3}, {rounds} shrinking rounds with max ratio {worst_ratio:.3}, {fallback} by final search"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut approx_bad = 0;
    let mut worst: f64 = 1.0;
    for t in 0..500 {
        let xi = if t % 2 == 0 { Ratio::new(1, 10) } else { Ratio::new(1, 2) };
        let n = rng.gen_range(1..=150);
        let d = rng.gen_range(1..=3);
        let inst = if t % 3 == 0 {
            gen::bcp_planted(&mut rng, n, d, 12, xi, 49).unwrap()
        } else {
            gen::bcp_uniform(&mut rng, n, d, 12, xi).unwrap()
        };
        let rep = bcp_approx_solve(&inst, &mut rng).map_err(|e| e.to_string())?;
        let opt = oracles::brute_bcp(inst.a(), inst.b()).unwrap().dist.0;
        let ok = match rep.dist_sq {
            Some(got) if opt == 0 => got == 0,
            Some(got) => EpsSq::integer(opt).unwrap().admits_relaxed(SqDistance(got), xi),
            None => false,
        };
        if let (Some(got), true) = (rep.dist_sq, opt > 0) {
            worst = worst.max((got as f64 / opt as f64).sqrt());
        }
        approx_bad += !ok as usize;
    }
    let mut exact_ok = 0;
    for t in 0..300 {
        let n = rng.gen_range(1..=256);
        let d = 2 + t % 2;
        let inst = gen::bcp_uniform(&mut rng, n, d, 16, Ratio::new(1, 2)).unwrap();
        let rep = bcp_exact_solve(&inst, &mut rng).map_err(|e| e.to_string())?;
        exact_ok += (rep.dist_sq == Some(oracles::brute_bcp(inst.a(), inst.b()).unwrap().dist.0)) as usize;
    }
    let rate = exact_ok as f64 / 300.0;
    check(
        approx_bad == 0 && rate >= BCP_EXACT_MIN_SUCCESS,
        format!("approx: {approx_bad}/500 over (1+ξ)·opt, worst ratio {worst:.4}; exact: {exact_ok}/300 match brute force"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (mut bad, mut with_pair) = (0, 0);
    for t in 0..300 {
        let n = if t < 20 { 512 } else { rng.gen_range(1..=512) };
        let d = rng.gen_range(1..=4);
        let density = rng.gen_range(0.3..0.95);
        let inst = gen::ov_random(&mut rng, n, d, density).unwrap();
        let rep = ov_solve(&inst, &mut rng).map_err(|e| e.to_string())?;
        let want = oracles::brute_ov(inst.a(), inst.b()).unwrap();
        with_pair += want.is_some() as usize;
        let ok = match rep.answer {
            Some((i, j)) => want.is_some() && inst.a()[i].iter().zip(&inst.b()[j]).all(|(x, y)| x * y == 0),
            None => want.is_none(),
        };
        bad += !ok as usize;
    }
    check(bad == 0, format!("300 instances ({with_pair} with an orthogonal pair), {bad} disagreements"))
}

fn subsets_of(vectors: &[Vec<u8>]) -> Vec<Vec<Vec<u8>>> {
    (1u32..1 << vectors.len())
        .map(|mask| vectors.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, v)| v.clone()).collect())
        .collect()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut sat_bad = 0;
    for t in 0..200 {
        let n = 3 + t % 8;
        let clauses = rng.gen_range(n..=5 * n);
        let phi = random_cnf(&mut rng, n, clauses, 3);
        let (fa, fb) = sat_to_ov(&phi);
        let ov = OvInstance::from_oracles(&fa, &fb).unwrap();
        let sat = oracles::brute_sat(&phi).unwrap().is_some();
        sat_bad += (sat != oracles::brute_ov(ov.a(), ov.b()).unwrap().is_some()) as usize;
    }
    let mut ovb_bad = 0;
    let mut ovb_cases = 0;
    for d in 1..=3usize {
        let all: Vec<Vec<u8>> = (0..1u32 << d).map(|v| (0..d).map(|k| (v >> k & 1) as u8).collect()).collect();
        let sets = subsets_of(&all);
        for a in &sets {
            for b in &sets {
                let inst = OvInstance::new(a.clone(), b.clone()).unwrap();
                let bcp = ov_to_bcp(&inst);
                let min = oracles::brute_bcp(bcp.a(), bcp.b()).unwrap().dist.0;
                let orth = oracles::brute_ov(a, b).unwrap().is_some();
                ovb_bad += ((min == 2 * d as u128) != orth) as usize;
                ovb_cases += 1;
            }
        }
    }
    let vals: Vec<Vec<i64>> = (-3..=3).flat_map(|x| (-3..=3).map(move |y| vec![x, y])).collect();
    let z = zov_to_bcp(&vals, &vals, 4, 1).map_err(|e| e.to_string())?;
    let mut zov_bad = 0;
    for i in 0..vals.len() {
        for j in 0..vals.len() {
            let dot = vals[i][0] * vals[j][0] + vals[i][1] * vals[j][1];
            let dd = z.sq_distance(i, j);
            zov_bad += ((dd == z.threshold()) != (dot == 0) || dd < z.threshold()) as usize;
        }
    }
    check(
        sat_bad + ovb_bad + zov_bad == 0,
        format!(
            "sat_to_ov {sat_bad}/200 wrong; ov_to_bcp {ovb_bad}/{ovb_cases} wrong; zov_to_bcp {zov_bad}/{} wrong",
            vals.len() * vals.len()
        ),
    )
}

/// Least-squares slope of log cost against log n.
fn slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(n, c)| (n.ln(), c.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_11() -> Outcome {
    let ns: Vec<u64> = (10..=20).map(|e| 1u64 << e).collect();
    let p = CostProfile::Leading;
    let mut lines = Vec::new();
    let mut ok = true;
    let mut fit = |name: String, want: f64, f: &dyn Fn(u64) -> f64| {
        let s = slope(&ns.iter().map(|&n| (n as f64, f(n))).collect::<Vec<_>>());
        ok &= (s - want).abs() <= SLOPE_TOL;
        lines.push(format!("{name} {s:.4} (want {want:.4})"));
    };
    fit("cp_eps d=2".into(), 2.0 / 3.0, &|n| cp_eps_cost::<f64>(n, 2, p).unwrap().total);
    for d in 2..=3 {
        fit(format!("bcp_exact d={d}"), 1.0 - 1.0 / (2.0 * d as f64), &|n| bcp_exact_cost::<f64>(n, d, NnCost::Paper, p));
    }
    fit("ov presence d=3".into(), 0.5, &|n| ov_presence_cost::<f64>(n, 3, p));
    check(ok, lines.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("history independence", criterion_1),
        ("flag correctness", criterion_2),
        ("geometry", criterion_3),
        ("grover closed form", criterion_4),
        ("johnson spectra", criterion_5),
        ("mnrs walk", criterion_6),
        ("end-to-end cp", criterion_7),
        ("bcp", criterion_8),
        ("ov", criterion_9),
        ("reductions", criterion_10),
        ("exponent fits", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &id.to_string() || name.contains(a.as_str())) {
            continue;
        }
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS criterion {id:>2} {name} [{secs:.1}s]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name} [{secs:.1}s]: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
