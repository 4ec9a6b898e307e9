use num_rational::Ratio;
use proptest::prelude::*;
use qcpair::geometry::{dist_sq, Color, EpsSq, GridParams, Point};
use qcpair::histructs::{HiError, HiStructure, StructureConfig, Variant};
use qcpair::oracles;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const M: u32 = 6;

fn config(d: usize, eps: u128, n: usize, seed: u64) -> StructureConfig {
    StructureConfig::new(GridParams::unit(d, EpsSq::integer(eps).unwrap()).unwrap(), n, n, M, seed)
}

fn bi_config(d: usize, eps: u128, xi: Ratio<u64>, n: usize, seed: u64) -> StructureConfig {
    StructureConfig::new(GridParams::for_xi(d, EpsSq::integer(eps).unwrap(), xi).unwrap(), n, n, M, seed)
}

fn random_points(rng: &mut ChaCha8Rng, k: usize, d: usize, n: usize) -> Vec<Point> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(k);
    idx.into_iter().map(|i| Point::new(i, (0..d).map(|_| rng.gen_range(0..1 << M)).collect()).unwrap()).collect()
}

#[test]
fn spec_examples_basic() {
    let grid = GridParams::unit(1, EpsSq::integer(4).unwrap()).unwrap();
    let mut h = HiStructure::new(Variant::Basic, StructureConfig::new(grid, 8, 8, M, 0)).unwrap();
    assert_eq!(h.has_close_pair(), Some(false));
    let empty = h.canonical_serialize();
    let p0 = Point::new(0, vec![0]).unwrap();
    h.insert(Color::A, 0, &p0).unwrap();
    h.insert(Color::A, 1, &Point::new(1, vec![5]).unwrap()).unwrap();
    assert_eq!(h.has_close_pair(), Some(false));
    h.delete(Color::A, 1, &Point::new(1, vec![5]).unwrap()).unwrap();
    h.insert(Color::A, 1, &Point::new(1, vec![1]).unwrap()).unwrap();
    assert_eq!(h.has_close_pair(), Some(true));
    assert_eq!(h.find_close_pair().unwrap(), Some((0, 1)));
    h.delete(Color::A, 1, &Point::new(1, vec![1]).unwrap()).unwrap();
    h.delete(Color::A, 0, &p0).unwrap();
    assert_eq!(h.canonical_serialize(), empty);
    assert_eq!(h.insert(Color::B, 0, &p0), Err(HiError::ColorUnsupported));
}

#[test]
fn augmented_cross_box_pair_and_survivor() {
    // width √2 boxes in the plane, ε = 2
    let mut h = HiStructure::new(Variant::Augmented, config(2, 4, 16, 3)).unwrap();
    let a = Point::new(0, vec![10, 10]).unwrap();
    let b = Point::new(1, vec![12, 10]).unwrap();
    h.insert(Color::A, 0, &a).unwrap();
    h.insert(Color::A, 1, &b).unwrap();
    h.audit().unwrap();
    assert_eq!(h.has_close_pair(), Some(true));
    let c = Point::new(2, vec![10, 11]).unwrap();
    h.insert(Color::A, 2, &c).unwrap();
    h.audit().unwrap();
    h.delete(Color::A, 2, &c).unwrap();
    h.audit().unwrap();
    assert_eq!(h.has_close_pair(), Some(true));
    h.delete(Color::A, 1, &b).unwrap();
    h.audit().unwrap();
    assert_eq!(h.has_close_pair(), Some(false));
}

#[test]
fn bichromatic_examples() {
    let mut h = HiStructure::new(Variant::Bichromatic, bi_config(2, 16, Ratio::new(1, 2), 8, 1)).unwrap();
    let a0 = Point::new(0, vec![20, 20]).unwrap();
    let a1 = Point::new(1, vec![20, 21]).unwrap();
    h.insert(Color::A, 0, &a0).unwrap();
    h.insert(Color::A, 1, &a1).unwrap();
    assert_eq!(h.has_close_pair(), Some(false));
    let b0 = Point::new(0, vec![22, 21]).unwrap();
    h.insert(Color::B, 0, &b0).unwrap();
    assert_eq!(h.has_close_pair(), Some(true));
    let (i, j) = h.find_close_pair().unwrap().unwrap();
    let pa = [&a0, &a1][i];
    assert!(EpsSq::integer(16).unwrap().admits_relaxed(dist_sq(pa, &b0).unwrap(), Ratio::new(1, 2)));
    assert_eq!(j, 0);
    h.delete(Color::B, 0, &b0).unwrap();
    assert_eq!(h.has_close_pair(), Some(false));
    h.audit().unwrap();
}

#[test]
fn serialization_injective_small_sets() {
    // every subset of a 5-point universe serializes differently
    let pts: Vec<Point> = (0..5).map(|i| Point::new(i, vec![(i * 9) as u64 % 64, (i * 5) as u64]).unwrap()).collect();
    let mut seen = std::collections::HashSet::new();
    for mask in 0u32..32 {
        if mask.count_ones() > 4 {
            continue;
        }
        let mut h = HiStructure::new(Variant::Augmented, config(2, 4, 5, 9)).unwrap();
        for p in pts.iter().filter(|p| mask >> p.index() & 1 == 1) {
            h.insert(Color::A, p.index(), p).unwrap();
        }
        assert!(seen.insert(h.canonical_serialize()));
    }
}

#[test]
fn sampling_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut h = HiStructure::new(Variant::Augmented, config(2, 9, 64, 2)).unwrap();
    for p in random_points(&mut rng, 16, 2, 64) {
        h.insert(Color::A, p.index(), &p).unwrap();
    }
    let HiStructure::Augmented(t) = &h else { unreachable!() };
    for i in t.indices() {
        assert_eq!(t.descent_probability(i), Some(Ratio::new(1, 16)));
    }
    let draws = 100_000;
    let mut freq = std::collections::BTreeMap::new();
    for _ in 0..draws {
        *freq.entry(h.sample_uniform_index(None, &mut rng).unwrap()).or_insert(0u32) += 1;
    }
    assert_eq!(freq.len(), 16);
    let expect = draws as f64 / 16.0;
    let sigma = (expect * (1.0 - 1.0 / 16.0)).sqrt();
    for (&i, &f) in &freq {
        assert!((f as f64 - expect).abs() < 3.0 * sigma + 1.0, "index {i}: {f}");
    }
    let chi2: f64 = freq.values().map(|&f| (f as f64 - expect).powi(2) / expect).sum();
    // 15 degrees of freedom, 99.9% quantile
    assert!(chi2 < 37.7, "chi-square {chi2}");
}

#[test]
fn singleton_sample() {
    let mut h = HiStructure::new(Variant::Basic, config(1, 1, 4, 0)).unwrap();
    assert_eq!(h.sample_uniform_index(None, &mut ChaCha8Rng::seed_from_u64(0)), Err(HiError::Empty));
    h.insert(Color::A, 3, &Point::new(3, vec![7]).unwrap()).unwrap();
    assert_eq!(h.sample_uniform_index(None, &mut ChaCha8Rng::seed_from_u64(0)), Ok(3));
}

#[test]
fn deleting_frees_cells() {
    let mut h = HiStructure::new(Variant::Basic, config(1, 1, 4, 0)).unwrap();
    h.insert(Color::A, 0, &Point::new(0, vec![1]).unwrap()).unwrap();
    h.insert(Color::A, 1, &Point::new(1, vec![40]).unwrap()).unwrap();
    h.delete(Color::A, 1, &Point::new(1, vec![40]).unwrap()).unwrap();
    let HiStructure::Basic(t) = &h else { unreachable!() };
    assert_eq!(t.len(), 1);
    h.audit().unwrap();
}

fn run_history(variant: Variant, seed: u64, d: usize, k: usize, extra: usize) -> (Vec<u8>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 64;
    let cfg = match variant {
        Variant::Bichromatic => bi_config(d, 16, Ratio::new(1, 2), n, seed),
        _ => config(d, 2, n, seed),
    };
    let pts = random_points(&mut rng, k + extra, d, n);
    let colors: Vec<Color> = pts.iter().map(|_| if rng.gen_bool(0.5) { Color::A } else { Color::B }).collect();
    let color = |j: usize| if variant == Variant::Bichromatic { colors[j] } else { Color::A };
    let build = |rng: &mut ChaCha8Rng, with_extra: bool| {
        let mut h = HiStructure::new(variant, cfg.clone()).unwrap();
        let mut order: Vec<usize> = (0..if with_extra { k + extra } else { k }).collect();
        order.shuffle(rng);
        for &j in &order {
            h.insert(color(j), pts[j].index(), &pts[j]).unwrap();
        }
        let mut del: Vec<usize> = (k..order.len()).collect();
        del.shuffle(rng);
        for j in del {
            h.delete(color(j), pts[j].index(), &pts[j]).unwrap();
        }
        h.audit().unwrap();
        h.canonical_serialize()
    };
    (build(&mut rng, false), build(&mut rng, true))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn augmented_history_independent(seed in any::<u64>(), d in 1usize..=3, k in 0usize..30, extra in 0usize..10) {
        let (a, b) = run_history(Variant::Augmented, seed, d, k, extra);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn bichromatic_history_independent(seed in any::<u64>(), d in 1usize..=3, k in 0usize..30, extra in 0usize..10) {
        let (a, b) = run_history(Variant::Bichromatic, seed, d, k, extra);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn augmented_flag_matches_brute_force(seed in any::<u64>(), d in 1usize..=3, ops in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 48;
        let mut h = HiStructure::new(Variant::Augmented, config(d, 9, n, seed)).unwrap();
        let mut live: Vec<Point> = Vec::new();
        for _ in 0..ops {
            if !live.is_empty() && rng.gen_bool(0.35) {
                let p = live.swap_remove(rng.gen_range(0..live.len()));
                h.delete(Color::A, p.index(), &p).unwrap();
            } else if live.len() < n {
                let i = loop {
                    let i = rng.gen_range(0..n);
                    if live.iter().all(|p| p.index() != i) { break i; }
                };
                let p = Point::new(i, (0..d).map(|_| rng.gen_range(0..24)).collect()).unwrap();
                h.insert(Color::A, i, &p).unwrap();
                live.push(p);
            }
            prop_assert!(h.last_op().total() <= h.step_bound());
            if h.failures().total() == 0 {
                prop_assert_eq!(h.has_close_pair(), Some(oracles::exists_close_pair(&live, EpsSq::integer(9).unwrap())));
            }
            h.audit().unwrap();
        }
        if let Some((i, j)) = h.find_close_pair().unwrap() {
            let (p, q) = (live.iter().find(|p| p.index() == i).unwrap(), live.iter().find(|p| p.index() == j).unwrap());
            prop_assert!(dist_sq(p, q).unwrap().value() <= 9);
        }
    }

    #[test]
    fn bichromatic_flag_brackets(seed in any::<u64>(), d in 1usize..=3, k in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = Ratio::new(1, 2);
        let eps = EpsSq::integer(25).unwrap();
        let mut h = HiStructure::new(Variant::Bichromatic, bi_config(d, 25, xi, 64, seed)).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for t in 0..k {
            let p = Point::new(t, (0..d).map(|_| rng.gen_range(0..40)).collect()).unwrap();
            let c = if rng.gen_bool(0.5) { Color::A } else { Color::B };
            h.insert(c, t, &p).unwrap();
            if c == Color::A { a.push(p) } else { b.push(p) }
        }
        h.audit().unwrap();
        let flag = h.has_close_pair().unwrap();
        if oracles::exists_close_cross_pair(&a, &b, eps) {
            prop_assert!(flag);
        }
        if flag {
            let (i, j) = h.find_close_pair().unwrap().unwrap();
            let (p, q) = (a.iter().find(|p| p.index() == i).unwrap(), b.iter().find(|p| p.index() == j).unwrap());
            prop_assert!(eps.admits_relaxed(dist_sq(p, q).unwrap(), xi));
        }
    }
}
