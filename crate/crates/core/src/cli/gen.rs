//! Seeded instance generators.

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng;

use super::CliError;
use crate::geometry::{dist_sq, ceil_sqrt, Point};
use crate::solvers::{BcpInstance, CpInstance, OvInstance};

fn uniform_coords<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, m: u32) -> Vec<Vec<u64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(0..1u64 << m)).collect()).collect()
}

fn check(n: usize, d: usize, m: u32) -> Result<(), CliError> {
    if n == 0 || d == 0 || !(1..=32).contains(&m) {
        return Err(CliError::Params(format!("need n ≥ 1, d ≥ 1 and 1 ≤ m ≤ 32, got n={n}, d={d}, m={m}")));
    }
    Ok(())
}

/// An integer vector of squared norm `t` with at most `d` nonzero entries,
/// largest entries first, or `None` when there is none.
pub fn lattice_vector(t: u128, d: usize) -> Option<Vec<i64>> {
    fn go(t: u128, d: usize, cap: u128, out: &mut Vec<i64>) -> bool {
        if t == 0 {
            return true;
        }
        if d == 0 {
            return false;
        }
        let mut a = ceil_sqrt(t).min(cap);
        while a * a > t {
            a -= 1;
        }
        // entries are non-increasing, so d·a² must still cover t
        while a > 0 && (d as u128) * a * a >= t {
            out.push(a as i64);
            if go(t - a * a, d - 1, a, out) {
                return true;
            }
            out.pop();
            a -= 1;
        }
        false
    }
    let mut out = Vec::new();
    if go(t, d, u128::MAX, &mut out) {
        out.resize(d, 0);
        Some(out)
    } else {
        None
    }
}

/// Moves point `j` to `p + v` for a random `p` that keeps both in range.
fn plant<R: Rng + ?Sized>(rng: &mut R, coords: &mut [Vec<u64>], i: usize, j: usize, v: &[i64], m: u32) -> Result<(), CliError> {
    let side = 1i64 << m;
    let mut p = Vec::with_capacity(v.len());
    for &x in v {
        let (lo, hi) = (0.max(-x), side.min(side - x));
        if lo >= hi {
            return Err(CliError::Params("planted offset does not fit in the coordinate range".into()));
        }
        p.push(rng.gen_range(lo..hi));
    }
    coords[i] = p.iter().map(|&x| x as u64).collect();
    coords[j] = p.iter().zip(v).map(|(&x, &o)| (x + o) as u64).collect();
    Ok(())
}

fn offset(eps_sq: u128, d: usize) -> Result<Vec<i64>, CliError> {
    lattice_vector(eps_sq, d).ok_or_else(|| CliError::Params(format!("{eps_sq} is not a sum of {d} squares")))
}

pub fn cp_uniform<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, m: u32) -> Result<CpInstance, CliError> {
    check(n, d, m)?;
    Ok(CpInstance::from_coords(uniform_coords(rng, n, d, m), m)?)
}

/// Uniform points with `pairs` disjoint pairs at squared distance exactly
/// `eps_sq`, planted at random positions.
pub fn cp_planted<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, m: u32, eps_sq: u128, pairs: usize) -> Result<CpInstance, CliError> {
    check(n, d, m)?;
    if 2 * pairs > n {
        return Err(CliError::Params(format!("{pairs} pairs need {} points, have {n}", 2 * pairs)));
    }
    let v = offset(eps_sq, d)?;
    let mut coords = uniform_coords(rng, n, d, m);
    let slots = sample(rng, n, 2 * pairs).into_vec();
    for k in 0..pairs {
        let mut w = v.clone();
        w.iter_mut().for_each(|x| if rng.gen_bool(0.5) { *x = -*x });
        plant(rng, &mut coords, slots[2 * k], slots[2 * k + 1], &w, m)?;
    }
    let inst = CpInstance::from_coords(coords, m)?;
    let p = inst.points();
    debug_assert!(
        (0..pairs).all(|k| dist_sq(&p[slots[2 * k]], &p[slots[2 * k + 1]]).map(|x| x.0) == Ok(eps_sq))
    );
    Ok(inst)
}

pub fn bcp_uniform<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, m: u32, xi: Ratio<u64>) -> Result<BcpInstance, CliError> {
    check(n, d, m)?;
    Ok(BcpInstance::from_coords(uniform_coords(rng, n, d, m), uniform_coords(rng, n, d, m), m, xi)?)
}

/// Uniform color classes with one cross pair at squared distance `eps_sq`.
pub fn bcp_planted<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, m: u32, xi: Ratio<u64>, eps_sq: u128) -> Result<BcpInstance, CliError> {
    check(n, d, m)?;
    let v = offset(eps_sq, d)?;
    let mut a = uniform_coords(rng, n, d, m);
    let mut b = uniform_coords(rng, n, d, m);
    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
    let mut both = vec![a[i].clone(), b[j].clone()];
    plant(rng, &mut both, 0, 1, &v, m)?;
    a[i] = both[0].clone();
    b[j] = both[1].clone();
    Ok(BcpInstance::from_coords(a, b, m, xi)?)
}

/// Independent 0/1 entries equal to one with probability `density`.
pub fn ov_random<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, density: f64) -> Result<OvInstance, CliError> {
    if n == 0 || d == 0 || !(0.0..=1.0).contains(&density) {
        return Err(CliError::Params(format!("need n ≥ 1, d ≥ 1 and density in [0, 1], got {n}, {d}, {density}")));
    }
    let mut side = || -> Vec<Vec<u8>> { (0..n).map(|_| (0..d).map(|_| rng.gen_bool(density) as u8).collect()).collect() };
    let a = side();
    let b = side();
    Ok(OvInstance::new(a, b)?)
}

pub fn ed_values<R: Rng + ?Sized>(rng: &mut R, n: usize, range: i64) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-range..=range)).collect()
}

/// Points as stored: the instance's own coordinates.
pub fn coords_of(points: &[Point]) -> Vec<Vec<u64>> {
    points.iter().map(|p| p.coords().to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lattice_vectors() {
        assert_eq!(lattice_vector(25, 1), Some(vec![5]));
        assert_eq!(lattice_vector(24, 1), None);
        assert_eq!(lattice_vector(3, 2), None);
        assert_eq!(lattice_vector(7, 3), None);
        for t in 0..300u128 {
            let v = lattice_vector(t, 4).unwrap();
            assert_eq!(v.iter().map(|&x| (x * x) as u128).sum::<u128>(), t);
        }
    }

    #[test]
    fn planted_pairs_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = cp_planted(&mut rng, 50, 3, 10, 29, 5).unwrap();
        assert_eq!(inst.n(), 50);
        let close = crate::oracles::close_pairs(inst.points(), crate::geometry::EpsSq::integer(29).unwrap());
        assert!(close.len() >= 5);
        let b = bcp_planted(&mut rng, 20, 2, 8, Ratio::new(1, 10), 13).unwrap();
        assert!(crate::oracles::brute_bcp(b.a(), b.b()).unwrap().dist.0 <= 13);
    }

    #[test]
    fn same_seed_same_instance() {
        let a = cp_uniform(&mut ChaCha8Rng::seed_from_u64(4), 30, 2, 12).unwrap();
        let b = cp_uniform(&mut ChaCha8Rng::seed_from_u64(4), 30, 2, 12).unwrap();
        assert_eq!(a, b);
        assert!(cp_uniform(&mut ChaCha8Rng::seed_from_u64(4), 0, 2, 12).is_err());
    }
}
