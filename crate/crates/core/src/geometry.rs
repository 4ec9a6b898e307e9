//! Integer-grid points, exact squared distances and the ε-box hypergrid.
//!
//! All comparisons are carried out in exact integer arithmetic. The box width
//! `w = scale·ε/√d` is irrational in general, so it never appears directly:
//! every test involving `w` is squared first and cross-multiplied.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("points must have at least one coordinate")]
    EmptyPoint,
    #[error("coordinate {value} of point {index} does not fit in {bits} bits")]
    CoordinateOutOfRange { index: usize, value: u64, bits: u32 },
    #[error("squared threshold must be a positive rational, got {num}/{den}")]
    InvalidEps { num: u128, den: u128 },
    #[error("grid scale must be a positive rational, got {num}/{den}")]
    InvalidScale { num: u64, den: u64 },
    #[error("grid parameters overflow exact 128-bit arithmetic")]
    GridTooFine,
}

/// Color class of a point in a bichromatic instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Color {
    A,
    B,
}

impl Color {
    pub fn other(self) -> Self {
        match self {
            Color::A => Color::B,
            Color::B => Color::A,
        }
    }

    pub fn slot(self) -> usize {
        match self {
            Color::A => 0,
            Color::B => 1,
        }
    }
}

/// A point of the integer grid `[0, 2^m)^d`, tagged with its input position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    index: usize,
    coords: Vec<u64>,
}

impl Point {
    pub fn new(index: usize, coords: Vec<u64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::EmptyPoint);
        }
        Ok(Self { index, coords })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn with_index(&self, index: usize) -> Self {
        Self { index, coords: self.coords.clone() }
    }

    /// Fails unless every coordinate is below `2^bits`.
    pub fn check_bits(&self, bits: u32) -> Result<(), GeometryError> {
        for &c in &self.coords {
            if bits < 64 && c >> bits != 0 {
                return Err(GeometryError::CoordinateOutOfRange { index: self.index, value: c, bits });
            }
        }
        Ok(())
    }
}

/// Exact squared Euclidean distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SqDistance(pub u128);

impl SqDistance {
    pub fn value(self) -> u128 {
        self.0
    }

    pub fn sqrt_f64(self) -> f64 {
        (self.0 as f64).sqrt()
    }
}

impl fmt::Display for SqDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn dist_sq(a: &Point, b: &Point) -> Result<SqDistance, GeometryError> {
    if a.dim() != b.dim() {
        return Err(GeometryError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(dist_sq_coords(a.coords(), b.coords()))
}

/// Squared distance of equal-length coordinate slices.
pub fn dist_sq_coords(a: &[u64], b: &[u64]) -> SqDistance {
    debug_assert_eq!(a.len(), b.len());
    SqDistance(
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let diff = x.abs_diff(y) as u128;
                diff * diff
            })
            .sum(),
    )
}

/// Squared threshold `ε² = num/den`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EpsSq {
    num: u128,
    den: u128,
}

impl EpsSq {
    pub fn new(num: u128, den: u128) -> Result<Self, GeometryError> {
        if num == 0 || den == 0 {
            return Err(GeometryError::InvalidEps { num, den });
        }
        let g = gcd_u128(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn integer(value: u128) -> Result<Self, GeometryError> {
        Self::new(value, 1)
    }

    /// Threshold admitting exactly the integer squared distances `≤ t`.
    ///
    /// Integer points have integer squared distances, so `t = 0` is realised
    /// by `ε² = 1/2`.
    pub fn for_integer_threshold(t: u128) -> Self {
        if t == 0 {
            Self { num: 1, den: 2 }
        } else {
            Self { num: t, den: 1 }
        }
    }

    pub fn num(&self) -> u128 {
        self.num
    }

    pub fn den(&self) -> u128 {
        self.den
    }

    /// `dist² ≤ ε²`, boundary included.
    pub fn admits(&self, d: SqDistance) -> bool {
        d.0.checked_mul(self.den).map_or(false, |lhs| lhs <= self.num)
    }

    /// `dist² ≤ (1+ξ)²·ε²` for rational `ξ`.
    pub fn admits_relaxed(&self, d: SqDistance, xi: Ratio<u64>) -> bool {
        let (a, b) = (*xi.numer() as u128, *xi.denom() as u128);
        let lhs = d.0.checked_mul(self.den).and_then(|x| x.checked_mul(b * b));
        let rhs = self.num.checked_mul((a + b) * (a + b));
        match (lhs, rhs) {
            (Some(l), Some(r)) => l <= r,
            _ => (d.0 as f64) <= self.to_f64() * (1.0 + a as f64 / b as f64).powi(2),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Largest integer squared distance admitted.
    pub fn floor(&self) -> u128 {
        self.num / self.den
    }
}

impl fmt::Display for EpsSq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Index vector of a box in the hypergrid.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoxId(pub Vec<u64>);

impl BoxId {
    pub fn indices(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Hypergrid of boxes of width `scale·ε/√d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridParams {
    dim: usize,
    eps: EpsSq,
    scale_num: u64,
    scale_den: u64,
}

impl GridParams {
    /// The ε-box grid used for closest pair (`scale = 1`).
    pub fn unit(dim: usize, eps: EpsSq) -> Result<Self, GeometryError> {
        Self::with_scale(dim, eps, 1, 1)
    }

    /// The finer grid for the approximate bichromatic problem: `scale = ξ/2`.
    pub fn for_xi(dim: usize, eps: EpsSq, xi: Ratio<u64>) -> Result<Self, GeometryError> {
        Self::with_scale(dim, eps, *xi.numer(), 2 * *xi.denom())
    }

    pub fn with_scale(dim: usize, eps: EpsSq, num: u64, den: u64) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::EmptyPoint);
        }
        if num == 0 || den == 0 {
            return Err(GeometryError::InvalidScale { num, den });
        }
        let g = gcd_u128(num as u128, den as u128) as u64;
        let (num, den) = (num / g, den / g);
        // d·p²·sd²·ed must fit in u128 for p < 2^32.
        let bound = (dim as u128)
            .checked_mul(den as u128 * den as u128)
            .and_then(|x| x.checked_mul(eps.den));
        match bound {
            Some(b) if b < (1u128 << 62) => {}
            _ => return Err(GeometryError::GridTooFine),
        }
        let lower = (num as u128).checked_mul(num as u128).and_then(|x| x.checked_mul(eps.num));
        if lower.is_none() {
            return Err(GeometryError::GridTooFine);
        }
        Ok(Self { dim, eps, scale_num: num, scale_den: den })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> EpsSq {
        self.eps
    }

    pub fn scale(&self) -> (u64, u64) {
        (self.scale_num, self.scale_den)
    }

    /// Box index of a single coordinate: the unique `k` with
    /// `k²·scale²·ε² ≤ d·p² < (k+1)²·scale²·ε²`.
    pub fn coord_box(&self, p: u64) -> u64 {
        let sd = self.scale_den as u128;
        let sn = self.scale_num as u128;
        let p = p as u128;
        let lhs = (self.dim as u128) * p * p;
        let lhs = lhs
            .checked_mul(sd * sd)
            .and_then(|x| x.checked_mul(self.eps.den))
            .expect("coordinate below 2^32 keeps products in range");
        let rhs = sn * sn * self.eps.num;
        (lhs / rhs).isqrt() as u64
    }

    /// Largest per-coordinate index offset an ε-neighbor can have.
    pub fn neighbor_radius(&self) -> u64 {
        // largest gap g with g²·sn² < d·sd², plus one
        let sn = self.scale_num as u128;
        let sd = self.scale_den as u128;
        let target = self.dim as u128 * sd * sd;
        let mut g = ((target / (sn * sn)) as u128).isqrt();
        while g > 0 && g * g * sn * sn >= target {
            g -= 1;
        }
        while (g + 1) * (g + 1) * sn * sn < target {
            g += 1;
        }
        if g * g * sn * sn >= target {
            // only g = 0 remains, which is always allowed
            return 1;
        }
        g as u64 + 1
    }

    /// Offsets `Δ` (lexicographic) for which two boxes are ε-neighbors.
    pub fn neighbor_offsets(&self) -> Vec<Vec<i64>> {
        let radius = self.neighbor_radius() as i64;
        let d = self.dim;
        let mut out = Vec::new();
        let mut cur = vec![-radius; d];
        loop {
            if self.offset_is_neighbor(&cur) {
                out.push(cur.clone());
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if cur[k] < radius {
                    cur[k] += 1;
                    for c in cur.iter_mut().skip(k + 1) {
                        *c = -radius;
                    }
                    break;
                }
            }
        }
    }

    fn offset_is_neighbor(&self, delta: &[i64]) -> bool {
        let gap_sq: u128 = delta
            .iter()
            .map(|&x| {
                let g = x.unsigned_abs().saturating_sub(1) as u128;
                g * g
            })
            .sum();
        if gap_sq == 0 {
            return true;
        }
        let sn = self.scale_num as u128;
        let sd = self.scale_den as u128;
        gap_sq * sn * sn < self.dim as u128 * sd * sd
    }
}

pub fn box_id(p: &Point, g: &GridParams) -> Result<BoxId, GeometryError> {
    if p.dim() != g.dim() {
        return Err(GeometryError::DimensionMismatch { left: p.dim(), right: g.dim() });
    }
    Ok(BoxId(p.coords().iter().map(|&c| g.coord_box(c)).collect()))
}

/// Whether the closures of two boxes come within distance ε of each other.
///
/// Half-open boxes at positive gap never realise the gap itself, so the
/// comparison is strict there; boxes that touch or coincide are always
/// neighbors.
pub fn are_eps_neighbors(g1: &BoxId, g2: &BoxId, grid: &GridParams) -> Result<bool, GeometryError> {
    if g1.dim() != g2.dim() {
        return Err(GeometryError::DimensionMismatch { left: g1.dim(), right: g2.dim() });
    }
    if g1.dim() != grid.dim() {
        return Err(GeometryError::DimensionMismatch { left: g1.dim(), right: grid.dim() });
    }
    let delta: Vec<i64> = g1.0.iter().zip(&g2.0).map(|(&a, &b)| a as i64 - b as i64).collect();
    Ok(grid.offset_is_neighbor(&delta))
}

/// All ε-neighbors of `g1` with nonnegative indices, `g1` included, in
/// lexicographic order.
pub fn enumerate_eps_neighbors(g1: &BoxId, grid: &GridParams) -> Vec<BoxId> {
    grid.neighbor_offsets()
        .into_iter()
        .filter_map(|off| offset_box(g1, &off))
        .collect()
}

/// `g + off` when every index stays nonnegative.
pub fn offset_box(g: &BoxId, off: &[i64]) -> Option<BoxId> {
    g.0.iter()
        .zip(off)
        .map(|(&a, &o)| {
            let v = a as i64 + o;
            (v >= 0).then_some(v as u64)
        })
        .collect::<Option<Vec<_>>>()
        .map(BoxId)
}

/// `(2⌈√d⌉+1)^d`.
pub fn unit_neighbor_bound(d: usize) -> u128 {
    let c = ceil_sqrt(d as u128);
    (2 * c + 1).pow(d as u32)
}

/// `(⌈4√d/ξ⌉+1)^d` for `ξ = a/b`.
pub fn fine_neighbor_bound(d: usize, xi: Ratio<u64>) -> u128 {
    let (a, b) = (*xi.numer() as u128, *xi.denom() as u128);
    // smallest k with k·a ≥ 4·√d·b, i.e. k²a² ≥ 16·d·b²
    let target = 16 * d as u128 * b * b;
    let mut k = (target / (a * a)).isqrt();
    while k * k * a * a < target {
        k += 1;
    }
    while k > 0 && (k - 1) * (k - 1) * a * a >= target {
        k -= 1;
    }
    (k + 1).pow(d as u32)
}

pub fn ceil_sqrt(x: u128) -> u128 {
    let r = x.isqrt();
    if r * r == x {
        r
    } else {
        r + 1
    }
}

/// Parses a nonnegative decimal such as `0.25` or `3/8` into a rational.
pub fn parse_ratio(s: &str) -> Option<Ratio<u64>> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().ok()?;
        let d: u64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Ratio::new(n, d));
    }
    match s.split_once('.') {
        None => s.parse().ok().map(Ratio::from_integer),
        Some((int, frac)) => {
            let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
            if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return None;
            }
            let den = 10u64.pow(frac.len() as u32);
            let f: u64 = frac.parse().ok()?;
            Some(Ratio::new(int.checked_mul(den)?.checked_add(f)?, den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[u64]) -> Point {
        Point::new(0, c.to_vec()).unwrap()
    }

    fn naive_dist(a: &[u64], b: &[u64]) -> u128 {
        let mut s: i128 = 0;
        for i in 0..a.len() {
            let d = a[i] as i128 - b[i] as i128;
            s += d * d;
        }
        s as u128
    }

    #[test]
    fn dist_sq_basics() {
        assert_eq!(dist_sq(&pt(&[4, 9]), &pt(&[4, 9])).unwrap(), SqDistance(0));
        assert_eq!(dist_sq(&pt(&[0, 0]), &pt(&[3, 4])).unwrap(), SqDistance(25));
        assert!(matches!(
            dist_sq(&pt(&[0]), &pt(&[0, 1])),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn box_id_examples() {
        let g = GridParams::unit(2, EpsSq::integer(2).unwrap()).unwrap();
        assert_eq!(box_id(&pt(&[0, 0]), &g).unwrap(), BoxId(vec![0, 0]));
        assert_eq!(box_id(&pt(&[3, 5]), &g).unwrap(), BoxId(vec![3, 5]));
        let g1 = GridParams::unit(1, EpsSq::integer(4).unwrap()).unwrap();
        assert_eq!(box_id(&pt(&[7]), &g1).unwrap(), BoxId(vec![3]));
    }

    #[test]
    fn neighbors_in_one_dimension() {
        let g = GridParams::unit(1, EpsSq::integer(4).unwrap()).unwrap();
        let b = |i| BoxId(vec![i]);
        assert!(are_eps_neighbors(&b(0), &b(0), &g).unwrap());
        assert!(are_eps_neighbors(&b(0), &b(1), &g).unwrap());
        // [0,2) and [4,6): no pair of points realises the gap 2
        assert!(!are_eps_neighbors(&b(0), &b(2), &g).unwrap());
        assert!(!are_eps_neighbors(&b(0), &b(3), &g).unwrap());
        assert_eq!(enumerate_eps_neighbors(&b(5), &g), vec![b(4), b(5), b(6)]);
        assert_eq!(enumerate_eps_neighbors(&b(0), &g), vec![b(0), b(1)]);
    }

    #[test]
    fn neighbor_count_bounds() {
        for d in 1..=4 {
            let g = GridParams::unit(d, EpsSq::integer(9).unwrap()).unwrap();
            let n = g.neighbor_offsets().len() as u128;
            assert!(n <= unit_neighbor_bound(d), "d={d}: {n}");
        }
        assert_eq!(unit_neighbor_bound(2), 25);
        for xi in [Ratio::new(1, 10), Ratio::new(1, 2)] {
            for d in 1..=3 {
                let g = GridParams::for_xi(d, EpsSq::integer(100).unwrap(), xi).unwrap();
                assert!(g.neighbor_offsets().len() as u128 <= fine_neighbor_bound(d, xi));
            }
        }
    }

    #[test]
    fn offsets_are_lexicographic() {
        let g = GridParams::unit(3, EpsSq::integer(5).unwrap()).unwrap();
        let ids = enumerate_eps_neighbors(&BoxId(vec![9, 9, 9]), &g);
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert!(ids.contains(&BoxId(vec![9, 9, 9])));
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("0.1"), Some(Ratio::new(1, 10)));
        assert_eq!(parse_ratio("3/8"), Some(Ratio::new(3, 8)));
        assert_eq!(parse_ratio("2"), Some(Ratio::from_integer(2)));
        assert_eq!(parse_ratio("x"), None);
    }

    #[test]
    fn relaxed_threshold() {
        let e = EpsSq::integer(100).unwrap();
        // (1.5·10)² = 225
        assert!(e.admits_relaxed(SqDistance(225), Ratio::new(1, 2)));
        assert!(!e.admits_relaxed(SqDistance(226), Ratio::new(1, 2)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dist_matches_naive(a in proptest::collection::vec(0u64..1 << 31, 1..5),
                                  seed in proptest::collection::vec(0u64..1 << 31, 5)) {
                let b: Vec<u64> = seed[..a.len()].to_vec();
                let d = dist_sq(&pt(&a), &pt(&b)).unwrap();
                prop_assert_eq!(d.0, naive_dist(&a, &b));
                prop_assert_eq!(d, dist_sq(&pt(&b), &pt(&a)).unwrap());
            }

            #[test]
            fn box_id_monotone_and_float_consistent(p in 0u64..1 << 20, q in 0u64..1 << 20,
                                                    eps in 1u128..10_000, d in 1usize..5) {
                let g = GridParams::unit(d, EpsSq::integer(eps).unwrap()).unwrap();
                let (lo, hi) = (p.min(q), p.max(q));
                prop_assert!(g.coord_box(lo) <= g.coord_box(hi));
                let w = (eps as f64).sqrt() / (d as f64).sqrt();
                let x = p as f64 / w;
                if (x - x.round()).abs() > 1e-6 {
                    prop_assert_eq!(g.coord_box(p), x.floor() as u64);
                }
            }

            #[test]
            fn close_points_land_in_neighbor_boxes(a in proptest::collection::vec(0u64..200, 3),
                                                   off in proptest::collection::vec(-6i64..7, 3),
                                                   eps in 1u128..60, d in 1usize..4) {
                let a = a[..d].to_vec();
                let b: Vec<u64> = a.iter().zip(&off).map(|(&x, &o)| (x as i64 + o).max(0) as u64).collect();
                let g = GridParams::unit(d, EpsSq::integer(eps).unwrap()).unwrap();
                let (pa, pb) = (pt(&a), pt(&b));
                if g.eps().admits(dist_sq(&pa, &pb).unwrap()) {
                    let (ba, bb) = (box_id(&pa, &g).unwrap(), box_id(&pb, &g).unwrap());
                    prop_assert!(are_eps_neighbors(&ba, &bb, &g).unwrap());
                }
            }
        }
    }
}
