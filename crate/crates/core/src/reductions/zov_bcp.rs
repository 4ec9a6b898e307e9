use serde::{Deserialize, Serialize};

use super::{ReductionError, Side};

/// A point of the padded instance. The padding coordinate
/// `√(W − ‖base‖²)` sits on an axis private to its side and is kept only
/// through its square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddedBcpPoint {
    pub side: Side,
    pub base: Vec<i128>,
    pub pad_sq: u128,
}

/// Integer orthogonal vectors embedded as a bichromatic instance of
/// dimension `d² + 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZovBcp {
    pub w: u128,
    pub a: Vec<PaddedBcpPoint>,
    pub b: Vec<PaddedBcpPoint>,
}

fn outer(x: &[i64], sign: i128) -> Vec<i128> {
    let mut out = Vec::with_capacity(x.len() * x.len());
    for &xi in x {
        for &xj in x {
            out.push(sign * xi as i128 * xj as i128);
        }
    }
    out
}

fn norm_sq(v: &[i128]) -> u128 {
    v.iter().map(|&x| (x * x) as u128).sum()
}

/// Builds the padded instance with `W = (d²+1)·n^{4k}`; entries must satisfy
/// `|x_i| < n^k`.
pub fn zov_to_bcp(a: &[Vec<i64>], b: &[Vec<i64>], n: u64, k: u32) -> Result<ZovBcp, ReductionError> {
    let d = a.first().or(b.first()).map_or(0, Vec::len);
    for v in a.iter().chain(b) {
        if v.len() != d {
            return Err(ReductionError::DimensionMismatch(d, v.len()));
        }
    }
    let bound = (n as u128).checked_pow(k).ok_or(ReductionError::Overflow)?;
    let w = bound
        .checked_pow(4)
        .and_then(|x| x.checked_mul((d * d + 1) as u128))
        .ok_or(ReductionError::Overflow)?;
    for &x in a.iter().chain(b).flatten() {
        if x.unsigned_abs() as u128 >= bound {
            return Err(ReductionError::EntryTooLarge { value: x, bound });
        }
    }
    let pad = |side: Side, v: &[i64]| {
        let base = outer(v, if side == Side::A { 1 } else { -1 });
        let pad_sq = w - norm_sq(&base);
        PaddedBcpPoint { side, base, pad_sq }
    };
    Ok(ZovBcp {
        w,
        a: a.iter().map(|v| pad(Side::A, v)).collect(),
        b: b.iter().map(|v| pad(Side::B, v)).collect(),
    })
}

impl ZovBcp {
    /// Exact squared distance between `a[i]` and `b[j]`, summed coordinate by
    /// coordinate. The two padding axes are distinct, so each contributes its
    /// own square.
    pub fn sq_distance(&self, i: usize, j: usize) -> u128 {
        let (x, y) = (&self.a[i], &self.b[j]);
        let base: u128 = x.base.iter().zip(&y.base).map(|(&p, &q)| ((p - q) * (p - q)) as u128).sum();
        base + x.pad_sq + y.pad_sq
    }

    /// `2W`, the threshold realised exactly by orthogonal pairs.
    pub fn threshold(&self) -> u128 {
        2 * self.w
    }

    pub fn dim(&self) -> usize {
        self.a.first().or(self.b.first()).map_or(0, |p| p.base.len() + 2)
    }
}
