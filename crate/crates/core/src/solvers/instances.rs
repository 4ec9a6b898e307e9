//! Problem instances shared by solvers, reductions and the CLI.

use std::collections::HashSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Point};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("duplicate point index {0}")]
    DuplicateIndex(usize),
    #[error("instance is empty")]
    Empty,
    #[error("vector entry {0} is not 0 or 1")]
    NonBinary(u8),
    #[error("coordinate bits {0} outside 1..=32")]
    BadBits(u32),
}

fn validate_points(points: &[Point], m: u32, seen: &mut HashSet<usize>) -> Result<usize, InstanceError> {
    if !(1..=32).contains(&m) {
        return Err(InstanceError::BadBits(m));
    }
    let d = points.first().ok_or(InstanceError::Empty)?.dim();
    for p in points {
        if p.dim() != d {
            return Err(GeometryError::DimensionMismatch { left: d, right: p.dim() }.into());
        }
        p.check_bits(m)?;
        if !seen.insert(p.index()) {
            return Err(InstanceError::DuplicateIndex(p.index()));
        }
    }
    Ok(d)
}

/// Monochromatic closest-pair instance in `[0, 2^m)^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpInstance {
    points: Vec<Point>,
    d: usize,
    m: u32,
}

impl CpInstance {
    pub fn new(points: Vec<Point>, m: u32) -> Result<Self, InstanceError> {
        let d = validate_points(&points, m, &mut HashSet::new())?;
        Ok(Self { points, d, m })
    }

    /// Points indexed by position.
    pub fn from_coords(coords: Vec<Vec<u64>>, m: u32) -> Result<Self, InstanceError> {
        let points = coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| Point::new(i, c))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(points, m)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Point with the given input index.
    pub fn by_index(&self, index: usize) -> Option<&Point> {
        self.points.iter().find(|p| p.index() == index)
    }

    /// Re-validates after deserialization.
    pub fn validated(self) -> Result<Self, InstanceError> {
        Self::new(self.points, self.m)
    }
}

/// Bichromatic closest-pair instance with approximation slack `ξ`. Both
/// color classes are nonempty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BcpInstance {
    a: Vec<Point>,
    b: Vec<Point>,
    d: usize,
    m: u32,
    xi: Ratio<u64>,
}

impl BcpInstance {
    /// Indices are per color class and may repeat across classes.
    pub fn new(a: Vec<Point>, b: Vec<Point>, m: u32, xi: Ratio<u64>) -> Result<Self, InstanceError> {
        let d = validate_points(&a, m, &mut HashSet::new())?;
        let db = validate_points(&b, m, &mut HashSet::new())?;
        if d != db {
            return Err(GeometryError::DimensionMismatch { left: d, right: db }.into());
        }
        Ok(Self { a, b, d, m, xi })
    }

    pub fn from_coords(
        a: Vec<Vec<u64>>,
        b: Vec<Vec<u64>>,
        m: u32,
        xi: Ratio<u64>,
    ) -> Result<Self, InstanceError> {
        let mk = |v: Vec<Vec<u64>>| {
            v.into_iter()
                .enumerate()
                .map(|(i, c)| Point::new(i, c))
                .collect::<Result<Vec<_>, _>>()
        };
        Self::new(mk(a)?, mk(b)?, m, xi)
    }

    pub fn a(&self) -> &[Point] {
        &self.a
    }

    pub fn b(&self) -> &[Point] {
        &self.b
    }

    /// Size of the larger color class.
    pub fn n(&self) -> usize {
        self.a.len().max(self.b.len())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn xi(&self) -> Ratio<u64> {
        self.xi
    }

    pub fn with_xi(&self, xi: Ratio<u64>) -> Self {
        Self { xi, ..self.clone() }
    }

    pub fn validated(self) -> Result<Self, InstanceError> {
        Self::new(self.a, self.b, self.m, self.xi)
    }
}

/// Orthogonal-vectors instance over `{0,1}^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvInstance {
    a: Vec<Vec<u8>>,
    b: Vec<Vec<u8>>,
    d: usize,
}

impl OvInstance {
    pub fn new(a: Vec<Vec<u8>>, b: Vec<Vec<u8>>) -> Result<Self, InstanceError> {
        let d = a.first().or(b.first()).ok_or(InstanceError::Empty)?.len();
        if d == 0 {
            return Err(GeometryError::EmptyPoint.into());
        }
        for v in a.iter().chain(&b) {
            if v.len() != d {
                return Err(GeometryError::DimensionMismatch { left: d, right: v.len() }.into());
            }
            if let Some(&x) = v.iter().find(|&&x| x > 1) {
                return Err(InstanceError::NonBinary(x));
            }
        }
        Ok(Self { a, b, d })
    }

    pub fn a(&self) -> &[Vec<u8>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<u8>] {
        &self.b
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn validated(self) -> Result<Self, InstanceError> {
        Self::new(self.a, self.b)
    }
}
