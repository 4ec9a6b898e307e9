//! Exact nearest-neighbor k-d tree over integer points.

use crate::geometry::{dist_sq_coords, Point, SqDistance};

/// Median-split tree stored implicitly in a permuted point array.
#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<Point>,
    dim: usize,
}

impl KdTree {
    pub fn build(points: &[Point]) -> Self {
        let dim = points.first().map_or(1, Point::dim);
        let mut points = points.to_vec();
        Self::arrange(&mut points, 0, dim);
        Self { points, dim }
    }

    fn arrange(pts: &mut [Point], depth: usize, dim: usize) {
        if pts.len() <= 1 {
            return;
        }
        let axis = depth % dim;
        let mid = pts.len() / 2;
        pts.select_nth_unstable_by_key(mid, |p| (p.coords()[axis], p.index()));
        let (left, right) = pts.split_at_mut(mid);
        Self::arrange(left, depth + 1, dim);
        Self::arrange(&mut right[1..], depth + 1, dim);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest stored point to `q`, ties to the smaller index, and the
    /// number of nodes visited.
    pub fn nearest(&self, q: &[u64]) -> Option<(usize, SqDistance, u64)> {
        let mut best: Option<(SqDistance, usize)> = None;
        let mut visited = 0;
        self.descend(&self.points, 0, q, &mut best, &mut visited);
        best.map(|(d, i)| (i, d, visited))
    }

    fn descend(&self, pts: &[Point], depth: usize, q: &[u64], best: &mut Option<(SqDistance, usize)>, visited: &mut u64) {
        if pts.is_empty() {
            return;
        }
        *visited += 1;
        let mid = pts.len() / 2;
        let p = &pts[mid];
        let cand = (dist_sq_coords(p.coords(), q), p.index());
        if best.is_none_or(|b| cand < b) {
            *best = Some(cand);
        }
        let axis = depth % self.dim;
        let diff = q[axis] as i128 - p.coords()[axis] as i128;
        let (near, far) = if diff < 0 { (&pts[..mid], &pts[mid + 1..]) } else { (&pts[mid + 1..], &pts[..mid]) };
        self.descend(near, depth + 1, q, best, visited);
        let plane = SqDistance((diff * diff) as u128);
        if best.is_none_or(|b| plane <= b.0) {
            self.descend(far, depth + 1, q, best, visited);
        }
    }
}
