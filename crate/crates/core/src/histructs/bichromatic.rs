//! Two-color radix tree over the fine grid of width `(ξ/2)·ε/√d`.
//!
//! A box is pure when it holds points of one color only. For a pure box of
//! color `x`, `E^{x̄}` counts the pure boxes of the other color among its
//! ε-neighbors; both counters are zero otherwise. A leaf is flagged when it
//! is mixed or some counter is positive, so the root flag is set exactly when
//! two differently colored points lie in ε-neighboring boxes: any cross pair
//! within ε raises it, and a raised flag certifies a cross pair within
//! `(1+ξ)·ε`.

use std::collections::BTreeSet;

use rand::Rng;

use super::hashtable::{Entry, HashTable};
use super::radix::RadixTree;
use super::serialize::{self, ByteWriter};
use super::{
    audit_tree, ensure, level_of, neighbor_lists, skiplist, step_bound, weighted_descent, AuditError, FailureCounts, GridIndex,
    HiError, OpStats, StructureConfig, Variant,
};
use crate::geometry::{BoxId, Color, Point};

const COLORS: [Color; 2] = [Color::A, Color::B];

#[derive(Clone, Debug)]
pub(crate) struct BiLeaf {
    id: BoxId,
    /// `ext[c]`: pure neighbors of color `c`.
    ext: [u64; 2],
    heads: [Vec<Option<usize>>; 2],
}

#[derive(Debug)]
pub struct BichromaticTree {
    cfg: StructureConfig,
    index: GridIndex,
    tree: RadixTree<BiLeaf>,
    tables: [HashTable; 2],
    failures: FailureCounts,
    last: OpStats,
}

fn pure_color(counts: [u64; 2]) -> Option<Color> {
    match counts {
        [a, 0] if a > 0 => Some(Color::A),
        [0, b] if b > 0 => Some(Color::B),
        _ => None,
    }
}

fn leaf_flag(counts: [u64; 2], ext: [u64; 2]) -> bool {
    (counts[0] > 0 && counts[1] > 0) || ext[0] > 0 || ext[1] > 0
}

impl BichromaticTree {
    /// `cfg.capacity` and `cfg.universe` apply to each color.
    pub fn new(cfg: StructureConfig) -> Result<Self, HiError> {
        let index = GridIndex::new(&cfg.grid, cfg.coord_bits)?;
        let tree = RadixTree::new(2 * cfg.capacity, index.codec().total_bits());
        let table = || HashTable::new(cfg.capacity, cfg.universe, cfg.bucket_cap());
        let tables = [table(), table()];
        Ok(Self { cfg, index, tree, tables, failures: FailureCounts::default(), last: OpStats::default() })
    }

    pub fn config(&self) -> &StructureConfig {
        &self.cfg
    }

    pub fn len(&self, color: Color) -> usize {
        self.tree.root_counts()[color.slot()] as usize
    }

    pub fn contains(&self, color: Color, i: usize) -> bool {
        self.tables[color.slot()].contains(i)
    }

    pub fn last_op(&self) -> OpStats {
        self.last
    }

    pub fn failures(&self) -> FailureCounts {
        self.failures
    }

    pub fn step_bound(&self) -> u64 {
        step_bound(&self.cfg, &self.index)
    }

    fn validate(&self, i: usize, p: &Point) -> Result<(), HiError> {
        if i >= self.cfg.universe {
            return Err(HiError::IndexOutOfRange { index: i, universe: self.cfg.universe });
        }
        self.index.check_point(p, self.cfg.coord_bits)
    }

    fn salt(color: Color) -> u64 {
        color.slot() as u64
    }

    /// Neighbor leaves that are pure of color `c`.
    fn pure_neighbors(&self, id: &BoxId, c: Color, checks: &mut u64) -> Vec<usize> {
        self.index
            .neighbor_leaves(&self.tree, id, checks)
            .into_iter()
            .filter(|&g| pure_color(self.tree.node(g).counts) == Some(c))
            .collect()
    }

    fn bump(&mut self, leaf: usize, c: Color, up: bool) {
        let l = self.tree.leaf_mut(leaf);
        let e = &mut l.ext[c.slot()];
        *e = if up { *e + 1 } else { *e - 1 };
        let ext = l.ext;
        let counts = self.tree.node(leaf).counts;
        self.tree.set_leaf_state(leaf, counts, leaf_flag(counts, ext));
    }

    fn set_ext(&mut self, leaf: usize, ext: [u64; 2]) {
        self.tree.leaf_mut(leaf).ext = ext;
        let counts = self.tree.node(leaf).counts;
        self.tree.set_leaf_state(leaf, counts, leaf_flag(counts, ext));
    }

    fn charge_skip(&mut self, steps: u64) {
        if steps > self.cfg.step_budget() {
            self.failures.skip_budget += 1;
        }
    }

    pub fn insert(&mut self, color: Color, i: usize, p: &Point) -> Result<(), HiError> {
        self.validate(i, p)?;
        let s = color.slot();
        if self.tables[s].contains(i) {
            return Err(HiError::DuplicateIndex(i));
        }
        if self.len(color) >= self.cfg.capacity {
            return Err(HiError::CapacityExceeded { capacity: self.cfg.capacity });
        }
        let p = p.with_index(i);
        let lmax = self.cfg.lmax();
        self.tree.reset_steps();
        let mut checks = 0;
        let level = level_of(self.cfg.seed, Self::salt(color), i, lmax);
        if !self.tables[s].insert(Entry { index: i, point: p.clone(), level, next: vec![None; lmax + 1] }) {
            self.failures.bucket_overflow += 1;
        }
        let id = self.index.box_of(&p);
        let key = self.index.key(&id);
        let leaf = match self.tree.find(key) {
            Some(l) => l,
            None => self.tree.insert_leaf(
                key,
                BiLeaf { id: id.clone(), ext: [0; 2], heads: [vec![None; lmax + 1], vec![None; lmax + 1]] },
            ),
        };
        let skip = skiplist::insert(&mut self.tree.leaf_mut(leaf).heads[s], &mut self.tables[s], i);
        self.charge_skip(skip);
        let before = self.tree.node(leaf).counts;
        let mut after = before;
        after[s] += 1;
        self.tree.set_leaf_state(leaf, after, self.tree.node(leaf).flag);
        let other = color.other();
        if before == [0, 0] {
            let partners = self.pure_neighbors(&id, other, &mut checks);
            for &g in &partners {
                self.bump(g, color, true);
            }
            let mut ext = [0; 2];
            ext[other.slot()] = partners.len() as u64;
            self.set_ext(leaf, ext);
        } else if pure_color(before) == Some(other) && before[s] == 0 {
            self.set_ext(leaf, [0; 2]);
            for g in self.pure_neighbors(&id, color, &mut checks) {
                self.bump(g, other, false);
            }
        }
        self.last = OpStats { tree_steps: self.tree.steps(), skip_steps: skip, neighbor_checks: checks };
        Ok(())
    }

    pub fn delete(&mut self, color: Color, i: usize, p: &Point) -> Result<(), HiError> {
        self.validate(i, p)?;
        let s = color.slot();
        match self.tables[s].get(i) {
            None => return Err(HiError::UnknownIndex(i)),
            Some(e) if e.point.coords() != p.coords() => return Err(HiError::PointMismatch(i)),
            Some(_) => {}
        }
        self.tree.reset_steps();
        let mut checks = 0;
        let id = self.index.box_of(p);
        let leaf = self.tree.find(self.index.key(&id)).ok_or(HiError::Inconsistent("stored point has no leaf"))?;
        let skip = skiplist::remove(&mut self.tree.leaf_mut(leaf).heads[s], &mut self.tables[s], i);
        self.charge_skip(skip);
        let before = self.tree.node(leaf).counts;
        let mut after = before;
        after[s] -= 1;
        let other = color.other();
        if after == [0, 0] {
            for g in self.pure_neighbors(&id, other, &mut checks) {
                self.bump(g, color, false);
            }
            let (_, up) = self.tree.remove_leaf(leaf);
            self.tree.refresh_from(up);
        } else {
            self.tree.set_leaf_state(leaf, after, self.tree.node(leaf).flag);
            if after[s] == 0 {
                let partners = self.pure_neighbors(&id, color, &mut checks);
                for &g in &partners {
                    self.bump(g, other, true);
                }
                let mut ext = [0; 2];
                ext[s] = partners.len() as u64;
                self.set_ext(leaf, ext);
            }
        }
        self.tables[s].remove(i);
        self.last = OpStats { tree_steps: self.tree.steps(), skip_steps: skip, neighbor_checks: checks };
        Ok(())
    }

    pub fn has_close_pair(&self) -> Option<bool> {
        (self.failures.total() == 0).then(|| self.tree.root_flag())
    }

    pub fn root_flag(&self) -> bool {
        self.tree.root_flag()
    }

    fn first(&self, leaf: usize, c: Color) -> Option<usize> {
        self.tree.leaf(leaf).heads[c.slot()][0]
    }

    /// `(index in A, index in B)` for a pair in ε-neighboring boxes.
    pub fn find_close_pair(&self) -> Result<Option<(usize, usize)>, HiError> {
        let Some(leaf) = self.tree.first_flagged_leaf() else { return Ok(None) };
        let n = self.tree.node(leaf);
        let (x, g_other) = match pure_color(n.counts) {
            None => (self.first(leaf, Color::A), (Color::B, self.first(leaf, Color::B))),
            Some(c) => {
                let mut checks = 0;
                let g = *self
                    .pure_neighbors(&self.tree.leaf(leaf).id, c.other(), &mut checks)
                    .first()
                    .ok_or(HiError::Inconsistent("flagged leaf without a partner"))?;
                let (mine, theirs) = (self.first(leaf, c), self.first(g, c.other()));
                if c == Color::A {
                    (mine, (Color::B, theirs))
                } else {
                    (theirs, (Color::B, mine))
                }
            }
        };
        match (x, g_other.1) {
            (Some(a), Some(b)) => Ok(Some((a, b))),
            _ => Err(HiError::Inconsistent("flagged leaf lost its elements")),
        }
    }

    /// Uniform index among the points of `color`.
    pub fn sample_uniform_index<R: Rng + ?Sized>(&self, color: Color, rng: &mut R) -> Result<usize, HiError> {
        let s = color.slot();
        weighted_descent(&self.tree, Some(s), rng, |l: &BiLeaf, k| {
            skiplist::elements(&l.heads[s], &self.tables[s])[k as usize]
        })
    }

    pub fn descent_probability(&self, color: Color, i: usize) -> Option<num_rational::Ratio<u64>> {
        let p = &self.tables[color.slot()].get(i)?.point;
        let leaf = self.tree.find(self.index.key(&self.index.box_of(p)))?;
        Some(super::descent_probability(&self.tree, Some(color.slot()), leaf))
    }

    pub fn points(&self, color: Color) -> Vec<Point> {
        self.tables[color.slot()].buckets().iter().flatten().map(|e| e.point.clone()).collect()
    }

    pub fn canonical_serialize(&self) -> Vec<u8> {
        let mut w = ByteWriter::default();
        serialize::header(&mut w, Variant::Bichromatic, &self.cfg, self.index.codec());
        serialize::tree(&mut w, &self.tree, |w, l| {
            for c in 0..2 {
                w.u64(l.ext[c]);
                for &h in &l.heads[c] {
                    w.link(h);
                }
            }
        });
        for t in &self.tables {
            serialize::table(&mut w, t);
        }
        w.finish()
    }

    /// Brute-force form of the root flag: some cross pair in ε-neighboring
    /// (or equal) boxes.
    pub fn box_level_pair_exists(&self) -> bool {
        let boxes = |c: Color| -> BTreeSet<BoxId> { self.points(c).iter().map(|p| self.index.box_of(p)).collect() };
        let (ba, bb) = (boxes(Color::A), boxes(Color::B));
        ba.iter().any(|g| {
            bb.iter().any(|h| g == h || crate::geometry::are_eps_neighbors(g, h, self.index.grid()).unwrap_or(false))
        })
    }

    pub fn audit(&self) -> Result<(), AuditError> {
        audit_tree(&self.tree, self.index.codec())?;
        let lmax = self.cfg.lmax();
        for color in COLORS {
            let t = &self.tables[color.slot()];
            for (b, bucket) in t.buckets().iter().enumerate() {
                ensure!(bucket.windows(2).all(|w| w[0].index < w[1].index), "bucket {b} unsorted");
                for e in bucket {
                    ensure!(t.bucket_of(e.index) == b, "index {} in bucket {b}", e.index);
                    ensure!(
                        e.level == level_of(self.cfg.seed, Self::salt(color), e.index, lmax),
                        "level of {} changed",
                        e.index
                    );
                }
            }
        }
        let mut seen = [BTreeSet::new(), BTreeSet::new()];
        let leaves = self.tree.leaves();
        let ids: Vec<&BoxId> = leaves.iter().map(|&g| &self.tree.leaf(g).id).collect();
        let near = neighbor_lists(&ids, &self.cfg.grid);
        for (k, &leaf) in leaves.iter().enumerate() {
            let n = self.tree.node(leaf);
            let l = self.tree.leaf(leaf);
            ensure!(self.index.key(&l.id) == n.key, "leaf key does not match its box");
            ensure!(n.counts != [0, 0], "empty leaf");
            for color in COLORS {
                let s = color.slot();
                let els = skiplist::elements(&l.heads[s], &self.tables[s]);
                ensure!(els.len() as u64 == n.counts[s], "leaf counter {:?}", n.counts);
                ensure!(els.windows(2).all(|w| w[0] < w[1]), "skip list out of order");
                for lv in 0..=lmax {
                    let want: Vec<usize> = els
                        .iter()
                        .copied()
                        .filter(|&j| self.tables[s].get(j).is_some_and(|e| e.level >= lv))
                        .collect();
                    ensure!(skiplist::level_elements(&l.heads[s], &self.tables[s], lv) == want, "level {lv} broken");
                }
                for &j in &els {
                    let e = self.tables[s].get(j);
                    ensure!(e.is_some(), "linked index {j} missing from the table");
                    ensure!(self.index.box_of(&e.unwrap().point) == l.id, "point {j} in the wrong box");
                    ensure!(seen[s].insert(j), "index {j} linked twice");
                }
            }
            let mut want = [0; 2];
            if let Some(c) = pure_color(n.counts) {
                want[c.other().slot()] =
                    near[k].iter().filter(|&&o| pure_color(self.tree.node(leaves[o]).counts) == Some(c.other())).count() as u64;
            }
            ensure!(l.ext == want, "external counters {:?} expected {:?}", l.ext, want);
            ensure!(n.flag == leaf_flag(n.counts, l.ext), "leaf flag inconsistent with counters");
        }
        for color in COLORS {
            ensure!(seen[color.slot()].len() == self.tables[color.slot()].len(), "table holds unlinked entries");
        }
        let cross = (0..leaves.len()).any(|k| {
            let c = self.tree.node(leaves[k]).counts;
            pure_color(c).is_none()
                || near[k].iter().any(|&o| {
                    let e = self.tree.node(leaves[o]).counts;
                    (c[0] > 0 && e[1] > 0) || (c[1] > 0 && e[0] > 0)
                })
        });
        ensure!(self.tree.root_flag() == cross, "root flag disagrees with the box-level predicate");
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use num_rational::Ratio;

    use super::*;
    use crate::geometry::{EpsSq, GridParams};

    fn tree() -> BichromaticTree {
        let grid = GridParams::for_xi(2, EpsSq::integer(16).unwrap(), Ratio::new(1, 2)).unwrap();
        BichromaticTree::new(StructureConfig::new(grid, 16, 16, 7, 11)).unwrap()
    }

    fn pt(i: usize, x: u64, y: u64) -> Point {
        Point::new(i, vec![x, y]).unwrap()
    }

    #[test]
    fn cross_pairs_only() {
        let mut t = tree();
        t.insert(Color::A, 0, &pt(0, 10, 10)).unwrap();
        t.insert(Color::A, 1, &pt(1, 11, 10)).unwrap();
        t.audit().unwrap();
        assert_eq!(t.has_close_pair(), Some(false));
        t.insert(Color::B, 0, &pt(0, 60, 60)).unwrap();
        assert_eq!(t.has_close_pair(), Some(false));
        t.insert(Color::B, 1, &pt(1, 12, 11)).unwrap();
        t.audit().unwrap();
        assert_eq!(t.has_close_pair(), Some(true));
        let (a, b) = t.find_close_pair().unwrap().unwrap();
        assert!(a <= 1 && b == 1);
        t.delete(Color::B, 1, &pt(1, 12, 11)).unwrap();
        t.audit().unwrap();
        assert_eq!(t.has_close_pair(), Some(false));
    }

    #[test]
    fn mixed_box_then_split() {
        let mut t = tree();
        t.insert(Color::A, 3, &pt(3, 30, 30)).unwrap();
        t.insert(Color::B, 3, &pt(3, 30, 30)).unwrap();
        t.insert(Color::B, 4, &pt(4, 32, 30)).unwrap();
        t.audit().unwrap();
        assert_eq!(t.find_close_pair().unwrap(), Some((3, 3)));
        t.delete(Color::B, 3, &pt(3, 30, 30)).unwrap();
        t.audit().unwrap();
        t.delete(Color::A, 3, &pt(3, 30, 30)).unwrap();
        t.audit().unwrap();
        assert_eq!(t.has_close_pair(), Some(false));
    }
}
