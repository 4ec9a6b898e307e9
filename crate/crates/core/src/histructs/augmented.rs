//! Radix tree with external counters, per-box skip lists and a fixed-hash
//! point table; tracks any number of close pairs.
//!
//! For a box `h` holding one point, `E(h)` counts the other single-point
//! boxes whose point is within ε of it; boxes with two or more points keep
//! `E = 0`. A leaf is flagged when it holds two points or `E ≥ 1`.

use std::collections::BTreeSet;

use rand::Rng;

use super::hashtable::{Entry, HashTable};
use super::radix::RadixTree;
use super::serialize::{self, ByteWriter};
use super::{
    audit_tree, ensure, level_of, neighbor_lists, skiplist, step_bound, weighted_descent, AuditError, FailureCounts, GridIndex,
    HiError, OpStats, StructureConfig, Variant,
};
use crate::geometry::{dist_sq, BoxId, Point};

#[derive(Clone, Debug)]
pub(crate) struct AugLeaf {
    id: BoxId,
    ext: u64,
    head: Vec<Option<usize>>,
}

#[derive(Debug)]
pub struct AugmentedTree {
    cfg: StructureConfig,
    index: GridIndex,
    tree: RadixTree<AugLeaf>,
    table: HashTable,
    failures: FailureCounts,
    last: OpStats,
}

impl AugmentedTree {
    pub fn new(cfg: StructureConfig) -> Result<Self, HiError> {
        let index = GridIndex::new(&cfg.grid, cfg.coord_bits)?;
        let tree = RadixTree::new(cfg.capacity, index.codec().total_bits());
        let table = HashTable::new(cfg.capacity, cfg.universe, cfg.bucket_cap());
        Ok(Self { cfg, index, tree, table, failures: FailureCounts::default(), last: OpStats::default() })
    }

    pub fn config(&self) -> &StructureConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.tree.root_counts()[0] as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.table.contains(i)
    }

    pub fn point(&self, i: usize) -> Option<&Point> {
        self.table.get(i).map(|e| &e.point)
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

    fn close(&self, p: &Point, q: &Point) -> bool {
        self.cfg.grid.eps().admits(dist_sq(p, q).expect("same dimension"))
    }

    fn validate(&self, i: usize, p: &Point) -> Result<(), HiError> {
        if i >= self.cfg.universe {
            return Err(HiError::IndexOutOfRange { index: i, universe: self.cfg.universe });
        }
        self.index.check_point(p, self.cfg.coord_bits)
    }

    fn elements(&self, leaf: usize) -> Vec<usize> {
        skiplist::elements(&self.tree.leaf(leaf).head, &self.table)
    }

    fn single_point(&self, leaf: usize) -> &Point {
        let i = self.tree.leaf(leaf).head[0].expect("nonempty leaf");
        &self.table.get(i).expect("stored").point
    }

    /// Single-point neighbor leaves of `id` whose point is within ε of `p`.
    fn singleton_partners(&self, id: &BoxId, p: &Point, checks: &mut u64) -> Vec<usize> {
        self.index
            .neighbor_leaves(&self.tree, id, checks)
            .into_iter()
            .filter(|&g| {
                *checks += 1;
                self.tree.node(g).counts[0] == 1 && self.close(p, self.single_point(g))
            })
            .collect()
    }

    fn bump(&mut self, leaf: usize, up: bool) {
        let l = self.tree.leaf_mut(leaf);
        l.ext = if up { l.ext + 1 } else { l.ext - 1 };
        let ext = l.ext;
        let counts = self.tree.node(leaf).counts;
        self.tree.set_leaf_state(leaf, counts, counts[0] >= 2 || ext >= 1);
    }

    fn charge_skip(&mut self, steps: u64) {
        if steps > self.cfg.step_budget() {
            self.failures.skip_budget += 1;
        }
    }

    pub fn insert(&mut self, i: usize, p: &Point) -> Result<(), HiError> {
        self.validate(i, p)?;
        if self.table.contains(i) {
            return Err(HiError::DuplicateIndex(i));
        }
        if self.len() >= self.cfg.capacity {
            return Err(HiError::CapacityExceeded { capacity: self.cfg.capacity });
        }
        let p = p.with_index(i);
        let lmax = self.cfg.lmax();
        self.tree.reset_steps();
        let mut checks = 0;
        let level = level_of(self.cfg.seed, 0, i, lmax);
        if !self.table.insert(Entry { index: i, point: p.clone(), level, next: vec![None; lmax + 1] }) {
            self.failures.bucket_overflow += 1;
        }
        let id = self.index.box_of(&p);
        let key = self.index.key(&id);
        let leaf = match self.tree.find(key) {
            Some(l) => l,
            None => self.tree.insert_leaf(key, AugLeaf { id: id.clone(), ext: 0, head: vec![None; lmax + 1] }),
        };
        let skip = skiplist::insert(&mut self.tree.leaf_mut(leaf).head, &mut self.table, i);
        self.charge_skip(skip);
        let c = self.tree.node(leaf).counts[0] + 1;
        match c {
            1 => {
                let partners = self.singleton_partners(&id, &p, &mut checks);
                for &g in &partners {
                    self.bump(g, true);
                }
                let ext = partners.len() as u64;
                self.tree.leaf_mut(leaf).ext = ext;
                self.tree.set_leaf_state(leaf, [1, 0], ext >= 1);
            }
            2 => {
                let other = self.elements(leaf).into_iter().find(|&j| j != i).expect("two elements");
                let q = self.table.get(other).expect("stored").point.clone();
                self.tree.leaf_mut(leaf).ext = 0;
                self.tree.set_leaf_state(leaf, [2, 0], true);
                for g in self.singleton_partners(&id, &q, &mut checks) {
                    self.bump(g, false);
                }
            }
            _ => self.tree.set_leaf_state(leaf, [c, 0], true),
        }
        self.last = OpStats { tree_steps: self.tree.steps(), skip_steps: skip, neighbor_checks: checks };
        Ok(())
    }

    pub fn delete(&mut self, i: usize, p: &Point) -> Result<(), HiError> {
        self.validate(i, p)?;
        match self.table.get(i) {
            None => return Err(HiError::UnknownIndex(i)),
            Some(e) if e.point.coords() != p.coords() => return Err(HiError::PointMismatch(i)),
            Some(_) => {}
        }
        let p = p.with_index(i);
        self.tree.reset_steps();
        let mut checks = 0;
        let id = self.index.box_of(&p);
        let leaf = self.tree.find(self.index.key(&id)).ok_or(HiError::Inconsistent("stored point has no leaf"))?;
        let skip = skiplist::remove(&mut self.tree.leaf_mut(leaf).head, &mut self.table, i);
        self.charge_skip(skip);
        let c = self.tree.node(leaf).counts[0] - 1;
        match c {
            0 => {
                for g in self.singleton_partners(&id, &p, &mut checks) {
                    self.bump(g, false);
                }
                let (_, up) = self.tree.remove_leaf(leaf);
                self.tree.refresh_from(up);
            }
            1 => {
                self.tree.set_leaf_state(leaf, [1, 0], false);
                let q = self.single_point(leaf).clone();
                let partners = self.singleton_partners(&id, &q, &mut checks);
                for &g in &partners {
                    self.bump(g, true);
                }
                let ext = partners.len() as u64;
                self.tree.leaf_mut(leaf).ext = ext;
                self.tree.set_leaf_state(leaf, [1, 0], ext >= 1);
            }
            _ => self.tree.set_leaf_state(leaf, [c, 0], true),
        }
        self.table.remove(i);
        self.last = OpStats { tree_steps: self.tree.steps(), skip_steps: skip, neighbor_checks: checks };
        Ok(())
    }

    /// Root flag, or `None` once a bucket overflow or skip-list overrun has
    /// been recorded.
    pub fn has_close_pair(&self) -> Option<bool> {
        (self.failures.total() == 0).then(|| self.tree.root_flag())
    }

    /// Root flag regardless of recorded failures.
    pub fn root_flag(&self) -> bool {
        self.tree.root_flag()
    }

    pub fn find_close_pair(&self) -> Result<Option<(usize, usize)>, HiError> {
        let Some(leaf) = self.tree.first_flagged_leaf() else { return Ok(None) };
        let els = self.elements(leaf);
        if els.len() >= 2 {
            return Ok(Some((els[0], els[1])));
        }
        let p = self.single_point(leaf);
        let mut checks = 0;
        let g = *self
            .singleton_partners(&self.tree.leaf(leaf).id, p, &mut checks)
            .first()
            .ok_or(HiError::Inconsistent("flagged leaf without a partner"))?;
        let j = self.single_point(g).index();
        Ok(Some((p.index().min(j), p.index().max(j))))
    }

    pub fn sample_uniform_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, HiError> {
        weighted_descent(&self.tree, Some(0), rng, |l: &AugLeaf, k| {
            skiplist::elements(&l.head, &self.table)[k as usize]
        })
    }

    /// Exact probability that [`Self::sample_uniform_index`] returns `i`.
    pub fn descent_probability(&self, i: usize) -> Option<num_rational::Ratio<u64>> {
        let p = &self.table.get(i)?.point;
        let leaf = self.tree.find(self.index.key(&self.index.box_of(p)))?;
        Some(super::descent_probability(&self.tree, Some(0), leaf))
    }

    pub fn indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.table.indices().collect();
        v.sort_unstable();
        v
    }

    pub fn points(&self) -> Vec<Point> {
        self.table.buckets().iter().flatten().map(|e| e.point.clone()).collect()
    }

    /// `(box, stored indices, external counter)` for every leaf.
    pub fn box_counters(&self) -> Vec<(BoxId, Vec<usize>, u64)> {
        self.tree.leaves().into_iter().map(|g| (self.tree.leaf(g).id.clone(), self.elements(g), self.tree.leaf(g).ext)).collect()
    }

    pub fn canonical_serialize(&self) -> Vec<u8> {
        let mut w = ByteWriter::default();
        serialize::header(&mut w, Variant::Augmented, &self.cfg, self.index.codec());
        serialize::tree(&mut w, &self.tree, |w, l| {
            w.u64(l.ext);
            for &h in &l.head {
                w.link(h);
            }
        });
        serialize::table(&mut w, &self.table);
        w.finish()
    }

    pub fn audit(&self) -> Result<(), AuditError> {
        audit_tree(&self.tree, self.index.codec())?;
        let lmax = self.cfg.lmax();
        for (b, bucket) in self.table.buckets().iter().enumerate() {
            ensure!(bucket.windows(2).all(|w| w[0].index < w[1].index), "bucket {b} unsorted");
            for e in bucket {
                ensure!(self.table.bucket_of(e.index) == b, "index {} in bucket {b}", e.index);
                ensure!(e.level == level_of(self.cfg.seed, 0, e.index, lmax), "level of {} changed", e.index);
                ensure!(e.next.len() == lmax + 1, "pointer array of {} has wrong length", e.index);
            }
        }
        ensure!(
            self.table.overfull_buckets() == 0 || self.failures.bucket_overflow > 0,
            "overfull bucket without a recorded failure"
        );
        let mut seen = BTreeSet::new();
        let leaves = self.tree.leaves();
        let ids: Vec<&BoxId> = leaves.iter().map(|&g| &self.tree.leaf(g).id).collect();
        let near = neighbor_lists(&ids, &self.cfg.grid);
        for (k, &leaf) in leaves.iter().enumerate() {
            let n = self.tree.node(leaf);
            let l = self.tree.leaf(leaf);
            ensure!(self.index.key(&l.id) == n.key, "leaf key does not match its box");
            let els = self.elements(leaf);
            ensure!(els.len() as u64 == n.counts[0] && n.counts[1] == 0, "leaf counter {:?}", n.counts);
            ensure!(!els.is_empty(), "empty leaf");
            ensure!(els.windows(2).all(|w| w[0] < w[1]), "skip list out of order");
            for lv in 0..=lmax {
                let want: Vec<usize> =
                    els.iter().copied().filter(|&j| self.table.get(j).is_some_and(|e| e.level >= lv)).collect();
                ensure!(skiplist::level_elements(&l.head, &self.table, lv) == want, "level {lv} list is not a sublist");
            }
            for &j in &els {
                let e = self.table.get(j);
                ensure!(e.is_some(), "linked index {j} missing from the table");
                ensure!(self.index.box_of(&e.unwrap().point) == l.id, "point {j} in the wrong box");
                ensure!(seen.insert(j), "index {j} linked twice");
            }
            let want_ext = if els.len() == 1 {
                let p = self.single_point(leaf);
                near[k]
                    .iter()
                    .filter(|&&o| self.tree.node(leaves[o]).counts[0] == 1 && self.close(p, self.single_point(leaves[o])))
                    .count() as u64
            } else {
                0
            };
            ensure!(l.ext == want_ext, "external counter {} expected {}", l.ext, want_ext);
            if l.ext > 0 {
                ensure!(els.len() == 1, "counter set on a box with {} points", els.len());
            }
            ensure!(n.flag == (els.len() >= 2 || l.ext >= 1), "leaf flag inconsistent with counters");
        }
        ensure!(seen.len() == self.table.len(), "table holds unlinked entries");
        let brute = crate::oracles::exists_close_pair(&self.points(), self.cfg.grid.eps());
        ensure!(self.tree.root_flag() == brute, "root flag disagrees with brute force");
        Ok(())
    }
}
