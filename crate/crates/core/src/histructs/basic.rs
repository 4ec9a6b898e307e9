//! Radix tree for sets with at most one close pair.

use std::collections::BTreeSet;

use rand::Rng;

use super::radix::RadixTree;
use super::serialize::{self, ByteWriter};
use super::{
    audit_tree, ensure, neighbor_lists, step_bound, weighted_descent, AuditError, GridIndex, HiError, OpStats, StructureConfig,
    Variant,
};
use crate::geometry::{dist_sq, BoxId, Point};

#[derive(Clone, Debug)]
pub(crate) struct BasicLeaf {
    id: BoxId,
    /// At most two, by ascending index.
    points: Vec<Point>,
}

#[derive(Debug)]
pub struct BasicTree {
    cfg: StructureConfig,
    index: GridIndex,
    tree: RadixTree<BasicLeaf>,
    members: BTreeSet<usize>,
    last: OpStats,
}

impl BasicTree {
    pub fn new(cfg: StructureConfig) -> Result<Self, HiError> {
        let index = GridIndex::new(&cfg.grid, cfg.coord_bits)?;
        let tree = RadixTree::new(cfg.capacity, index.codec().total_bits());
        Ok(Self { cfg, index, tree, members: BTreeSet::new(), last: OpStats::default() })
    }

    pub fn config(&self) -> &StructureConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn last_op(&self) -> OpStats {
        self.last
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

    /// Neighbor leaves holding a point within ε of `p`.
    fn close_neighbors(&self, id: &BoxId, p: &Point, checks: &mut u64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for leaf in self.index.neighbor_leaves(&self.tree, id, checks) {
            for q in &self.tree.leaf(leaf).points {
                *checks += 1;
                if self.close(p, q) {
                    out.push((leaf, q.index()));
                }
            }
        }
        out
    }

    /// Fails with [`HiError::PromiseViolation`], leaving the set unchanged,
    /// when the new point would share a box with two others or raise the
    /// number of close pairs above one.
    pub fn insert(&mut self, i: usize, p: &Point) -> Result<(), HiError> {
        self.validate(i, p)?;
        if self.members.contains(&i) {
            return Err(HiError::DuplicateIndex(i));
        }
        if self.members.len() >= self.cfg.capacity {
            return Err(HiError::CapacityExceeded { capacity: self.cfg.capacity });
        }
        let p = p.with_index(i);
        self.tree.reset_steps();
        let mut checks = 0;
        let id = self.index.box_of(&p);
        let key = self.index.key(&id);
        let own = self.tree.find(key);
        let shared = match own {
            Some(leaf) if self.tree.leaf(leaf).points.len() >= 2 => {
                return Err(HiError::PromiseViolation("third point in one box"))
            }
            Some(_) => 1,
            None => 0,
        };
        let partners = self.close_neighbors(&id, &p, &mut checks);
        let created = shared + partners.len();
        if created >= 2 {
            return Err(HiError::PromiseViolation("point closes two pairs"));
        }
        if created == 1 && self.tree.root_flag() {
            return Err(HiError::PromiseViolation("second close pair"));
        }
        match own {
            Some(leaf) => {
                let pts = &mut self.tree.leaf_mut(leaf).points;
                let pos = pts.partition_point(|q| q.index() < i);
                pts.insert(pos, p);
                self.tree.set_leaf_state(leaf, [2, 0], true);
            }
            None => {
                let leaf = self.tree.insert_leaf(key, BasicLeaf { id, points: vec![p] });
                self.tree.set_leaf_state(leaf, [1, 0], !partners.is_empty());
                for &(g, _) in &partners {
                    let counts = self.tree.node(g).counts;
                    self.tree.set_leaf_state(g, counts, true);
                }
            }
        }
        self.members.insert(i);
        self.last = OpStats { tree_steps: self.tree.steps(), skip_steps: 0, neighbor_checks: checks };
        Ok(())
    }

    pub fn delete(&mut self, i: usize, p: &Point) -> Result<(), HiError> {
        self.validate(i, p)?;
        if !self.members.contains(&i) {
            return Err(HiError::UnknownIndex(i));
        }
        self.tree.reset_steps();
        let mut checks = 0;
        let id = self.index.box_of(p);
        let leaf = self.tree.find(self.index.key(&id)).ok_or(HiError::PointMismatch(i))?;
        let pos = self
            .tree
            .leaf(leaf)
            .points
            .iter()
            .position(|q| q.index() == i && q.coords() == p.coords())
            .ok_or(HiError::PointMismatch(i))?;
        if self.tree.leaf(leaf).points.len() == 2 {
            self.tree.leaf_mut(leaf).points.remove(pos);
            self.tree.set_leaf_state(leaf, [1, 0], false);
        } else {
            for (g, _) in self.close_neighbors(&id, p, &mut checks) {
                let counts = self.tree.node(g).counts;
                self.tree.set_leaf_state(g, counts, false);
            }
            let (_, up) = self.tree.remove_leaf(leaf);
            self.tree.refresh_from(up);
        }
        self.members.remove(&i);
        self.last = OpStats { tree_steps: self.tree.steps(), skip_steps: 0, neighbor_checks: checks };
        Ok(())
    }

    pub fn has_close_pair(&self) -> bool {
        self.tree.root_flag()
    }

    pub fn find_close_pair(&self) -> Result<Option<(usize, usize)>, HiError> {
        let Some(leaf) = self.tree.first_flagged_leaf() else { return Ok(None) };
        let l = self.tree.leaf(leaf);
        if l.points.len() == 2 {
            return Ok(Some((l.points[0].index(), l.points[1].index())));
        }
        let p = &l.points[0];
        let mut checks = 0;
        let (_, j) = *self
            .close_neighbors(&l.id, p, &mut checks)
            .first()
            .ok_or(HiError::Inconsistent("flagged leaf without a partner"))?;
        Ok(Some((p.index().min(j), p.index().max(j))))
    }

    pub fn sample_uniform_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, HiError> {
        weighted_descent(&self.tree, Some(0), rng, |l: &BasicLeaf, k| l.points[k as usize].index())
    }

    /// Exact probability that [`Self::sample_uniform_index`] returns `i`.
    pub fn descent_probability(&self, i: usize) -> Option<num_rational::Ratio<u64>> {
        self.tree
            .leaves()
            .into_iter()
            .find(|&l| self.tree.leaf(l).points.iter().any(|q| q.index() == i))
            .map(|l| super::descent_probability(&self.tree, Some(0), l))
    }

    pub fn points(&self) -> Vec<Point> {
        self.tree.leaves().into_iter().flat_map(|l| self.tree.leaf(l).points.clone()).collect()
    }

    pub fn canonical_serialize(&self) -> Vec<u8> {
        let mut w = ByteWriter::default();
        serialize::header(&mut w, Variant::Basic, &self.cfg, self.index.codec());
        serialize::tree(&mut w, &self.tree, |w, l| {
            w.u8(l.points.len() as u8);
            for p in &l.points {
                w.point(p);
            }
        });
        w.finish()
    }

    pub fn audit(&self) -> Result<(), AuditError> {
        audit_tree(&self.tree, self.index.codec())?;
        let mut seen = BTreeSet::new();
        let leaves = self.tree.leaves();
        let ids: Vec<&BoxId> = leaves.iter().map(|&g| &self.tree.leaf(g).id).collect();
        let near = neighbor_lists(&ids, &self.cfg.grid);
        for (k, &leaf) in leaves.iter().enumerate() {
            let n = self.tree.node(leaf);
            let l = self.tree.leaf(leaf);
            ensure!(self.index.key(&l.id) == n.key, "leaf key does not match its box");
            ensure!((1..=2).contains(&l.points.len()), "leaf holds {} points", l.points.len());
            ensure!(n.counts == [l.points.len() as u64, 0], "leaf counter {:?}", n.counts);
            ensure!(l.points.windows(2).all(|w| w[0].index() < w[1].index()), "leaf points unsorted");
            for p in &l.points {
                ensure!(self.index.box_of(p) == l.id, "point {} in the wrong box", p.index());
                seen.insert(p.index());
            }
            let want = l.points.len() == 2
                || near[k].iter().any(|&o| self.tree.leaf(leaves[o]).points.iter().any(|q| self.close(&l.points[0], q)));
            ensure!(n.flag == want, "leaf flag {} expected {}", n.flag, want);
        }
        ensure!(seen == self.members, "membership set differs from leaf contents");
        let brute = crate::oracles::exists_close_pair(&self.points(), self.cfg.grid.eps());
        ensure!(self.tree.root_flag() == brute, "root flag disagrees with brute force");
        Ok(())
    }
}
