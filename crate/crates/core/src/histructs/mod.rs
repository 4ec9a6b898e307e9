//! History-independent point-set structures: a radix tree over box ids whose
//! root flag records whether the set holds a close pair.
//!
//! Three variants share the tree, the grid index and the byte format:
//!
//! * [`BasicTree`] stores up to two points per leaf and supports sets with at
//!   most one close pair.
//! * [`AugmentedTree`] keeps the points in a fixed-hash table, threads them
//!   through per-box skip lists and maintains external counters so any number
//!   of close pairs is tracked.
//! * [`BichromaticTree`] is the two-color version over the finer grid used for
//!   approximate bichromatic search.
//!
//! Memory layout is not part of the state: [`HiStructure::canonical_serialize`]
//! walks the tree in key order and never emits cell addresses, so two
//! structures holding the same set under the same seed serialize to the same
//! bytes.

mod augmented;
mod basic;
mod bichromatic;
mod hashtable;
mod radix;
mod serialize;
mod skiplist;

use rand::Rng;
use thiserror::Error;

pub use augmented::AugmentedTree;
pub use basic::BasicTree;
pub use bichromatic::BichromaticTree;
pub use radix::CellBitmap;
pub use serialize::FORMAT_VERSION;
pub use skiplist::{level_of, splitmix64};

use crate::geometry::{
    are_eps_neighbors, box_id, fine_neighbor_bound, offset_box, unit_neighbor_bound, BoxId, Color, GeometryError,
    GridParams, Point,
};
use radix::{KeyCodec, RadixTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HiError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("box keys need {bits} bits, more than 128")]
    KeyTooWide { bits: usize },
    #[error("index {index} outside universe of size {universe}")]
    IndexOutOfRange { index: usize, universe: usize },
    #[error("index {0} is already stored")]
    DuplicateIndex(usize),
    #[error("index {0} is not stored")]
    UnknownIndex(usize),
    #[error("index {0} is stored with different coordinates")]
    PointMismatch(usize),
    #[error("structure is full ({capacity} points)")]
    CapacityExceeded { capacity: usize },
    #[error("unique-solution promise violated: {0}")]
    PromiseViolation(&'static str),
    #[error("structure is empty")]
    Empty,
    #[error("monochromatic structure takes only color A")]
    ColorUnsupported,
    #[error("internal inconsistency: {0}")]
    Inconsistent(&'static str),
}

/// Failed audit with a description of the first violated invariant.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("audit failed: {0}")]
pub struct AuditError(pub String);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err($crate::histructs::AuditError(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Basic,
    Augmented,
    Bichromatic,
}

impl Variant {
    pub fn tag(self) -> u8 {
        match self {
            Variant::Basic => 0,
            Variant::Augmented => 1,
            Variant::Bichromatic => 2,
        }
    }
}

/// Parameters fixing the identity of a structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConfig {
    pub grid: GridParams,
    /// Indices range over `[0, universe)` (per color for the bichromatic
    /// variant).
    pub universe: usize,
    /// Maximum number of stored points (per color).
    pub capacity: usize,
    /// Coordinates lie in `[0, 2^coord_bits)`.
    pub coord_bits: u32,
    pub seed: u64,
}

impl StructureConfig {
    pub fn new(grid: GridParams, universe: usize, capacity: usize, coord_bits: u32, seed: u64) -> Self {
        Self { grid, universe, capacity, coord_bits, seed }
    }

    /// `⌈log2 n⌉`, at least 1.
    pub fn log_n(&self) -> usize {
        ceil_log2(self.universe).max(1)
    }

    pub fn lmax(&self) -> usize {
        self.log_n()
    }

    pub fn bucket_cap(&self) -> usize {
        self.log_n()
    }

    /// Skip-list traversal budget per operation.
    pub fn step_budget(&self) -> u64 {
        SKIP_BUDGET_FACTOR * self.log_n() as u64
    }
}

pub const SKIP_BUDGET_FACTOR: u64 = 8;
/// Constant in the per-operation node-visit bound
/// `STEP_CONST·(⌈log n⌉ + d·N)`, with `N` the neighbor-count bound.
pub const STEP_CONST: u64 = 64;

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Counts of the two failure events of the augmented variants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FailureCounts {
    pub bucket_overflow: u64,
    pub skip_budget: u64,
}

impl FailureCounts {
    pub fn total(&self) -> u64 {
        self.bucket_overflow + self.skip_budget
    }
}

/// Work done by the last mutation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpStats {
    pub tree_steps: u64,
    pub skip_steps: u64,
    pub neighbor_checks: u64,
}

impl OpStats {
    pub fn total(&self) -> u64 {
        self.tree_steps + self.skip_steps + self.neighbor_checks
    }
}

/// Box lookup and ε-neighbor enumeration against a radix tree.
#[derive(Clone, Debug)]
pub(crate) struct GridIndex {
    grid: GridParams,
    codec: KeyCodec,
    radius: u64,
    offsets: Option<Vec<Vec<i64>>>,
    bound: u128,
}

const MAX_CACHED_OFFSETS: u128 = 20_000;

impl GridIndex {
    pub fn new(grid: &GridParams, coord_bits: u32) -> Result<Self, HiError> {
        let codec = KeyCodec::new(grid, coord_bits)?;
        let radius = grid.neighbor_radius();
        let cube = (2 * radius as u128 + 1).checked_pow(grid.dim() as u32).unwrap_or(u128::MAX);
        let offsets = (cube <= MAX_CACHED_OFFSETS).then(|| grid.neighbor_offsets());
        let (sn, sd) = grid.scale();
        let bound = if sn == sd {
            unit_neighbor_bound(grid.dim())
        } else {
            fine_neighbor_bound(grid.dim(), num_rational::Ratio::new(2 * sn, sd))
        };
        Ok(Self { grid: grid.clone(), codec, radius, offsets, bound })
    }

    pub fn grid(&self) -> &GridParams {
        &self.grid
    }

    pub fn codec(&self) -> &KeyCodec {
        &self.codec
    }

    pub fn neighbor_bound(&self) -> u128 {
        self.bound
    }

    pub fn check_point(&self, p: &Point, coord_bits: u32) -> Result<(), HiError> {
        if p.dim() != self.grid.dim() {
            return Err(GeometryError::DimensionMismatch { left: p.dim(), right: self.grid.dim() }.into());
        }
        p.check_bits(coord_bits)?;
        Ok(())
    }

    pub fn box_of(&self, p: &Point) -> BoxId {
        box_id(p, &self.grid).expect("dimension checked at ingestion")
    }

    pub fn key(&self, id: &BoxId) -> u128 {
        self.codec.encode(id)
    }

    /// Leaves of ε-neighbor boxes other than `id` itself, in key order.
    /// Probes every neighbor offset when that is cheaper than walking the
    /// tree, otherwise runs a pruned range search; both give the same set.
    pub fn neighbor_leaves<L>(&self, tree: &RadixTree<L>, id: &BoxId, checks: &mut u64) -> Vec<usize> {
        let own = self.key(id);
        match &self.offsets {
            Some(offsets) if offsets.len() <= tree.live_nodes() => {
                let max = self.codec.max_index();
                let mut out = Vec::new();
                for off in offsets {
                    *checks += 1;
                    let Some(g) = offset_box(id, off) else { continue };
                    if g.indices().iter().any(|&c| c > max) {
                        continue;
                    }
                    let key = self.key(&g);
                    if key == own {
                        continue;
                    }
                    if let Some(leaf) = tree.find(key) {
                        out.push(leaf);
                    }
                }
                out
            }
            _ => {
                let lo: Vec<u64> = id.indices().iter().map(|&c| c.saturating_sub(self.radius)).collect();
                let hi: Vec<u64> = id.indices().iter().map(|&c| c.saturating_add(self.radius)).collect();
                tree.leaves_in_range(&self.codec, &lo, &hi)
                    .into_iter()
                    .filter(|&leaf| {
                        *checks += 1;
                        let key = tree.node(leaf).key;
                        key != own && are_eps_neighbors(id, &self.codec.decode(key), &self.grid).unwrap_or(false)
                    })
                    .collect()
            }
        }
    }

    /// Same set by brute force over all leaves.
    #[cfg(test)]
    pub fn neighbor_leaves_naive<L>(&self, tree: &RadixTree<L>, id: &BoxId) -> Vec<usize> {
        let own = self.key(id);
        tree.leaves()
            .into_iter()
            .filter(|&leaf| {
                let key = tree.node(leaf).key;
                key != own && are_eps_neighbors(id, &self.codec.decode(key), &self.grid).unwrap_or(false)
            })
            .collect()
    }
}

/// Picks an index of the set with probability exactly `1/|S|` by descending
/// the tree with branch probabilities `C_child/C`, then choosing uniformly
/// inside the leaf.
pub(crate) fn weighted_descent<L, R: Rng + ?Sized>(
    tree: &RadixTree<L>,
    slot: Option<usize>,
    rng: &mut R,
    leaf_pick: impl Fn(&L, u64) -> usize,
) -> Result<usize, HiError> {
    let weight = |c: [u64; 2]| slot.map_or(c[0] + c[1], |s| c[s]);
    let mut cur = tree.root().ok_or(HiError::Empty)?;
    if weight(tree.node(cur).counts) == 0 {
        return Err(HiError::Empty);
    }
    loop {
        let n = tree.node(cur);
        match n.children {
            Some([l, r]) => {
                let total = weight(n.counts);
                let left = weight(tree.node(l).counts);
                cur = if rng.gen_range(0..total) < left { l } else { r };
            }
            None => {
                let c = weight(n.counts);
                return Ok(leaf_pick(n.leaf.as_ref().expect("leaf"), rng.gen_range(0..c)));
            }
        }
    }
}

/// Exact probability, as a fraction, that [`weighted_descent`] reaches the
/// leaf `leaf` and then returns a particular one of its elements.
pub(crate) fn descent_probability<L>(tree: &RadixTree<L>, slot: Option<usize>, leaf: usize) -> num_rational::Ratio<u64> {
    let weight = |c: [u64; 2]| slot.map_or(c[0] + c[1], |s| c[s]);
    let mut p = num_rational::Ratio::new(1, weight(tree.node(leaf).counts));
    let mut cur = leaf;
    while let Some(parent) = tree.node(cur).parent {
        p *= num_rational::Ratio::new(weight(tree.node(cur).counts), weight(tree.node(parent).counts));
        cur = parent;
    }
    p
}

/// Structural invariants shared by every variant.
/// For each box, the positions of the other boxes that are ε-neighbors,
/// found by a sweep along the first index rather than by offset probing.
pub(crate) fn neighbor_lists(ids: &[&BoxId], grid: &GridParams) -> Vec<Vec<usize>> {
    let reach = grid.neighbor_radius();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by_key(|&k| ids[k].0[0]);
    let mut out = vec![Vec::new(); ids.len()];
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            if ids[j].0[0] > ids[i].0[0] + reach {
                break;
            }
            if crate::geometry::are_eps_neighbors(ids[i], ids[j], grid).unwrap_or(false) {
                out[i].push(j);
                out[j].push(i);
            }
        }
    }
    out
}

pub(crate) fn audit_tree<L>(tree: &RadixTree<L>, codec: &KeyCodec) -> Result<(), AuditError> {
    let mut reachable = Vec::new();
    let mut err = None;
    tree.preorder(|idx, n| {
        reachable.push(idx);
        if err.is_some() {
            return;
        }
        match n.children {
            None => {
                if n.depth != codec.total_bits() {
                    err = Some(format!("leaf {idx} at depth {}", n.depth));
                }
                if n.leaf.is_none() {
                    err = Some(format!("leaf {idx} without payload"));
                }
            }
            Some([l, r]) => {
                let (a, b) = (tree.node(l), tree.node(r));
                if a.parent != Some(idx) || b.parent != Some(idx) {
                    err = Some(format!("broken parent link under {idx}"));
                } else if a.depth <= n.depth || b.depth <= n.depth {
                    err = Some(format!("child not deeper than {idx}"));
                } else if (a.key >> (127 - n.depth)) & 1 != 0 || (b.key >> (127 - n.depth)) & 1 != 1 {
                    err = Some(format!("children of {idx} not split on bit {}", n.depth));
                } else if a.counts[0] + b.counts[0] != n.counts[0] || a.counts[1] + b.counts[1] != n.counts[1] {
                    err = Some(format!("counter of {idx} is not the sum of its children"));
                } else if (a.flag || b.flag) != n.flag {
                    err = Some(format!("flag of {idx} is not the OR of its children"));
                } else if n.leaf.is_some() {
                    err = Some(format!("internal node {idx} carries a payload"));
                }
                let mask = if n.depth == 0 { 0 } else { u128::MAX << (128 - n.depth) };
                if a.key & mask != n.key || b.key & mask != n.key {
                    err = Some(format!("child prefix of {idx} does not extend its label"));
                }
            }
        }
    });
    if let Some(e) = err {
        return Err(AuditError(e));
    }
    let bitmap = tree.bitmap();
    ensure!(bitmap.used() == reachable.len(), "bitmap marks {} cells, {} reachable", bitmap.used(), reachable.len());
    for &c in &reachable {
        ensure!(bitmap.is_set(c), "reachable cell {c} marked free");
    }
    ensure!(bitmap.free_fraction() >= 1.0 / 3.0, "free fraction {} below 1/3", bitmap.free_fraction());
    Ok(())
}

/// Any of the three variants behind one interface.
#[derive(Debug)]
pub enum HiStructure {
    Basic(BasicTree),
    Augmented(AugmentedTree),
    Bichromatic(BichromaticTree),
}

impl HiStructure {
    pub fn new(variant: Variant, cfg: StructureConfig) -> Result<Self, HiError> {
        Ok(match variant {
            Variant::Basic => Self::Basic(BasicTree::new(cfg)?),
            Variant::Augmented => Self::Augmented(AugmentedTree::new(cfg)?),
            Variant::Bichromatic => Self::Bichromatic(BichromaticTree::new(cfg)?),
        })
    }

    pub fn variant(&self) -> Variant {
        match self {
            Self::Basic(_) => Variant::Basic,
            Self::Augmented(_) => Variant::Augmented,
            Self::Bichromatic(_) => Variant::Bichromatic,
        }
    }

    /// Inserts `p` under index `i`; monochromatic variants accept only
    /// [`Color::A`].
    pub fn insert(&mut self, color: Color, i: usize, p: &Point) -> Result<(), HiError> {
        match self {
            Self::Basic(t) if color == Color::A => t.insert(i, p),
            Self::Augmented(t) if color == Color::A => t.insert(i, p),
            Self::Bichromatic(t) => t.insert(color, i, p),
            _ => Err(HiError::ColorUnsupported),
        }
    }

    pub fn delete(&mut self, color: Color, i: usize, p: &Point) -> Result<(), HiError> {
        match self {
            Self::Basic(t) if color == Color::A => t.delete(i, p),
            Self::Augmented(t) if color == Color::A => t.delete(i, p),
            Self::Bichromatic(t) => t.delete(color, i, p),
            _ => Err(HiError::ColorUnsupported),
        }
    }

    /// Root flag, or `None` once a failure event has been recorded.
    pub fn has_close_pair(&self) -> Option<bool> {
        match self {
            Self::Basic(t) => Some(t.has_close_pair()),
            Self::Augmented(t) => t.has_close_pair(),
            Self::Bichromatic(t) => t.has_close_pair(),
        }
    }

    /// A flagged pair: by index, smaller first, for the monochromatic
    /// variants; `(index in A, index in B)` for the bichromatic one.
    pub fn find_close_pair(&self) -> Result<Option<(usize, usize)>, HiError> {
        match self {
            Self::Basic(t) => t.find_close_pair(),
            Self::Augmented(t) => t.find_close_pair(),
            Self::Bichromatic(t) => t.find_close_pair(),
        }
    }

    pub fn canonical_serialize(&self) -> Vec<u8> {
        match self {
            Self::Basic(t) => t.canonical_serialize(),
            Self::Augmented(t) => t.canonical_serialize(),
            Self::Bichromatic(t) => t.canonical_serialize(),
        }
    }

    /// Uniform index of the given color (any color when `None`).
    pub fn sample_uniform_index<R: Rng + ?Sized>(&self, color: Option<Color>, rng: &mut R) -> Result<usize, HiError> {
        match self {
            Self::Basic(t) => t.sample_uniform_index(rng),
            Self::Augmented(t) => t.sample_uniform_index(rng),
            Self::Bichromatic(t) => t.sample_uniform_index(color.unwrap_or(Color::A), rng),
        }
    }

    pub fn audit(&self) -> Result<(), AuditError> {
        match self {
            Self::Basic(t) => t.audit(),
            Self::Augmented(t) => t.audit(),
            Self::Bichromatic(t) => t.audit(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Basic(t) => t.len(),
            Self::Augmented(t) => t.len(),
            Self::Bichromatic(t) => t.len(Color::A) + t.len(Color::B),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn last_op(&self) -> OpStats {
        match self {
            Self::Basic(t) => t.last_op(),
            Self::Augmented(t) => t.last_op(),
            Self::Bichromatic(t) => t.last_op(),
        }
    }

    /// `STEP_CONST·(⌈log n⌉ + d·N)` for this structure's grid.
    pub fn step_bound(&self) -> u64 {
        match self {
            Self::Basic(t) => t.step_bound(),
            Self::Augmented(t) => t.step_bound(),
            Self::Bichromatic(t) => t.step_bound(),
        }
    }

    pub fn failures(&self) -> FailureCounts {
        match self {
            Self::Basic(_) => FailureCounts::default(),
            Self::Augmented(t) => t.failures(),
            Self::Bichromatic(t) => t.failures(),
        }
    }
}

pub(crate) fn step_bound(cfg: &StructureConfig, index: &GridIndex) -> u64 {
    let n = index.neighbor_bound().min(u64::MAX as u128 / 1024) as u64;
    STEP_CONST * (cfg.log_n() as u64 + cfg.grid.dim() as u64 * n)
}
