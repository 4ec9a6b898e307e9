//! Path-compressed binary radix tree stored in a fixed arena of cells, with a
//! bitmap of occupied cells.

use std::sync::atomic::{AtomicU64, Ordering};

use super::HiError;
use crate::geometry::{BoxId, GridParams};

/// Fixed-width key encoding of box ids: each coordinate big-endian in `width`
/// bits, coordinates concatenated, left-aligned in a `u128`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct KeyCodec {
    dim: usize,
    width: u32,
    max_index: u64,
}

impl KeyCodec {
    pub fn new(grid: &GridParams, coord_bits: u32) -> Result<Self, HiError> {
        let top = if coord_bits >= 64 { u64::MAX } else { (1u64 << coord_bits) - 1 };
        let max_index = grid.coord_box(top);
        let width = 64 - max_index.leading_zeros() + 1;
        let total = width as usize * grid.dim();
        if total > 128 {
            return Err(HiError::KeyTooWide { bits: total });
        }
        Ok(Self { dim: grid.dim(), width, max_index })
    }

    pub fn total_bits(&self) -> u32 {
        self.width * self.dim as u32
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn max_index(&self) -> u64 {
        self.max_index
    }

    pub fn encode(&self, id: &BoxId) -> u128 {
        let mut key = 0u128;
        for &c in id.indices() {
            key = (key << self.width) | c as u128;
        }
        key << (128 - self.total_bits())
    }

    pub fn decode(&self, key: u128) -> BoxId {
        let mask = (1u128 << self.width) - 1;
        let k = key >> (128 - self.total_bits());
        BoxId(
            (0..self.dim)
                .map(|c| ((k >> (self.width * (self.dim - 1 - c) as u32)) & mask) as u64)
                .collect(),
        )
    }

    /// Whether some key with the given `depth`-bit prefix decodes into the
    /// coordinate box `[lo, hi]`.
    fn prefix_meets(&self, prefix: u128, depth: u32, lo: &[u64], hi: &[u64]) -> bool {
        let w = self.width;
        for c in 0..self.dim {
            let start = c as u32 * w;
            if depth <= start {
                break;
            }
            let known = (depth - start).min(w);
            let field = (prefix << start) >> (128 - w);
            let free = w - known;
            let v_lo = (field >> free) << free;
            let v_hi = v_lo | ((1u128 << free) - 1);
            if v_hi < lo[c] as u128 || v_lo > hi[c] as u128 {
                return false;
            }
        }
        true
    }
}

fn bit(key: u128, pos: u32) -> usize {
    ((key >> (127 - pos)) & 1) as usize
}

fn prefix(key: u128, len: u32) -> u128 {
    if len == 0 {
        0
    } else {
        key & (u128::MAX << (128 - len))
    }
}

fn common_prefix(a: u128, b: u128) -> u32 {
    (a ^ b).leading_zeros()
}

/// Cell occupancy, one bit per cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellBitmap {
    words: Vec<u64>,
    cells: usize,
    used: usize,
}

impl CellBitmap {
    pub fn new(cells: usize) -> Self {
        Self { words: vec![0; cells.div_ceil(64)], cells, used: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.cells
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn free_fraction(&self) -> f64 {
        1.0 - self.used as f64 / self.cells as f64
    }

    pub fn is_set(&self, cell: usize) -> bool {
        self.words[cell / 64] >> (cell % 64) & 1 == 1
    }

    fn alloc(&mut self) -> Option<usize> {
        for (w, word) in self.words.iter_mut().enumerate() {
            if *word != u64::MAX {
                let b = (!*word).trailing_zeros() as usize;
                let cell = w * 64 + b;
                if cell >= self.cells {
                    return None;
                }
                *word |= 1 << b;
                self.used += 1;
                return Some(cell);
            }
        }
        None
    }

    fn release(&mut self, cell: usize) {
        debug_assert!(self.is_set(cell));
        self.words[cell / 64] &= !(1 << (cell % 64));
        self.used -= 1;
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Node<L> {
    pub parent: Option<usize>,
    pub children: Option<[usize; 2]>,
    /// Prefix length in bits; for a leaf, the full key length.
    pub depth: u32,
    pub key: u128,
    /// Per-color local counters; monochromatic variants use slot 0.
    pub counts: [u64; 2],
    pub flag: bool,
    pub leaf: Option<L>,
}

#[derive(Debug)]
pub(crate) struct RadixTree<L> {
    cells: Vec<Option<Node<L>>>,
    bitmap: CellBitmap,
    root: Option<usize>,
    key_bits: u32,
    steps: AtomicU64,
}

impl<L> RadixTree<L> {
    /// Room for `3·(2r−1)` cells, three times the node count of a tree
    /// with `r` leaves.
    pub fn new(max_leaves: usize, key_bits: u32) -> Self {
        let cells = 3 * (2 * max_leaves.max(1) - 1);
        Self {
            cells: (0..cells).map(|_| None).collect(),
            bitmap: CellBitmap::new(cells),
            root: None,
            key_bits,
            steps: AtomicU64::new(0),
        }
    }

    fn tick(&self) {
        self.steps.fetch_add(1, Ordering::Relaxed);
    }

    /// Node visits since the last reset.
    pub fn steps(&self) -> u64 {
        self.steps.load(Ordering::Relaxed)
    }

    pub fn reset_steps(&self) {
        self.steps.store(0, Ordering::Relaxed);
    }

    pub fn bitmap(&self) -> &CellBitmap {
        &self.bitmap
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn node(&self, idx: usize) -> &Node<L> {
        self.cells[idx].as_ref().expect("live cell")
    }

    pub fn node_mut(&mut self, idx: usize) -> &mut Node<L> {
        self.cells[idx].as_mut().expect("live cell")
    }

    pub fn leaf(&self, idx: usize) -> &L {
        self.node(idx).leaf.as_ref().expect("leaf node")
    }

    pub fn leaf_mut(&mut self, idx: usize) -> &mut L {
        self.node_mut(idx).leaf.as_mut().expect("leaf node")
    }

    fn alloc(&mut self, node: Node<L>) -> usize {
        let cell = self.bitmap.alloc().expect("arena sized for the capacity");
        self.cells[cell] = Some(node);
        cell
    }

    fn release(&mut self, cell: usize) -> Node<L> {
        self.bitmap.release(cell);
        self.cells[cell].take().expect("live cell")
    }

    pub fn find(&self, key: u128) -> Option<usize> {
        let mut cur = self.root?;
        loop {
            self.tick();
            let n = self.node(cur);
            if prefix(key, n.depth) != n.key {
                return None;
            }
            match n.children {
                None => return Some(cur),
                Some(ch) => cur = ch[bit(key, n.depth)],
            }
        }
    }

    /// Inserts a new leaf for `key`, which must be absent.
    pub fn insert_leaf(&mut self, key: u128, payload: L) -> usize {
        let leaf = Node {
            parent: None,
            children: None,
            depth: self.key_bits,
            key,
            counts: [0; 2],
            flag: false,
            leaf: Some(payload),
        };
        let Some(mut cur) = self.root else {
            let idx = self.alloc(leaf);
            self.root = Some(idx);
            return idx;
        };
        loop {
            self.tick();
            let (depth, node_key, children) = {
                let n = self.node(cur);
                (n.depth, n.key, n.children)
            };
            let cpl = common_prefix(key, node_key).min(depth);
            if cpl < depth {
                let parent = self.node(cur).parent;
                let split = self.alloc(Node {
                    parent,
                    children: None,
                    depth: cpl,
                    key: prefix(key, cpl),
                    counts: [0; 2],
                    flag: false,
                    leaf: None,
                });
                let new_leaf = self.alloc(Node { parent: Some(split), ..leaf });
                let ch = if bit(key, cpl) == 0 { [new_leaf, cur] } else { [cur, new_leaf] };
                self.node_mut(split).children = Some(ch);
                self.node_mut(cur).parent = Some(split);
                self.replace_child(parent, cur, split);
                return new_leaf;
            }
            match children {
                Some(ch) => cur = ch[bit(key, depth)],
                None => panic!("insert_leaf on an existing key"),
            }
        }
    }

    fn replace_child(&mut self, parent: Option<usize>, old: usize, new: usize) {
        match parent {
            None => self.root = Some(new),
            Some(p) => {
                let ch = self.node_mut(p).children.as_mut().expect("internal node");
                let slot = if ch[0] == old { 0 } else { 1 };
                ch[slot] = new;
            }
        }
    }

    /// Removes a leaf and merges its sibling upwards. Returns the payload and
    /// the lowest surviving ancestor whose aggregates need refreshing.
    pub fn remove_leaf(&mut self, idx: usize) -> (L, Option<usize>) {
        let parent = self.node(idx).parent;
        let node = self.release(idx);
        let payload = node.leaf.expect("leaf node");
        let Some(p) = parent else {
            self.root = None;
            return (payload, None);
        };
        let pnode = self.release(p);
        let ch = pnode.children.expect("internal node");
        let sibling = if ch[0] == idx { ch[1] } else { ch[0] };
        self.node_mut(sibling).parent = pnode.parent;
        self.replace_child(pnode.parent, p, sibling);
        (payload, pnode.parent)
    }

    /// Recomputes counters and flags of every internal ancestor of `idx`
    /// (and `idx` itself if internal), bottom-up.
    pub fn refresh_from(&mut self, idx: Option<usize>) {
        let mut cur = idx;
        while let Some(v) = cur {
            self.tick();
            if let Some([l, r]) = self.node(v).children {
                let (a, b) = (self.node(l), self.node(r));
                let counts = [a.counts[0] + b.counts[0], a.counts[1] + b.counts[1]];
                let flag = a.flag || b.flag;
                let n = self.node_mut(v);
                n.counts = counts;
                n.flag = flag;
            }
            cur = self.node(v).parent;
        }
    }

    /// Sets a leaf's counters and flag and refreshes its ancestors.
    pub fn set_leaf_state(&mut self, idx: usize, counts: [u64; 2], flag: bool) {
        let n = self.node_mut(idx);
        n.counts = counts;
        n.flag = flag;
        let parent = n.parent;
        self.refresh_from(parent);
    }

    pub fn root_flag(&self) -> bool {
        self.root.is_some_and(|r| self.node(r).flag)
    }

    pub fn root_counts(&self) -> [u64; 2] {
        self.root.map_or([0; 2], |r| self.node(r).counts)
    }

    /// Leftmost flagged leaf reached by following flag bits.
    pub fn first_flagged_leaf(&self) -> Option<usize> {
        let mut cur = self.root?;
        if !self.node(cur).flag {
            return None;
        }
        loop {
            self.tick();
            match self.node(cur).children {
                None => return Some(cur),
                Some([l, r]) => cur = if self.node(l).flag { l } else { r },
            }
        }
    }

    /// Leaves in key order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.preorder(|idx, n| {
            if n.children.is_none() {
                out.push(idx);
            }
        });
        out
    }

    /// Visits nodes in pre-order, left child first.
    pub fn preorder(&self, mut f: impl FnMut(usize, &Node<L>)) {
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(v) = stack.pop() {
            let n = self.node(v);
            f(v, n);
            if let Some([l, r]) = n.children {
                stack.push(r);
                stack.push(l);
            }
        }
    }

    pub fn parent_depth(&self, idx: usize) -> u32 {
        self.node(idx).parent.map_or(0, |p| self.node(p).depth)
    }

    /// Leaves whose decoded box lies in `[lo, hi]` coordinate-wise, in key
    /// order.
    pub fn leaves_in_range(&self, codec: &KeyCodec, lo: &[u64], hi: &[u64]) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(v) = stack.pop() {
            self.tick();
            let n = self.node(v);
            if !codec.prefix_meets(n.key, n.depth, lo, hi) {
                continue;
            }
            match n.children {
                None => out.push(v),
                Some([l, r]) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        out
    }

    pub fn live_nodes(&self) -> usize {
        self.bitmap.used()
    }
}

/// Packs the bits `[from, to)` of a left-aligned key, most significant first.
pub(crate) fn edge_label_bytes(key: u128, from: u32, to: u32) -> Vec<u8> {
    let len = to - from;
    if len == 0 {
        return Vec::new();
    }
    let bits = (key << from) & (u128::MAX << (128 - len));
    bits.to_be_bytes()[..(len as usize).div_ceil(8)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EpsSq;

    fn codec() -> KeyCodec {
        let g = GridParams::unit(2, EpsSq::integer(2).unwrap()).unwrap();
        KeyCodec::new(&g, 4).unwrap()
    }

    #[test]
    fn codec_round_trip_and_order() {
        let c = codec();
        assert_eq!(c.max_index(), 15);
        assert_eq!(c.width(), 5);
        let ids = [BoxId(vec![0, 3]), BoxId(vec![1, 0]), BoxId(vec![15, 15])];
        for w in ids.windows(2) {
            assert!(c.encode(&w[0]) < c.encode(&w[1]));
        }
        for id in &ids {
            assert_eq!(&c.decode(c.encode(id)), id);
        }
    }

    #[test]
    fn insert_find_remove() {
        let c = codec();
        let mut t: RadixTree<u32> = RadixTree::new(8, c.total_bits());
        let keys: Vec<u128> = [(0, 3), (1, 0), (1, 1), (7, 2)]
            .iter()
            .map(|&(a, b)| c.encode(&BoxId(vec![a, b])))
            .collect();
        let idx: Vec<usize> = keys.iter().map(|&k| t.insert_leaf(k, 0)).collect();
        for (k, i) in keys.iter().zip(&idx) {
            assert_eq!(t.find(*k), Some(*i));
        }
        assert_eq!(t.live_nodes(), 7);
        let order: Vec<u128> = t.leaves().iter().map(|&l| t.node(l).key).collect();
        assert_eq!(order, keys);
        t.remove_leaf(idx[1]);
        assert_eq!(t.find(keys[1]), None);
        assert_eq!(t.live_nodes(), 5);
        for i in [0, 2, 3] {
            t.remove_leaf(t.find(keys[i]).unwrap());
        }
        assert_eq!(t.live_nodes(), 0);
        assert!(t.root().is_none());
    }

    #[test]
    fn range_query_prunes() {
        let c = codec();
        let mut t: RadixTree<()> = RadixTree::new(16, c.total_bits());
        for a in 0..4 {
            for b in 0..4 {
                t.insert_leaf(c.encode(&BoxId(vec![a * 3, b * 3])), ());
            }
        }
        let hits: Vec<BoxId> =
            t.leaves_in_range(&c, &[2, 2], &[6, 9]).iter().map(|&l| c.decode(t.node(l).key)).collect();
        assert_eq!(
            hits,
            vec![
                BoxId(vec![3, 3]),
                BoxId(vec![3, 6]),
                BoxId(vec![3, 9]),
                BoxId(vec![6, 3]),
                BoxId(vec![6, 6]),
                BoxId(vec![6, 9])
            ]
        );
    }

    #[test]
    fn bitmap_lowest_free() {
        let mut b = CellBitmap::new(70);
        for i in 0..70 {
            assert_eq!(b.alloc(), Some(i));
        }
        assert_eq!(b.alloc(), None);
        b.release(65);
        b.release(3);
        assert_eq!(b.alloc(), Some(3));
        assert_eq!(b.alloc(), Some(65));
    }

    #[test]
    fn edge_labels() {
        let key = 0b1011u128 << 124;
        assert_eq!(edge_label_bytes(key, 0, 4), vec![0b1011_0000]);
        assert_eq!(edge_label_bytes(key, 1, 3), vec![0b0100_0000]);
        assert!(edge_label_bytes(key, 2, 2).is_empty());
    }
}
