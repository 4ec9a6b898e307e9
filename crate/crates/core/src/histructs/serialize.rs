//! Canonical little-endian byte format.
//!
//! Layout: header, then the tree in pre-order (left child first), then each
//! hash table bucket by bucket. Nodes carry their edge label, never a cell
//! address.

use super::hashtable::{Entry, HashTable};
use super::radix::{edge_label_bytes, KeyCodec, RadixTree};
use super::{StructureConfig, Variant};
use crate::geometry::Point;

pub const FORMAT_VERSION: u16 = 1;
const MAGIC: &[u8; 4] = b"QCHI";
pub(crate) const NULL_LINK: u64 = u64::MAX;

#[derive(Default)]
pub(crate) struct ByteWriter(Vec<u8>);

impl ByteWriter {
    pub fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u128(&mut self, v: u128) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    pub fn raw(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }

    pub fn link(&mut self, v: Option<usize>) {
        self.u64(v.map_or(NULL_LINK, |x| x as u64));
    }

    pub fn point(&mut self, p: &Point) {
        self.u64(p.index() as u64);
        for &c in p.coords() {
            self.u64(c);
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.0
    }
}

pub(crate) fn header(w: &mut ByteWriter, variant: Variant, cfg: &StructureConfig, codec: &KeyCodec) {
    w.raw(MAGIC);
    w.u16(FORMAT_VERSION);
    w.u8(variant.tag());
    let g = &cfg.grid;
    w.u32(g.dim() as u32);
    w.u128(g.eps().num());
    w.u128(g.eps().den());
    let (sn, sd) = g.scale();
    w.u64(sn);
    w.u64(sd);
    w.u64(cfg.seed);
    w.u64(cfg.universe as u64);
    w.u64(cfg.capacity as u64);
    w.u32(cfg.coord_bits);
    w.u32(codec.width());
}

/// Pre-order dump; `leaf` writes each leaf's variant payload.
pub(crate) fn tree<L>(w: &mut ByteWriter, tree: &RadixTree<L>, mut leaf: impl FnMut(&mut ByteWriter, &L)) {
    w.u64(tree.leaves().len() as u64);
    tree.preorder(|idx, n| {
        w.u8(if n.children.is_some() { 0 } else { 1 });
        let from = tree.parent_depth(idx);
        w.u16((n.depth - from) as u16);
        w.raw(&edge_label_bytes(n.key, from, n.depth));
        w.u64(n.counts[0]);
        w.u64(n.counts[1]);
        w.u8(n.flag as u8);
        if let Some(payload) = &n.leaf {
            leaf(w, payload);
        }
    });
}

pub(crate) fn entry(w: &mut ByteWriter, e: &Entry) {
    w.point(&e.point);
    w.u8(e.level as u8);
    for &l in &e.next {
        w.link(l);
    }
}

pub(crate) fn table(w: &mut ByteWriter, t: &HashTable) {
    w.u64(t.buckets().len() as u64);
    for b in t.buckets() {
        w.u32(b.len() as u32);
        for e in b {
            entry(w, e);
        }
    }
}
