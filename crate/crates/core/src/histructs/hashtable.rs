//! Fixed-hash table `h(i) = ⌊i·r/n⌋` with sorted buckets of bounded size.

use crate::geometry::Point;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Entry {
    pub index: usize,
    pub point: Point,
    pub level: usize,
    /// Skip-list successor per level, by element index.
    pub next: Vec<Option<usize>>,
}

#[derive(Clone, Debug)]
pub(crate) struct HashTable {
    buckets: Vec<Vec<Entry>>,
    universe: usize,
    bucket_cap: usize,
}

impl HashTable {
    pub fn new(buckets: usize, universe: usize, bucket_cap: usize) -> Self {
        Self { buckets: vec![Vec::new(); buckets.max(1)], universe: universe.max(1), bucket_cap }
    }

    pub fn bucket_of(&self, index: usize) -> usize {
        ((index as u128 * self.buckets.len() as u128) / self.universe as u128) as usize
    }

    /// Inserts in sorted position. Returns `false` when the bucket already
    /// held its full complement of entries; the entry is still stored so the
    /// structure stays usable, and the caller records the failure.
    pub fn insert(&mut self, entry: Entry) -> bool {
        let b = self.bucket_of(entry.index);
        let cap = self.bucket_cap;
        let bucket = &mut self.buckets[b];
        let pos = bucket.partition_point(|e| e.index < entry.index);
        debug_assert!(bucket.get(pos).map_or(true, |e| e.index != entry.index));
        let fits = bucket.len() < cap;
        bucket.insert(pos, entry);
        fits
    }

    pub fn remove(&mut self, index: usize) -> Option<Entry> {
        let b = self.bucket_of(index);
        let bucket = &mut self.buckets[b];
        let pos = bucket.binary_search_by_key(&index, |e| e.index).ok()?;
        Some(bucket.remove(pos))
    }

    pub fn get(&self, index: usize) -> Option<&Entry> {
        let bucket = &self.buckets[self.bucket_of(index)];
        bucket.binary_search_by_key(&index, |e| e.index).ok().map(|p| &bucket[p])
    }

    pub fn get_mut(&mut self, index: usize) -> Option<&mut Entry> {
        let b = self.bucket_of(index);
        let bucket = &mut self.buckets[b];
        let pos = bucket.binary_search_by_key(&index, |e| e.index).ok()?;
        Some(&mut bucket[pos])
    }

    pub fn contains(&self, index: usize) -> bool {
        self.get(index).is_some()
    }

    pub fn buckets(&self) -> &[Vec<Entry>] {
        &self.buckets
    }

    pub fn overfull_buckets(&self) -> usize {
        self.buckets.iter().filter(|b| b.len() > self.bucket_cap).count()
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.buckets.iter().flatten().map(|e| e.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(i: usize) -> Entry {
        Entry { index: i, point: Point::new(i, vec![i as u64]).unwrap(), level: 0, next: vec![None] }
    }

    #[test]
    fn buckets_sorted_and_bounded() {
        let mut t = HashTable::new(4, 16, 2);
        assert_eq!(t.bucket_of(0), 0);
        assert_eq!(t.bucket_of(15), 3);
        assert!(t.insert(entry(3)));
        assert!(t.insert(entry(1)));
        assert!(!t.insert(entry(2)));
        let idx: Vec<usize> = t.buckets()[0].iter().map(|e| e.index).collect();
        assert_eq!(idx, vec![1, 2, 3]);
        assert_eq!(t.overfull_buckets(), 1);
        assert_eq!(t.remove(2).unwrap().index, 2);
        assert_eq!(t.overfull_buckets(), 0);
        assert!(t.get(2).is_none());
        assert!(t.contains(3));
    }
}
