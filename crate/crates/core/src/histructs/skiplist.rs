//! Per-box skip lists ordered by element index. Nodes are hash-table entries;
//! the head pointers live in the radix leaf.

use super::hashtable::HashTable;

/// Level of element `i`: the number of leading ones of a keyed 64-bit hash,
/// capped at `lmax`, so `P(ℓ) = 2^{−(ℓ+1)}` below the cap.
pub fn level_of(seed: u64, salt: u64, i: usize, lmax: usize) -> usize {
    let h = splitmix64(seed ^ splitmix64(salt.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ splitmix64(i as u64));
    (h.trailing_ones() as usize).min(lmax)
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn succ(head: &[Option<usize>], table: &HashTable, at: Option<usize>, level: usize) -> Option<usize> {
    match at {
        None => head[level],
        Some(j) => table.get(j).expect("linked element is stored").next[level],
    }
}

fn set_succ(head: &mut [Option<usize>], table: &mut HashTable, at: Option<usize>, level: usize, to: Option<usize>) {
    match at {
        None => head[level] = to,
        Some(j) => table.get_mut(j).expect("linked element is stored").next[level] = to,
    }
}

/// Last element below `target` on each level (`None` is the head), found by
/// the usual top-down search.
fn predecessors(head: &[Option<usize>], table: &HashTable, target: usize, steps: &mut u64) -> Vec<Option<usize>> {
    let mut preds = vec![None; head.len()];
    let mut cur = None;
    for level in (0..head.len()).rev() {
        loop {
            *steps += 1;
            match succ(head, table, cur, level) {
                Some(j) if j < target => cur = Some(j),
                _ => break,
            }
        }
        preds[level] = cur;
    }
    preds
}

/// Links element `i`, already present in the table, into the list.
pub(crate) fn insert(head: &mut [Option<usize>], table: &mut HashTable, i: usize) -> u64 {
    let mut steps = 0;
    let preds = predecessors(head, table, i, &mut steps);
    let level = table.get(i).expect("entry stored before linking").level;
    for (l, &p) in preds.iter().enumerate().take(level + 1) {
        let next = succ(head, table, p, l);
        table.get_mut(i).expect("entry").next[l] = next;
        set_succ(head, table, p, l, Some(i));
    }
    steps
}

/// Unlinks element `i`; the table entry is left in place.
pub(crate) fn remove(head: &mut [Option<usize>], table: &mut HashTable, i: usize) -> u64 {
    let mut steps = 0;
    let preds = predecessors(head, table, i, &mut steps);
    let entry = table.get(i).expect("linked element is stored");
    let (level, next) = (entry.level, entry.next.clone());
    for (l, &p) in preds.iter().enumerate().take(level + 1) {
        debug_assert_eq!(succ(head, table, p, l), Some(i));
        set_succ(head, table, p, l, next[l]);
    }
    steps
}

/// Level-0 order, i.e. every element by ascending index.
pub(crate) fn elements(head: &[Option<usize>], table: &HashTable) -> Vec<usize> {
    let mut out = Vec::new();
    let mut cur = head[0];
    while let Some(j) = cur {
        out.push(j);
        cur = table.get(j).expect("linked element is stored").next[0];
    }
    out
}

/// The list restricted to `level`.
pub(crate) fn level_elements(head: &[Option<usize>], table: &HashTable, level: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut cur = head[level];
    while let Some(j) = cur {
        out.push(j);
        cur = table.get(j).expect("linked element is stored").next[level];
    }
    out
}
