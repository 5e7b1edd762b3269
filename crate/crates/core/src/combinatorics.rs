//! Row-constrained set partitions and perfect pairings.
//!
//! The moment formulas index their terms by partitions `sigma` of the slot
//! set `[k]`, `k = k_1 + ... + k_m`, where the shape rows `(k_1..k_m)` are
//! the argument lists of the merged tensor factors. Admissible partitions
//! meet every row in at most one element per block (`|J ∩ J'| <= 1`), so a
//! block never merges two arguments of the same factor.

use crate::error::{Error, Result};
use crate::numeric::binomial;

/// Row lengths `(k_1..k_m)`; slots are numbered row by row, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowShape {
    rows: Vec<usize>,
    offsets: Vec<usize>,
}

impl RowShape {
    pub fn new(rows: Vec<usize>) -> Result<Self> {
        if rows.is_empty() || rows.iter().any(|&r| r == 0) {
            return Err(Error::InvalidArgument("row lengths must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut total = 0;
        for &r in &rows {
            offsets.push(total);
            total += r;
        }
        offsets.push(total);
        Ok(RowShape { rows, offsets })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Total slot count `k`.
    pub fn k(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn row_of_slot(&self, slot: usize) -> usize {
        debug_assert!(slot < self.k());
        self.offsets.partition_point(|&o| o <= slot) - 1
    }

    pub fn slots_of_row(&self, row: usize) -> std::ops::Range<usize> {
        self.offsets[row]..self.offsets[row + 1]
    }
}

/// A set partition of the shape's slots satisfying the row constraint.
/// Blocks are ordered by first slot (restricted-growth order) and each block
/// lists its slots in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowPartition {
    pub shape: RowShape,
    pub blocks: Vec<Vec<usize>>,
}

impl RowPartition {
    /// Checks all structural invariants; enumeration output always passes.
    pub fn validate(&self) -> Result<()> {
        let k = self.shape.k();
        let mut seen = vec![false; k];
        for block in &self.blocks {
            if block.is_empty() {
                return Err(Error::InvalidArgument("empty partition block".into()));
            }
            let mut rows_used = 0u64;
            for &slot in block {
                if slot >= k || seen[slot] {
                    return Err(Error::InvalidArgument("blocks must partition the slots".into()));
                }
                seen[slot] = true;
                let row = self.shape.row_of_slot(slot);
                if rows_used & (1 << row) != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "row constraint violated: block {block:?} meets row {row} twice"
                    )));
                }
                rows_used |= 1 << row;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidArgument("blocks must cover all slots".into()));
        }
        Ok(())
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index per slot.
    pub fn block_of_slot(&self) -> Vec<usize> {
        let mut out = vec![0; self.shape.k()];
        for (bi, block) in self.blocks.iter().enumerate() {
            for &slot in block {
                out[slot] = bi;
            }
        }
        out
    }

    /// True when every slot of `row` lies in a singleton block.
    pub fn row_is_pure_singleton(&self, row: usize) -> bool {
        let singleton: Vec<bool> = self.blocks.iter().map(|b| b.len() == 1).collect();
        let block_of = self.block_of_slot();
        self.shape.slots_of_row(row).all(|slot| singleton[block_of[slot]])
    }
}

/// Guard: explicit enumeration only up to this many slots.
pub const MAX_PARTITION_SLOTS: usize = 14;
/// Guard: pairings enumerate `(K-1)!!` matchings, capped here.
pub const MAX_PAIRING_ROWS: usize = 12;

/// All partitions of the shape's slots with `|J ∩ J'| <= 1` per row, in
/// restricted-growth-string order (deterministic, so downstream numeric sums
/// are reproducible bit-for-bit).
pub fn enumerate_row_partitions(shape: &RowShape) -> Result<Vec<RowPartition>> {
    let k = shape.k();
    if k > MAX_PARTITION_SLOTS {
        return Err(Error::ResourceLimit(format!(
            "partition enumeration for k={k} slots exceeds the k<={MAX_PARTITION_SLOTS} guard"
        )));
    }
    let row_of: Vec<usize> = (0..k).map(|s| shape.row_of_slot(s)).collect();
    let mut out = Vec::new();
    // rgs[i] = block index of slot i; block_rows[b] = bitmask of rows met by b.
    let mut rgs = vec![0usize; k];
    let mut block_rows: Vec<u64> = Vec::with_capacity(k);
    fn rec(
        slot: usize,
        k: usize,
        row_of: &[usize],
        rgs: &mut Vec<usize>,
        block_rows: &mut Vec<u64>,
        shape: &RowShape,
        out: &mut Vec<RowPartition>,
    ) {
        if slot == k {
            let mut blocks = vec![Vec::new(); block_rows.len()];
            for (s, &b) in rgs.iter().enumerate() {
                blocks[b].push(s);
            }
            out.push(RowPartition { shape: shape.clone(), blocks });
            return;
        }
        let row_bit = 1u64 << row_of[slot];
        for b in 0..=block_rows.len() {
            if b < block_rows.len() {
                if block_rows[b] & row_bit != 0 {
                    continue;
                }
                rgs[slot] = b;
                block_rows[b] |= row_bit;
                rec(slot + 1, k, row_of, rgs, block_rows, shape, out);
                block_rows[b] &= !row_bit;
            } else {
                rgs[slot] = b;
                block_rows.push(row_bit);
                rec(slot + 1, k, row_of, rgs, block_rows, shape, out);
                block_rows.pop();
            }
        }
    }
    rec(0, k, &row_of, &mut rgs, &mut block_rows, shape, &mut out);
    Ok(out)
}

/// Number of pure singleton rows `S(sigma)`.
pub fn singleton_row_count(p: &RowPartition) -> usize {
    (0..p.shape.num_rows()).filter(|&r| p.row_is_pure_singleton(r)).count()
}

/// All perfect matchings of `{0..K-1}` in deterministic order (smallest free
/// element pairs with each larger free element in turn). `(K-1)!!` matchings
/// for even K; an odd K yields the empty list, which callers read as a
/// vanishing odd moment.
pub fn enumerate_pairings(k: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if k > MAX_PAIRING_ROWS {
        return Err(Error::ResourceLimit(format!(
            "pairing enumeration for K={k} exceeds the K<={MAX_PAIRING_ROWS} guard"
        )));
    }
    if k % 2 == 1 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut used = vec![false; k];
    let mut current = Vec::with_capacity(k / 2);
    fn rec(
        k: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let first = match (0..k).find(|&i| !used[i]) {
            Some(i) => i,
            None => {
                out.push(current.clone());
                return;
            }
        };
        used[first] = true;
        for second in (first + 1)..k {
            if used[second] {
                continue;
            }
            used[second] = true;
            current.push((first, second));
            rec(k, used, current, out);
            current.pop();
            used[second] = false;
        }
        used[first] = false;
    }
    rec(k, &mut used, &mut current, &mut out);
    Ok(out)
}

/// `C(n, k)` as `f64`, with `C(n,k) = 0` for `k > n`.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial(n, k) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All set partitions of `[k]`, unconstrained, for brute-force filtering.
    fn all_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut rgs = vec![0usize; k];
        fn rec(slot: usize, k: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
            if slot == k {
                let blocks = max + 1;
                let mut p = vec![Vec::new(); blocks];
                for (s, &b) in rgs.iter().enumerate() {
                    p[b].push(s);
                }
                out.push(p);
                return;
            }
            for b in 0..=(max + 1).min(slot) {
                rgs[slot] = b;
                rec(slot + 1, k, max.max(b), rgs, out);
            }
        }
        if k == 0 {
            return vec![Vec::new()];
        }
        rec(0, k, 0, &mut rgs, &mut out);
        out
    }

    fn satisfies_row_constraint(blocks: &[Vec<usize>], shape: &RowShape) -> bool {
        blocks.iter().all(|block| {
            let mut rows = std::collections::HashSet::new();
            block.iter().all(|&s| rows.insert(shape.row_of_slot(s)))
        })
    }

    #[test]
    fn example_shapes_match_expected_counts() {
        let cases = [(vec![1, 1], 2usize), (vec![2, 2], 7), (vec![1, 1, 1], 5)];
        for (rows, expected) in cases {
            let shape = RowShape::new(rows.clone()).unwrap();
            let got = enumerate_row_partitions(&shape).unwrap();
            assert_eq!(got.len(), expected, "shape {rows:?}");
        }
    }

    #[test]
    fn enumeration_matches_brute_force_filter() {
        let shapes = [
            vec![1, 1],
            vec![2, 2],
            vec![1, 1, 1],
            vec![2, 1],
            vec![3, 2],
            vec![2, 2, 2],
            vec![3, 3],
            vec![4, 2],
            vec![2, 2, 2, 2],
            vec![1, 2, 3],
        ];
        for rows in shapes {
            let shape = RowShape::new(rows.clone()).unwrap();
            let fast = enumerate_row_partitions(&shape).unwrap();
            let slow: Vec<_> = all_partitions(shape.k())
                .into_iter()
                .filter(|p| satisfies_row_constraint(p, &shape))
                .collect();
            assert_eq!(fast.len(), slow.len(), "count mismatch for {rows:?}");
            let fast_sets: std::collections::HashSet<Vec<Vec<usize>>> =
                fast.iter().map(|p| p.blocks.clone()).collect();
            for p in &slow {
                assert!(fast_sets.contains(p), "missing {p:?} for {rows:?}");
            }
        }
    }

    #[test]
    fn singleton_shapes_give_bell_numbers() {
        let bell = [1usize, 1, 2, 5, 15, 52, 203, 877, 4140];
        for k in 1..=8usize {
            let shape = RowShape::new(vec![1; k]).unwrap();
            let got = enumerate_row_partitions(&shape).unwrap();
            assert_eq!(got.len(), bell[k], "Bell({k})");
        }
    }

    #[test]
    fn emitted_partitions_pass_their_invariants() {
        for rows in [vec![2, 2], vec![3, 1, 2], vec![1, 1, 1, 1]] {
            let shape = RowShape::new(rows).unwrap();
            for p in enumerate_row_partitions(&shape).unwrap() {
                p.validate().unwrap();
            }
        }
    }

    #[test]
    fn singleton_row_counting() {
        let shape = RowShape::new(vec![2, 2]).unwrap();
        let all = enumerate_row_partitions(&shape).unwrap();
        let all_singletons =
            all.iter().find(|p| p.blocks.iter().all(|b| b.len() == 1)).unwrap();
        assert_eq!(singleton_row_count(all_singletons), 2);
        let paired = RowPartition {
            shape: shape.clone(),
            blocks: vec![vec![0, 2], vec![1, 3]],
        };
        paired.validate().unwrap();
        assert_eq!(singleton_row_count(&paired), 0);
        let half = RowPartition {
            shape,
            blocks: vec![vec![0, 2], vec![1], vec![3]],
        };
        half.validate().unwrap();
        assert_eq!(singleton_row_count(&half), 0);
    }

    #[test]
    fn pairing_counts_are_double_factorials() {
        assert_eq!(enumerate_pairings(2).unwrap().len(), 1);
        assert_eq!(enumerate_pairings(3).unwrap().len(), 0);
        assert_eq!(enumerate_pairings(4).unwrap().len(), 3);
        let mut expected = 1usize;
        for k in (2..=10usize).step_by(2) {
            expected *= k - 1;
            assert_eq!(enumerate_pairings(k).unwrap().len(), expected, "K={k}");
        }
    }

    #[test]
    fn guards_trip() {
        let shape = RowShape::new(vec![1; 15]).unwrap();
        assert!(matches!(enumerate_row_partitions(&shape), Err(Error::ResourceLimit(_))));
        assert!(matches!(enumerate_pairings(14), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn row_lookup_is_consistent() {
        let shape = RowShape::new(vec![2, 3, 1]).unwrap();
        assert_eq!(shape.k(), 6);
        let rows: Vec<usize> = (0..6).map(|s| shape.row_of_slot(s)).collect();
        assert_eq!(rows, vec![0, 0, 1, 1, 1, 2]);
        assert_eq!(shape.slots_of_row(1), 2..5);
    }
}
