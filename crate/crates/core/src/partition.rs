//! Partitions of the node index set and directional cut-sets.

use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition needs at least 2 blocks")]
    TooFewBlocks,
    #[error("blocks must be disjoint, nonempty and cover 0..{0}")]
    BadCover(usize),
    #[error("cannot parse partition `{0}`: {1}")]
    Parse(String, String),
}

/// Whether block-to-block influence is severed both ways (plain) or per
/// ordered block pair (directional).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PartitionMode {
    Plain,
    Directional,
}

/// A division of {0..n-1} into k >= 2 disjoint nonempty blocks.
/// Canonical form: elements sorted within blocks, blocks sorted by their
/// smallest element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    n: usize,
    pub mode: PartitionMode,
}

impl Partition {
    pub fn new(mut blocks: Vec<Vec<usize>>, n: usize, mode: PartitionMode) -> Result<Self, PartitionError> {
        if blocks.len() < 2 {
            return Err(PartitionError::TooFewBlocks);
        }
        let mut seen = vec![false; n];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(PartitionError::BadCover(n));
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= n || seen[i] {
                    return Err(PartitionError::BadCover(n));
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&b| b) {
            return Err(PartitionError::BadCover(n));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Partition { blocks, n, mode })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nodes outside `block`.
    pub fn complement(&self, block: &[usize]) -> Vec<usize> {
        (0..self.n).filter(|i| !block.contains(i)).collect()
    }

    /// Renders as 1-based `0,1|2` style text.
    pub fn render(&self) -> String {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Parses 1-based `1|2,3` style text.
    pub fn parse(text: &str, n: usize, mode: PartitionMode) -> Result<Self, PartitionError> {
        let err = |msg: &str| PartitionError::Parse(text.to_string(), msg.to_string());
        let mut blocks = Vec::new();
        for part in text.split('|') {
            let mut block = Vec::new();
            for tok in part.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    return Err(err("empty node label"));
                }
                let v: usize = tok.parse().map_err(|_| err("node labels are 1-based integers"))?;
                if v == 0 || v > n {
                    return Err(err("node label out of range"));
                }
                block.push(v - 1);
            }
            blocks.push(block);
        }
        Partition::new(blocks, n, mode)
    }
}

/// All set partitions of {0..n-1} with k >= 2 blocks, canonical order.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(item: usize, n: usize, current: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if item == n {
            if current.len() >= 2 {
                out.push(current.clone());
            }
            return;
        }
        for i in 0..current.len() {
            current[i].push(item);
            rec(item + 1, n, current, out);
            current[i].pop();
        }
        current.push(vec![item]);
        rec(item + 1, n, current, out);
        current.pop();
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    rec(0, n, &mut current, &mut out);
    out.sort();
    out
}

/// All bipartitions of {0..n-1}: 2^(n-1) - 1 of them.
pub fn bipartitions(n: usize, mode: PartitionMode) -> Vec<Partition> {
    let mut out = Vec::new();
    for mask in 1..(1u32 << (n - 1)) {
        // node 0 always in the first block; mask chooses companions
        let b1: Vec<usize> = (0..n).filter(|&i| i == 0 || (i < n && mask >> i & 1 == 1)).collect();
        let b2: Vec<usize> = (0..n).filter(|i| !b1.contains(i)).collect();
        if b2.is_empty() {
            continue;
        }
        out.push(Partition::new(vec![b1, b2], n, mode).unwrap());
    }
    out.sort_by(|a, b| a.blocks.cmp(&b.blocks));
    out
}

/// A set of severed ordered node pairs (src, dst), sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CutSet {
    pairs: Vec<(usize, usize)>,
}

impl CutSet {
    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        CutSet { pairs }
    }

    /// Severs every cross-block pair in both directions.
    pub fn full_cut(partition: &Partition) -> Self {
        let mut pairs = Vec::new();
        for block in partition.blocks() {
            for &dst in block {
                for src in partition.complement(block) {
                    pairs.push((src, dst));
                }
            }
        }
        CutSet::from_pairs(pairs)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, src: usize, dst: usize) -> bool {
        self.pairs.binary_search(&(src, dst)).is_ok()
    }

    /// Sources whose wire into `dst` is severed.
    pub fn severed_sources(&self, dst: usize) -> Vec<usize> {
        self.pairs.iter().filter(|&&(_, d)| d == dst).map(|&(s, _)| s).collect()
    }

    pub fn render(&self) -> String {
        self.pairs
            .iter()
            .map(|&(s, d)| format!("{}->{}", s + 1, d + 1))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Per-block cut direction: sever the block's causes, effects, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Causes,
    Effects,
    Both,
}

/// Every distinct cut-set reachable from a directional partition: for each
/// set partition with k >= 2 blocks and each assignment of a direction to
/// every block, the union of the severed ordered pairs. Deduplicated.
pub fn directional_cut_sets(n: usize) -> Vec<CutSet> {
    let mut seen = BTreeSet::new();
    for blocks in set_partitions(n) {
        let k = blocks.len();
        let complements: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| (0..n).filter(|i| !b.contains(i)).collect())
            .collect();
        for assignment in 0..3u32.pow(k as u32) {
            let mut pairs = Vec::new();
            let mut code = assignment;
            for (block, comp) in blocks.iter().zip(&complements) {
                let dir = match code % 3 {
                    0 => Direction::Causes,
                    1 => Direction::Effects,
                    _ => Direction::Both,
                };
                code /= 3;
                if matches!(dir, Direction::Causes | Direction::Both) {
                    for &dst in block {
                        for &src in comp {
                            pairs.push((src, dst));
                        }
                    }
                }
                if matches!(dir, Direction::Effects | Direction::Both) {
                    for &src in block {
                        for &dst in comp {
                            pairs.push((src, dst));
                        }
                    }
                }
            }
            seen.insert(CutSet::from_pairs(pairs));
        }
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doublet_has_single_bipartition() {
        let parts = bipartitions(2, PartitionMode::Plain);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].blocks(), &[vec![0], vec![1]]);
    }

    #[test]
    fn bipartition_counts() {
        assert_eq!(bipartitions(3, PartitionMode::Plain).len(), 3);
        assert_eq!(bipartitions(4, PartitionMode::Plain).len(), 7);
    }

    #[test]
    fn set_partition_counts_match_bell_numbers_minus_one() {
        assert_eq!(set_partitions(2).len(), 1);
        assert_eq!(set_partitions(3).len(), 4);
        assert_eq!(set_partitions(4).len(), 14);
    }

    #[test]
    fn doublet_cut_sets_are_the_three_directional_cuts() {
        let cuts = directional_cut_sets(2);
        assert_eq!(cuts.len(), 3);
        assert!(cuts.contains(&CutSet::from_pairs(vec![(0, 1)])));
        assert!(cuts.contains(&CutSet::from_pairs(vec![(1, 0)])));
        assert!(cuts.contains(&CutSet::from_pairs(vec![(0, 1), (1, 0)])));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![vec![0, 1]], 2, PartitionMode::Plain).is_err());
        assert!(Partition::new(vec![vec![0], vec![0]], 2, PartitionMode::Plain).is_err());
        assert!(Partition::new(vec![vec![0], vec![2]], 2, PartitionMode::Plain).is_err());
    }

    #[test]
    fn parse_render_round_trip() {
        let p = Partition::parse("1|2,3", 3, PartitionMode::Plain).unwrap();
        assert_eq!(p.blocks(), &[vec![0], vec![1, 2]]);
        assert_eq!(p.render(), "1|2,3");
    }
}
