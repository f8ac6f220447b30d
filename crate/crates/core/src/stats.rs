//! Treebank size statistics.

use alloc::vec::Vec;

use crate::tree::JointTree;

/// Tree and token counts with a length histogram.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub trees: usize,
    pub tokens: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub bucket_width: usize,
    /// `(bucket start, tree count)` for every non-empty bucket, in order.
    pub histogram: Vec<(usize, usize)>,
}

/// Counts trees and tokens and buckets tree lengths into `bucket_width`-token
/// bins. An empty treebank gives all-zero statistics.
pub fn corpus_stats(trees: &[JointTree], bucket_width: usize) -> CorpusStats {
    let bucket_width = bucket_width.max(1);
    if trees.is_empty() {
        return CorpusStats {
            bucket_width,
            ..CorpusStats::default()
        };
    }
    let lengths: Vec<usize> = trees.iter().map(JointTree::len).collect();
    let max_len = lengths.iter().copied().max().unwrap_or(0);
    let mut counts = alloc::vec![0usize; max_len / bucket_width + 1];
    for &len in &lengths {
        counts[len / bucket_width] += 1;
    }
    CorpusStats {
        trees: trees.len(),
        tokens: lengths.iter().sum(),
        min_len: lengths.iter().copied().min().unwrap_or(0),
        max_len,
        bucket_width,
        histogram: counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(b, c)| (b * bucket_width, c))
            .collect(),
    }
}
