//! Partition agreement.

use alloc::vec;

fn choose2(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Adjusted Rand index of two labelings of the same nodes.
///
/// Returns 1 when both partitions are identical up to relabeling, including
/// the degenerate case where either has a single cluster and they agree.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same nodes");
    let n = a.len() as u64;
    if n < 2 {
        return 1.0;
    }
    let ra = a.iter().max().map_or(0, |m| m + 1);
    let rb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![0u64; ra * rb];
    for (x, y) in a.iter().zip(b) {
        table[x * rb + y] += 1;
    }
    let mut row = vec![0u64; ra];
    let mut col = vec![0u64; rb];
    for x in 0..ra {
        for y in 0..rb {
            row[x] += table[x * rb + y];
            col[y] += table[x * rb + y];
        }
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let sum_a: f64 = row.iter().map(|&c| choose2(c)).sum();
    let sum_b: f64 = col.iter().map(|&c| choose2(c)).sum();
    let expected = sum_a * sum_b / choose2(n);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return if index == expected { 1.0 } else { 0.0 };
    }
    (index - expected) / (max - expected)
}
