//! Brute-force reference implementations used to cross-check the optimized
//! code paths. Deliberately naive: nested loops, full tables, no shared helpers
//! with the library beyond the plain data types.
#![allow(dead_code)]

use vispipe_core::plan::PipelinePlan;
use vispipe_core::Corpus;

/// (entry id, score, [(node index, hits)]) for the top `k` entries.
pub type RankedRow = (String, f64, Vec<(usize, usize)>);

/// Scores every corpus entry against every node, then sorts.
pub fn brute_force_retrieve(
    corpus: &Corpus,
    plan: &PipelinePlan,
    k: usize,
    normalized: bool,
    excluded: &[String],
) -> Vec<RankedRow> {
    let total: i64 = plan.nodes.iter().map(|n| n.weight).sum();
    let mut rows: Vec<(String, i64, Vec<(usize, usize)>)> = Vec::new();
    for entry in corpus.entries() {
        if excluded.contains(&entry.id) {
            continue;
        }
        let mut score = 0i64;
        let mut hits_per_node = Vec::new();
        for (ni, node) in plan.nodes.iter().enumerate() {
            let mut distinct: Vec<&String> = Vec::new();
            for m in &node.modules {
                if !distinct.contains(&m) {
                    distinct.push(m);
                }
            }
            let mut hits = 0usize;
            for m in distinct {
                if entry.modules.contains(m) {
                    hits += 1;
                }
            }
            if hits > 0 {
                hits_per_node.push((ni, hits));
            }
            score += hits as i64 * node.weight;
        }
        if !hits_per_node.is_empty() {
            rows.push((entry.id.clone(), score, hits_per_node));
        }
    }
    // selection sort: highest score first, smaller id on ties
    let mut out = Vec::new();
    while !rows.is_empty() && out.len() < k {
        let mut best = 0;
        for i in 1..rows.len() {
            let (ref id, s, _) = rows[i];
            let (ref bid, bs, _) = rows[best];
            if s > bs || (s == bs && id < bid) {
                best = i;
            }
        }
        let (id, s, hits) = rows.remove(best);
        let score = if normalized { s as f64 / total as f64 } else { s as f64 };
        out.push((id, score, hits));
    }
    out
}

/// Longest common subsequence length by the textbook O(n·m) table.
pub fn lcs_table<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

/// Insert/delete edit distance via the LCS table.
pub fn indel_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.len() + b.len() - 2 * lcs_table(a, b)
}
