//! Line-level correction cost between a generated document and its
//! human-corrected version.
//!
//! The alignment is a minimal insert/delete edit script computed with Myers'
//! O((N+M)D) algorithm in linear space (middle-snake bisection). A modified
//! line therefore shows up as one deletion plus one insertion.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::html::inline_script_text;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineMode {
    /// Compare the whole document.
    #[default]
    FullDocument,
    /// Compare only the bodies of inline `<script>` elements.
    ScriptOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffOptions {
    pub mode: LineMode,
    /// Strip trailing whitespace from every line before comparing.
    pub trim_trailing_whitespace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffStats {
    pub added: usize,
    pub deleted: usize,
    pub cost: usize,
    pub lcs_length: usize,
}

/// Diff statistics together with the options they were computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    #[serde(flatten)]
    pub stats: DiffStats,
    pub options: DiffOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    /// `old[i] == new[j]`
    Equal { old: usize, new: usize },
    Delete { old: usize },
    Insert { new: usize },
}

/// Splits on `\n`; a trailing newline does not start an extra empty line.
pub fn split_lines(text: &str) -> Vec<&str> {
    text.split_terminator('\n').collect()
}

pub fn correction_cost(generated: &str, corrected: &str) -> DiffStats {
    correction_cost_with(generated, corrected, DiffOptions::default()).stats
}

pub fn correction_cost_with(generated: &str, corrected: &str, options: DiffOptions) -> CostReport {
    let (g, c);
    let (generated, corrected) = match options.mode {
        LineMode::FullDocument => (generated, corrected),
        LineMode::ScriptOnly => {
            g = inline_script_text(generated);
            c = inline_script_text(corrected);
            (g.as_str(), c.as_str())
        }
    };
    let prep = |t: &str| -> Vec<String> {
        split_lines(t)
            .into_iter()
            .map(|l| {
                if options.trim_trailing_whitespace {
                    String::from(l.trim_end())
                } else {
                    String::from(l)
                }
            })
            .collect()
    };
    let a = prep(generated);
    let b = prep(corrected);
    CostReport {
        stats: stats_for(&a, &b),
        options,
    }
}

/// Statistics of a minimal edit script between two line sequences.
pub fn stats_for<T: AsRef<str>>(old: &[T], new: &[T]) -> DiffStats {
    let mut added = 0;
    let mut deleted = 0;
    let mut lcs_length = 0;
    for e in line_diff(old, new) {
        match e {
            Edit::Equal { .. } => lcs_length += 1,
            Edit::Delete { .. } => deleted += 1,
            Edit::Insert { .. } => added += 1,
        }
    }
    DiffStats {
        added,
        deleted,
        cost: added + deleted,
        lcs_length,
    }
}

/// Minimal edit script turning `old` into `new`.
pub fn line_diff<T: AsRef<str>>(old: &[T], new: &[T]) -> Vec<Edit> {
    // intern lines so the inner loops compare integers
    let mut ids: BTreeMap<&str, u32> = BTreeMap::new();
    let mut a = Vec::with_capacity(old.len());
    let mut b = Vec::with_capacity(new.len());
    for (lines, out) in [(old, &mut a), (new, &mut b)] {
        for line in lines {
            let next = ids.len() as u32;
            out.push(*ids.entry(line.as_ref()).or_insert(next));
        }
    }
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    diff_range(&a, &b, 0, 0, &mut out);
    out
}

fn diff_range(a: &[u32], b: &[u32], a_off: usize, b_off: usize, out: &mut Vec<Edit>) {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    for i in 0..prefix {
        out.push(Edit::Equal { old: a_off + i, new: b_off + i });
    }
    let a = &a[prefix..];
    let b = &b[prefix..];
    let (a_off, b_off) = (a_off + prefix, b_off + prefix);

    let suffix = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let a_mid = &a[..a.len() - suffix];
    let b_mid = &b[..b.len() - suffix];

    if a_mid.is_empty() {
        out.extend((0..b_mid.len()).map(|j| Edit::Insert { new: b_off + j }));
    } else if b_mid.is_empty() {
        out.extend((0..a_mid.len()).map(|i| Edit::Delete { old: a_off + i }));
    } else if let Some((x, y)) = middle_snake(a_mid, b_mid) {
        diff_range(&a_mid[..x], &b_mid[..y], a_off, b_off, out);
        diff_range(&a_mid[x..], &b_mid[y..], a_off + x, b_off + y, out);
    } else {
        out.extend((0..a_mid.len()).map(|i| Edit::Delete { old: a_off + i }));
        out.extend((0..b_mid.len()).map(|j| Edit::Insert { new: b_off + j }));
    }

    let (sa, sb) = (a_off + a_mid.len(), b_off + b_mid.len());
    for i in 0..suffix {
        out.push(Edit::Equal { old: sa + i, new: sb + i });
    }
}

/// Finds a split point `(x, y)` on some optimal path by running the greedy
/// search from both ends until the frontiers overlap.
fn middle_snake(a: &[u32], b: &[u32]) -> Option<(usize, usize)> {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let max_d = (n + m + 1) / 2;
    let v_offset = max_d;
    let v_len = (2 * max_d + 2) as usize;
    let mut v1 = vec![-1isize; v_len];
    let mut v2 = vec![-1isize; v_len];
    v1[(v_offset + 1) as usize] = 0;
    v2[(v_offset + 1) as usize] = 0;
    let delta = n - m;
    // with an odd delta the forward search detects the overlap
    let front = delta % 2 != 0;
    let (mut k1_start, mut k1_end, mut k2_start, mut k2_end) = (0isize, 0isize, 0isize, 0isize);

    for d in 0..max_d {
        let mut k1 = -d + k1_start;
        while k1 <= d - k1_end {
            let k1_off = (v_offset + k1) as usize;
            let mut x1 = if k1 == -d || (k1 != d && v1[k1_off - 1] < v1[k1_off + 1]) {
                v1[k1_off + 1]
            } else {
                v1[k1_off - 1] + 1
            };
            let mut y1 = x1 - k1;
            while x1 < n && y1 < m && a[x1 as usize] == b[y1 as usize] {
                x1 += 1;
                y1 += 1;
            }
            v1[k1_off] = x1;
            if x1 > n {
                k1_end += 2;
            } else if y1 > m {
                k1_start += 2;
            } else if front {
                let k2_off = v_offset + delta - k1;
                if k2_off >= 0 && (k2_off as usize) < v_len && v2[k2_off as usize] != -1 {
                    let x2 = n - v2[k2_off as usize];
                    if x1 >= x2 {
                        return Some((x1 as usize, y1 as usize));
                    }
                }
            }
            k1 += 2;
        }

        let mut k2 = -d + k2_start;
        while k2 <= d - k2_end {
            let k2_off = (v_offset + k2) as usize;
            let mut x2 = if k2 == -d || (k2 != d && v2[k2_off - 1] < v2[k2_off + 1]) {
                v2[k2_off + 1]
            } else {
                v2[k2_off - 1] + 1
            };
            let mut y2 = x2 - k2;
            while x2 < n && y2 < m && a[(n - x2 - 1) as usize] == b[(m - y2 - 1) as usize] {
                x2 += 1;
                y2 += 1;
            }
            v2[k2_off] = x2;
            if x2 > n {
                k2_end += 2;
            } else if y2 > m {
                k2_start += 2;
            } else if !front {
                let k1_off = v_offset + delta - k2;
                if k1_off >= 0 && (k1_off as usize) < v_len && v1[k1_off as usize] != -1 {
                    let x1 = v1[k1_off as usize];
                    let y1 = v_offset + x1 - k1_off;
                    if x1 >= n - x2 {
                        return Some((x1 as usize, y1 as usize));
                    }
                }
            }
            k2 += 2;
        }
    }
    None
}
