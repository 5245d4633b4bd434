//! One-to-one assignment of predictions to ground truths.
//!
//! The assignment is a maximum-cardinality bipartite matching. It is seeded
//! greedily from edges ordered by priority (descending IoU, then pred index,
//! then gt index) and completed with augmenting paths, so the output is
//! deterministic and independent of how the caller orders its work.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::IouMatrix;

/// The ten IoU thresholds 0.50, 0.55, ..., 0.95.
///
/// Written as literals so that `iou >= t` compares against the nearest
/// double of each decimal value.
pub const IOU_THRESHOLDS: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

/// Largest smaller-side dimension [`brute_force_match`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("SIZE_LIMIT: smaller matrix dimension {0} exceeds {BRUTE_FORCE_LIMIT}")]
    SizeLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    /// `(pred index, gt index)` pairs sorted by pred index.
    pub pairs: Vec<(usize, usize)>,
    pub threshold: f64,
}

impl MatchResult {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Maximum matching on a bipartite graph given as an edge list.
///
/// `edges` must be in priority order; the greedy seed takes them in that
/// order and augmenting paths then explore each row's edges in the same
/// order. Returns `(row, col)` pairs sorted by row.
pub fn maximum_matching(rows: usize, cols: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut row_match: Vec<Option<usize>> = vec![None; rows];
    let mut col_match: Vec<Option<usize>> = vec![None; cols];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); rows];

    for &(r, c) in edges {
        adjacency[r].push(c);
        if row_match[r].is_none() && col_match[c].is_none() {
            row_match[r] = Some(c);
            col_match[c] = Some(r);
        }
    }

    // A free row with no augmenting path now never gains one later, so one
    // pass over the free rows reaches maximum cardinality.
    let mut visited = vec![false; cols];
    for r in 0..rows {
        if row_match[r].is_some() || adjacency[r].is_empty() {
            continue;
        }
        visited.fill(false);
        augment(r, &adjacency, &mut row_match, &mut col_match, &mut visited);
    }

    row_match
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| (r, c)))
        .collect()
}

fn augment(
    row: usize,
    adjacency: &[Vec<usize>],
    row_match: &mut [Option<usize>],
    col_match: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &c in &adjacency[row] {
        if visited[c] {
            continue;
        }
        visited[c] = true;
        let free = match col_match[c] {
            None => true,
            Some(other) => augment(other, adjacency, row_match, col_match, visited),
        };
        if free {
            row_match[row] = Some(c);
            col_match[c] = Some(row);
            return true;
        }
    }
    false
}

/// Maximum one-to-one matching over pairs with `iou >= threshold`.
pub fn match_at_threshold(m: &IouMatrix, threshold: f64) -> MatchResult {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            if v >= threshold {
                edges.push((i, j, v));
            }
        }
    }
    // stable sort keeps (i, j) order among equal IoUs
    edges.sort_by(|a, b| b.2.total_cmp(&a.2));
    let order: Vec<(usize, usize)> = edges.iter().map(|&(i, j, _)| (i, j)).collect();
    MatchResult {
        pairs: maximum_matching(m.rows(), m.cols(), &order),
        threshold,
    }
}

/// Exact maximum matching cardinality by exhaustive search.
///
/// Walks the larger side one vertex at a time, tracking every reachable set
/// of used vertices on the smaller side. Shares no code with
/// [`maximum_matching`] and exists to check it.
pub fn brute_force_match(m: &IouMatrix, threshold: f64) -> Result<usize, MatchError> {
    let (rows, cols) = (m.rows(), m.cols());
    let small = rows.min(cols);
    if small > BRUTE_FORCE_LIMIT {
        return Err(MatchError::SizeLimit(small));
    }
    if small == 0 {
        return Ok(0);
    }
    let transpose = rows < cols;
    let large = rows.max(cols);
    let edge = |l: usize, s: usize| {
        let v = if transpose { m.get(s, l) } else { m.get(l, s) };
        v >= threshold
    };

    let mut reachable = vec![false; 1 << small];
    reachable[0] = true;
    for l in 0..large {
        let mut next = reachable.clone();
        for (used, &ok) in reachable.iter().enumerate() {
            if !ok {
                continue;
            }
            for s in 0..small {
                if used & (1 << s) == 0 && edge(l, s) {
                    next[used | (1 << s)] = true;
                }
            }
        }
        reachable = next;
    }
    Ok(reachable
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .map(|(used, _)| used.count_ones() as usize)
        .max()
        .unwrap_or(0))
}
