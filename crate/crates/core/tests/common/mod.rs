//! Reference implementations used to cross-check the library.
//!
//! Everything here works on integer boxes with exact integer arithmetic, so
//! threshold tests are decided without floating point.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, RngExt};
use refbench_core::BBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntBox {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl IntBox {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        assert!(x0 <= x1 && y0 <= y1);
        IntBox { x0, y0, x1, y1 }
    }

    pub fn area(&self) -> i64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn to_bbox(self) -> BBox {
        BBox::new(self.x0 as f64, self.y0 as f64, self.x1 as f64, self.y1 as f64).unwrap()
    }

    pub fn random<R: Rng>(rng: &mut R, w: i64, h: i64) -> Self {
        let (a, b) = (rng.random_range(0..=w), rng.random_range(0..=w));
        let (c, d) = (rng.random_range(0..=h), rng.random_range(0..=h));
        IntBox::new(a.min(b), c.min(d), a.max(b), c.max(d))
    }

    /// Moves each corner by up to `d` pixels, keeping the box ordered.
    pub fn nudged<R: Rng>(&self, rng: &mut R, d: i64) -> Self {
        let mut s = || rng.random_range(-d..=d);
        let (x0, x1) = (self.x0 + s(), self.x1 + s());
        let (y0, y1) = (self.y0 + s(), self.y1 + s());
        IntBox::new(x0.min(x1), y0.min(y1), x0.max(x1), y0.max(y1))
    }
}

pub fn intersection(a: &IntBox, b: &IntBox) -> i64 {
    let w = (a.x1.min(b.x1) - a.x0.max(b.x0)).max(0);
    let h = (a.y1.min(b.y1) - a.y0.max(b.y0)).max(0);
    w * h
}

/// True when IoU(a, b) >= k / 20.
pub fn clears(a: &IntBox, b: &IntBox, k: i64) -> bool {
    let i = intersection(a, b);
    let u = a.area() + b.area() - i;
    u > 0 && 20 * i >= k * u
}

/// Thresholds 0.50, 0.55, ..., 0.95 as twentieths.
pub const THRESHOLD_TWENTIETHS: [i64; 10] = [10, 11, 12, 13, 14, 15, 16, 17, 18, 19];

/// Largest number of disjoint row/column pairs with `edge(row, col)`, by
/// trying every assignment of each row to a free column or to nothing.
pub fn enumerate_max_assignment(rows: usize, cols: usize, edge: &dyn Fn(usize, usize) -> bool) -> usize {
    fn go(
        r: usize,
        used: u64,
        rows: usize,
        cols: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        memo: &mut HashMap<(usize, u64), usize>,
    ) -> usize {
        if r == rows {
            return 0;
        }
        if let Some(&v) = memo.get(&(r, used)) {
            return v;
        }
        let mut best = go(r + 1, used, rows, cols, edge, memo);
        for c in 0..cols {
            if used & (1 << c) == 0 && edge(r, c) {
                best = best.max(1 + go(r + 1, used | (1 << c), rows, cols, edge, memo));
            }
        }
        memo.insert((r, used), best);
        best
    }
    assert!(cols <= 63);
    go(0, 0, rows, cols, edge, &mut HashMap::new())
}

/// Exact threshold-averaged recall, precision and DensityF1 of one referring.
///
/// With `m` matches out of `g` gts and `p` predictions, F1 reduces to
/// `2m / (g + p)` and the penalty to `min(count, p) / p`, so each score is a
/// single ratio of integers divided once.
pub fn oracle_scores(preds: &[IntBox], gts: &[IntBox], count: usize) -> (f64, f64, f64) {
    let (g, p) = (gts.len() as i64, preds.len() as i64);
    if p == 0 {
        return (0.0, 0.0, 0.0);
    }
    let total: i64 = THRESHOLD_TWENTIETHS
        .iter()
        .map(|&k| enumerate_max_assignment(preds.len(), gts.len(), &|i, j| clears(&preds[i], &gts[j], k)) as i64)
        .sum();
    let d_num = (count as i64).min(p);
    let recall = total as f64 / (10 * g) as f64;
    let precision = total as f64 / (10 * p) as f64;
    let df1 = (2 * total * d_num) as f64 / (10 * (g + p) * p) as f64;
    (recall, precision, df1)
}
