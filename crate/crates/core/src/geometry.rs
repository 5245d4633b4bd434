//! Box overlap, RLE masks, point containment and face-to-person linking.

use serde::Serialize;
use thiserror::Error;

use crate::model::{BBox, Point, RleMask};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("SUM_MISMATCH: run lengths sum to {got}, mask has {expected} pixels")]
    SumMismatch { got: u64, expected: u64 },
}

/// Dense binary image stored column-major: `(row, col)` lives at `col * height + row`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    height: u32,
    width: u32,
    data: Vec<bool>,
}

impl Bitmap {
    pub fn new(height: u32, width: u32) -> Self {
        Bitmap {
            height,
            width,
            data: vec![false; height as usize * width as usize],
        }
    }

    /// Panics if `data.len() != height * width`.
    pub fn from_column_major(height: u32, width: u32, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), height as usize * width as usize, "bitmap size mismatch");
        Bitmap { height, width, data }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn as_column_major(&self) -> &[bool] {
        &self.data
    }

    fn index(&self, row: u32, col: u32) -> usize {
        col as usize * self.height as usize + row as usize
    }

    pub fn get(&self, row: u32, col: u32) -> bool {
        row < self.height && col < self.width && self.data[self.index(row, col)]
    }

    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        let i = self.index(row, col);
        self.data[i] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }
}

/// Intersection area over union area, using continuous coordinates.
///
/// A zero union (two degenerate boxes) scores 0.
pub fn box_iou(a: &BBox, b: &BBox) -> f64 {
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

pub fn intersection_area(a: &BBox, b: &BBox) -> f64 {
    let w = a.x1.min(b.x1) - a.x0.max(b.x0);
    let h = a.y1.min(b.y1) - a.y0.max(b.y0);
    if w <= 0.0 || h <= 0.0 {
        0.0
    } else {
        w * h
    }
}

pub fn rle_decode(mask: &RleMask) -> Result<Bitmap, GeometryError> {
    let expected = mask.pixel_count();
    let got = mask.counts_sum();
    if got != expected {
        return Err(GeometryError::SumMismatch { got, expected });
    }
    let mut data = Vec::with_capacity(expected as usize);
    let mut value = false;
    for &run in &mask.counts {
        data.extend(std::iter::repeat_n(value, run as usize));
        value = !value;
    }
    Ok(Bitmap {
        height: mask.height,
        width: mask.width,
        data,
    })
}

/// Encodes a bitmap with minimal runs. Only the leading background run may be zero.
pub fn rle_encode(bitmap: &Bitmap) -> RleMask {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for &v in &bitmap.data {
        if v != current {
            counts.push(run);
            run = 0;
            current = v;
        }
        run += 1;
    }
    counts.push(run);
    RleMask {
        height: bitmap.height,
        width: bitmap.width,
        counts,
    }
}

/// True iff the pixel at `(floor(y), floor(x))` is foreground.
///
/// Walks the runs directly instead of decoding; points outside the image
/// are never inside.
pub fn point_in_mask(p: &Point, mask: &RleMask) -> bool {
    if !p.is_finite() || p.x < 0.0 || p.y < 0.0 {
        return false;
    }
    let (col, row) = (p.x.floor(), p.y.floor());
    if col >= f64::from(mask.width) || row >= f64::from(mask.height) {
        return false;
    }
    let target = col as u64 * u64::from(mask.height) + row as u64;
    let mut start = 0u64;
    for (k, &run) in mask.counts.iter().enumerate() {
        let end = start + u64::from(run);
        if target < end {
            return k % 2 == 1;
        }
        start = end;
    }
    false
}

/// Links a face to the person box that covers the largest fraction of the face.
///
/// The ratio is `intersection / face area`. Ties go to the smaller person
/// box, then the lower index. Returns `None` when no person overlaps.
pub fn link_face_to_person(face: &BBox, persons: &[BBox]) -> Option<usize> {
    let face_area = face.area();
    if face_area <= 0.0 {
        return None;
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, person) in persons.iter().enumerate() {
        let ratio = intersection_area(face, person) / face_area;
        if ratio <= 0.0 {
            continue;
        }
        let area = person.area();
        let better = match best {
            None => true,
            Some((_, r, a)) => ratio > r || (ratio == r && area < a),
        };
        if better {
            best = Some((i, ratio, area));
        }
    }
    best.map(|(i, _, _)| i)
}

/// Pairwise IoU between predictions (rows) and ground truths (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IouMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl IouMatrix {
    /// Builds a matrix from row-major values. Panics on a size mismatch.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix size mismatch");
        IouMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

pub fn iou_matrix(preds: &[BBox], gts: &[BBox]) -> IouMatrix {
    let data = preds
        .iter()
        .flat_map(|p| gts.iter().map(move |g| box_iou(p, g)))
        .collect();
    IouMatrix {
        rows: preds.len(),
        cols: gts.len(),
        data,
    }
}
