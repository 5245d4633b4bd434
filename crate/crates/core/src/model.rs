//! Shared domain types and dataset validation.
//!
//! Boxes are corner-form `(x0, y0, x1, y1)` in absolute pixels. Masks are
//! uncompressed column-major run-length encodings that start with a
//! background run. Everything here is plain data; nothing is mutated after
//! ingest.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Axis-aligned rectangle in absolute pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, ModelError> {
        let b = BBox { x0, y0, x1, y1 };
        b.check()?;
        Ok(b)
    }

    /// Builds a box from `(x, y, w, h)`. Negative extents are rejected.
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Result<Self, ModelError> {
        Self::new(x, y, x + w, y + h)
    }

    pub fn to_xywh(&self) -> [f64; 4] {
        [self.x0, self.y0, self.x1 - self.x0, self.y1 - self.y0]
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_finite(&self) -> bool {
        self.x0.is_finite() && self.y0.is_finite() && self.x1.is_finite() && self.y1.is_finite()
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !self.is_finite() {
            return Err(ModelError::InvalidCoordinate);
        }
        if self.x0 > self.x1 || self.y0 > self.y1 {
            return Err(ModelError::InvertedBox);
        }
        Ok(())
    }

    pub fn within(&self, width: f64, height: f64) -> bool {
        self.x0 >= 0.0 && self.y0 >= 0.0 && self.x1 <= width && self.y1 <= height
    }

    /// Clamps all corners into `[0, width] x [0, height]`.
    pub fn clamped(&self, width: f64, height: f64) -> BBox {
        BBox {
            x0: self.x0.clamp(0.0, width),
            y0: self.y0.clamp(0.0, height),
            x1: self.x1.clamp(0.0, width),
            y1: self.y1.clamp(0.0, height),
        }
    }

    pub fn scaled(&self, factor: f64) -> BBox {
        BBox {
            x0: self.x0 * factor,
            y0: self.y0 * factor,
            x1: self.x1 * factor,
            y1: self.y1 * factor,
        }
    }

    pub fn center(&self) -> Point {
        Point {
            x: (self.x0 + self.x1) / 2.0,
            y: (self.y0 + self.y1) / 2.0,
        }
    }
}

impl TryFrom<[f64; 4]> for BBox {
    type Error = ModelError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point { x: v[0], y: v[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Run-length encoded binary mask.
///
/// Runs alternate background/foreground starting with background, walking
/// pixels in column-major order (pixel `(row, col)` is at `col * height + row`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RleWire", into = "RleWire")]
pub struct RleMask {
    pub height: u32,
    pub width: u32,
    pub counts: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RleWire {
    size: [u32; 2],
    counts: Vec<u32>,
}

impl From<RleWire> for RleMask {
    fn from(w: RleWire) -> Self {
        RleMask {
            height: w.size[0],
            width: w.size[1],
            counts: w.counts,
        }
    }
}

impl From<RleMask> for RleWire {
    fn from(m: RleMask) -> Self {
        RleWire {
            size: [m.height, m.width],
            counts: m.counts,
        }
    }
}

impl RleMask {
    pub fn pixel_count(&self) -> u64 {
        u64::from(self.height) * u64::from(self.width)
    }

    pub fn counts_sum(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| u64::from(c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonRecord {
    #[serde(rename = "box")]
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<RleMask>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Attribute,
    Position,
    Interaction,
    Reasoning,
    Celebrity,
    Rejection,
}

impl Subset {
    /// Canonical order, used for report columns.
    pub const ALL: [Subset; 6] = [
        Subset::Attribute,
        Subset::Position,
        Subset::Interaction,
        Subset::Reasoning,
        Subset::Celebrity,
        Subset::Rejection,
    ];

    pub const REFERRING: [Subset; 5] = [
        Subset::Attribute,
        Subset::Position,
        Subset::Interaction,
        Subset::Reasoning,
        Subset::Celebrity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Subset::Attribute => "attribute",
            Subset::Position => "position",
            Subset::Interaction => "interaction",
            Subset::Reasoning => "reasoning",
            Subset::Celebrity => "celebrity",
            Subset::Rejection => "rejection",
        }
    }

    pub fn is_rejection(&self) -> bool {
        matches!(self, Subset::Rejection)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Subset {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subset::ALL
            .into_iter()
            .find(|v| v.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| ModelError::UnknownSubset(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferringRecord {
    pub id: String,
    pub text: String,
    pub subset: Subset,
    pub gt_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub persons: Vec<PersonRecord>,
    pub referrings: Vec<ReferringRecord>,
}

impl ImageRecord {
    pub fn person_boxes(&self) -> Vec<BBox> {
        self.persons.iter().map(|p| p.bbox).collect()
    }

    /// Ground-truth boxes of a referring, in `gt_indices` order.
    /// Out-of-range indices are skipped; run [`validate_dataset`] first.
    pub fn gt_boxes(&self, referring: &ReferringRecord) -> Vec<BBox> {
        referring
            .gt_indices
            .iter()
            .filter_map(|&i| self.persons.get(i).map(|p| p.bbox))
            .collect()
    }

    /// Clamps person boxes to the image bounds and returns how many changed.
    pub fn clamp_person_boxes(&mut self) -> usize {
        let (w, h) = (f64::from(self.width), f64::from(self.height));
        let mut changed = 0;
        for p in &mut self.persons {
            let c = p.bbox.clamped(w, h);
            if c != p.bbox {
                p.bbox = c;
                changed += 1;
            }
        }
        changed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Boxes(Vec<BBox>),
    Points(Vec<Point>),
    Rejection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub referring_id: String,
    pub payload: Payload,
}

impl PredictionSet {
    pub fn boxes(referring_id: impl Into<String>, boxes: Vec<BBox>) -> Self {
        PredictionSet {
            referring_id: referring_id.into(),
            payload: Payload::Boxes(boxes),
        }
    }

    pub fn points(referring_id: impl Into<String>, points: Vec<Point>) -> Self {
        PredictionSet {
            referring_id: referring_id.into(),
            payload: Payload::Points(points),
        }
    }

    pub fn rejection(referring_id: impl Into<String>) -> Self {
        PredictionSet {
            referring_id: referring_id.into(),
            payload: Payload::Rejection,
        }
    }

    pub fn is_rejection(&self) -> bool {
        matches!(self.payload, Payload::Rejection)
    }

    /// Number of predicted instances; zero for a rejection.
    pub fn predicted_count(&self) -> usize {
        match &self.payload {
            Payload::Boxes(b) => b.len(),
            Payload::Points(p) => p.len(),
            Payload::Rejection => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("INVALID_COORDINATE: non-finite coordinate")]
    InvalidCoordinate,
    #[error("INVALID_BOX: box corners are inverted (x0 > x1 or y0 > y1)")]
    InvertedBox,
    #[error("UNKNOWN_SUBSET: '{0}'")]
    UnknownSubset(String),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::InvalidCoordinate => "INVALID_COORDINATE",
            ModelError::InvertedBox => "INVALID_BOX",
            ModelError::UnknownSubset(_) => "UNKNOWN_SUBSET",
        }
    }
}

/// Canonicalizes a prediction: empty box or point lists become a rejection.
///
/// Duplicate boxes are kept as-is.
pub fn normalize_prediction(raw: PredictionSet) -> Result<PredictionSet, ModelError> {
    let payload = match raw.payload {
        Payload::Boxes(boxes) => {
            for b in &boxes {
                b.check()?;
            }
            if boxes.is_empty() {
                Payload::Rejection
            } else {
                Payload::Boxes(boxes)
            }
        }
        Payload::Points(points) => {
            if points.iter().any(|p| !p.is_finite()) {
                return Err(ModelError::InvalidCoordinate);
            }
            if points.is_empty() {
                Payload::Rejection
            } else {
                Payload::Points(points)
            }
        }
        Payload::Rejection => Payload::Rejection,
    };
    Ok(PredictionSet {
        referring_id: raw.referring_id,
        payload,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    BadDimensions,
    InvalidBox,
    BoxOutOfBounds,
    MaskDimensionMismatch,
    MaskSumMismatch,
    NoPersons,
    OutOfRangeGt,
    DuplicateGt,
    RejectionHasGt,
    MissingGt,
    DuplicateImageId,
    DuplicateReferringId,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::BadDimensions => "BAD_DIMENSIONS",
            ViolationCode::InvalidBox => "INVALID_BOX",
            ViolationCode::BoxOutOfBounds => "BOX_OUT_OF_BOUNDS",
            ViolationCode::MaskDimensionMismatch => "MASK_DIMENSION_MISMATCH",
            ViolationCode::MaskSumMismatch => "MASK_SUM_MISMATCH",
            ViolationCode::NoPersons => "NO_PERSONS",
            ViolationCode::OutOfRangeGt => "OUT_OF_RANGE_GT",
            ViolationCode::DuplicateGt => "DUPLICATE_GT",
            ViolationCode::RejectionHasGt => "REJECTION_HAS_GT",
            ViolationCode::MissingGt => "MISSING_GT",
            ViolationCode::DuplicateImageId => "DUPLICATE_IMAGE_ID",
            ViolationCode::DuplicateReferringId => "DUPLICATE_REFERRING_ID",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub image_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub referring_id: Option<String>,
    pub code: ViolationCode,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.referring_id {
            Some(r) => write!(
                f,
                "[{}] image {} referring {}: {}",
                self.code, self.image_id, r, self.detail
            ),
            None => write!(f, "[{}] image {}: {}", self.code, self.image_id, self.detail),
        }
    }
}

/// Checks every type invariant and reports each violation as data.
///
/// An empty result means the dataset is well formed. The function is pure;
/// calling it twice yields identical reports.
pub fn validate_dataset(dataset: &[ImageRecord]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut image_ids = HashSet::new();
    let mut referring_ids = HashSet::new();

    for image in dataset {
        let img = |code, detail: String| Violation {
            image_id: image.image_id.clone(),
            referring_id: None,
            code,
            detail,
        };
        if !image_ids.insert(image.image_id.as_str()) {
            out.push(img(
                ViolationCode::DuplicateImageId,
                "image id appears more than once".into(),
            ));
        }
        if image.width == 0 || image.height == 0 {
            out.push(img(
                ViolationCode::BadDimensions,
                format!("image size {}x{} must be positive", image.width, image.height),
            ));
        }
        let (w, h) = (f64::from(image.width), f64::from(image.height));
        for (k, person) in image.persons.iter().enumerate() {
            if let Err(e) = person.bbox.check() {
                out.push(img(ViolationCode::InvalidBox, format!("person {k}: {e}")));
            } else if !person.bbox.within(w, h) {
                out.push(img(
                    ViolationCode::BoxOutOfBounds,
                    format!("person {k} box exceeds image bounds"),
                ));
            }
            if let Some(mask) = &person.mask {
                if mask.height != image.height || mask.width != image.width {
                    out.push(img(
                        ViolationCode::MaskDimensionMismatch,
                        format!(
                            "person {k} mask is {}x{}, image is {}x{}",
                            mask.height, mask.width, image.height, image.width
                        ),
                    ));
                }
                if mask.counts_sum() != mask.pixel_count() {
                    out.push(img(
                        ViolationCode::MaskSumMismatch,
                        format!(
                            "person {k} mask counts sum to {}, expected {}",
                            mask.counts_sum(),
                            mask.pixel_count()
                        ),
                    ));
                }
            }
        }
        let needs_persons = image.referrings.iter().any(|r| !r.subset.is_rejection());
        if needs_persons && image.persons.is_empty() {
            out.push(img(
                ViolationCode::NoPersons,
                "image has non-rejection referrings but no persons".into(),
            ));
        }

        for r in &image.referrings {
            let rv = |code, detail: String| Violation {
                image_id: image.image_id.clone(),
                referring_id: Some(r.id.clone()),
                code,
                detail,
            };
            if !referring_ids.insert(r.id.as_str()) {
                out.push(rv(
                    ViolationCode::DuplicateReferringId,
                    "referring id appears more than once".into(),
                ));
            }
            let mut seen = HashSet::new();
            for &i in &r.gt_indices {
                if i >= image.persons.len() {
                    out.push(rv(
                        ViolationCode::OutOfRangeGt,
                        format!("gt index {i} but image has {} persons", image.persons.len()),
                    ));
                }
                if !seen.insert(i) {
                    out.push(rv(ViolationCode::DuplicateGt, format!("gt index {i} repeated")));
                }
            }
            match (r.subset.is_rejection(), r.gt_indices.is_empty()) {
                (true, false) => out.push(rv(
                    ViolationCode::RejectionHasGt,
                    format!("rejection referring lists {} gt indices", r.gt_indices.len()),
                )),
                (false, true) => out.push(rv(
                    ViolationCode::MissingGt,
                    format!("{} referring has no gt indices", r.subset),
                )),
                _ => {}
            }
        }
    }
    out
}
