//! Evaluation toolkit for multi-instance referring-expression detection.
//!
//! A referring expression names zero or more persons in an image. Models
//! answer with boxes, points, or an explicit rejection, and are scored by
//! recall, precision and DensityF1 averaged over IoU thresholds 0.50..0.95,
//! plus a rejection score on expressions that match nobody.
//!
//! Modules:
//! - [`model`]: domain types and dataset validation
//! - [`geometry`]: IoU, RLE masks, point containment, face linking
//! - [`matching`]: one-to-one maximum matching and its exhaustive check
//! - [`metrics`]: per-referring and aggregated scores
//! - [`adapters`]: retrieval-index output and prediction-line parsing
//! - [`datastats`]: dataset statistics
//! - [`synth`]: seeded synthetic benchmarks and baselines
//! - [`io`], [`report`]: files and rendering

pub mod adapters;
pub mod datastats;
pub mod geometry;
pub mod io;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod report;
pub mod synth;

pub use geometry::{box_iou, iou_matrix, IouMatrix};
pub use matching::{match_at_threshold, MatchResult, IOU_THRESHOLDS};
pub use metrics::{aggregate, EvalOptions, EvalReport, PrTriple};
pub use model::{BBox, ImageRecord, Payload, Point, PredictionSet, RleMask, Subset};
