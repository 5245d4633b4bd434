//! Recall, precision and DensityF1 for multi-instance referring detection.
//!
//! Per referring, recall and precision come from a one-to-one matching at
//! each of the ten IoU thresholds. F1 at each threshold is scaled by a
//! density penalty `min(1, persons / predicted)` and the three quantities
//! are averaged over thresholds. Subsets average their referrings, and the
//! overall row averages the subsets without weighting.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{iou_matrix, point_in_mask};
use crate::matching::{match_at_threshold, maximum_matching, IOU_THRESHOLDS};
use crate::model::{BBox, ImageRecord, Payload, Point, PredictionSet, ReferringRecord, RleMask, Subset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("ZERO_PREDICTIONS: density penalty needs at least one prediction")]
    ZeroPredictions,
    #[error("EMPTY_GT: referring has no ground-truth instances")]
    EmptyGt,
    #[error("DIMENSION_MISMATCH: ground-truth masks differ in size")]
    DimensionMismatch,
    #[error("EMPTY_INPUT: no predictions to score")]
    EmptyInput,
    #[error("UNKNOWN_REFERRING_ID: prediction for '{0}' matches no referring in the dataset")]
    UnknownReferringId(String),
    #[error("DUPLICATE_PREDICTION: more than one prediction for '{0}'")]
    DuplicatePrediction(String),
    #[error("MISSING_MASK: referring '{referring_id}' needs a mask for person {person}")]
    MissingMask { referring_id: String, person: usize },
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::ZeroPredictions => "ZERO_PREDICTIONS",
            MetricsError::EmptyGt => "EMPTY_GT",
            MetricsError::DimensionMismatch => "DIMENSION_MISMATCH",
            MetricsError::EmptyInput => "EMPTY_INPUT",
            MetricsError::UnknownReferringId(_) => "UNKNOWN_REFERRING_ID",
            MetricsError::DuplicatePrediction(_) => "DUPLICATE_PREDICTION",
            MetricsError::MissingMask { .. } => "MISSING_MASK",
        }
    }
}

/// Per-referring scores, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PrTriple {
    pub recall: f64,
    pub precision: f64,
    pub density_f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct DensityPenalty(f64);

impl DensityPenalty {
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// `min(1, count / predicted_count)`.
pub fn density_penalty(count: usize, predicted_count: usize) -> Result<DensityPenalty, MetricsError> {
    if predicted_count == 0 {
        return Err(MetricsError::ZeroPredictions);
    }
    Ok(DensityPenalty((count as f64 / predicted_count as f64).min(1.0)))
}

/// Harmonic mean of recall and precision; 0 when both are 0.
pub fn f1_score(recall: f64, precision: f64) -> f64 {
    if recall + precision == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// What the density penalty divides by the predicted count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityNumerator {
    /// Every person in the image.
    #[default]
    ImagePersons,
    /// Only the referring's own ground-truth instances.
    ReferringGt,
}

/// Non-negative fraction kept as integers so that means over many
/// referrings can be formed with a single rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: usize, den: usize) -> Self {
        Ratio {
            num: num as u64,
            den: den as u64,
        }
    }

    pub fn value(&self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

/// Mean of [`Ratio`]s. When every ratio shares a denominator the result is
/// `sum(num) / (den * count)`, a single correctly rounded division.
#[derive(Debug, Clone, Default)]
pub struct RatioMean {
    by_den: BTreeMap<u64, u64>,
    count: u64,
}

impl RatioMean {
    pub fn add(&mut self, r: Ratio) {
        *self.by_den.entry(r.den).or_insert(0) += r.num;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        if let [(&den, &num)] = self.by_den.iter().collect::<Vec<_>>()[..] {
            if let Some(total) = den.checked_mul(self.count) {
                return Some(if total == 0 { 0.0 } else { num as f64 / total as f64 });
            }
        }
        let sum: f64 = self
            .by_den
            .iter()
            .map(|(&d, &n)| if d == 0 { 0.0 } else { n as f64 / d as f64 })
            .sum();
        Some(sum / self.count as f64)
    }
}

pub fn referring_pr_at_threshold(preds: &[BBox], gts: &[BBox], threshold: f64) -> Result<(f64, f64), MetricsError> {
    if gts.is_empty() {
        return Err(MetricsError::EmptyGt);
    }
    if preds.is_empty() {
        return Ok((0.0, 0.0));
    }
    let matched = match_at_threshold(&iou_matrix(preds, gts), threshold).len() as f64;
    Ok((matched / gts.len() as f64, matched / preds.len() as f64))
}

/// Full breakdown for one referring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferringDetail {
    /// Matched pairs at each entry of [`IOU_THRESHOLDS`] (a single entry for
    /// point predictions).
    pub matched: Vec<usize>,
    /// `(recall, precision, f1)` per matched entry.
    pub per_threshold: Vec<(f64, f64, f64)>,
    /// Threshold-averaged F1 before the density penalty.
    pub mean_f1: f64,
    pub penalty: Option<DensityPenalty>,
    /// Exact threshold-averaged recall and precision.
    pub recall: Ratio,
    pub precision: Ratio,
    pub scores: PrTriple,
}

impl ReferringDetail {
    fn empty(gt_count: usize, levels: usize) -> Self {
        ReferringDetail {
            matched: vec![0; levels],
            per_threshold: vec![(0.0, 0.0, 0.0); levels],
            mean_f1: 0.0,
            penalty: None,
            recall: Ratio::new(0, gt_count),
            precision: Ratio::new(0, 1),
            scores: PrTriple::default(),
        }
    }

    fn from_matches(matched: Vec<usize>, gt_count: usize, predicted: usize, penalty: DensityPenalty) -> Self {
        let per_threshold: Vec<(f64, f64, f64)> = matched
            .iter()
            .map(|&m| {
                let r = m as f64 / gt_count as f64;
                let p = m as f64 / predicted as f64;
                (r, p, f1_score(r, p))
            })
            .collect();
        let levels = matched.len();
        let total: usize = matched.iter().sum();
        let recall = Ratio::new(total, levels * gt_count);
        let precision = Ratio::new(total, levels * predicted);
        let mean_f1 = per_threshold.iter().map(|v| v.2).sum::<f64>() / levels as f64;
        let density_f1 = per_threshold.iter().map(|v| v.2 * penalty.value()).sum::<f64>() / levels as f64;
        ReferringDetail {
            matched,
            per_threshold,
            mean_f1,
            penalty: Some(penalty),
            recall,
            precision,
            scores: PrTriple {
                recall: recall.value(),
                precision: precision.value(),
                density_f1,
            },
        }
    }
}

pub fn referring_detail(preds: &[BBox], gts: &[BBox], density_count: usize) -> Result<ReferringDetail, MetricsError> {
    if gts.is_empty() {
        return Err(MetricsError::EmptyGt);
    }
    if preds.is_empty() {
        return Ok(ReferringDetail::empty(gts.len(), IOU_THRESHOLDS.len()));
    }
    let penalty = density_penalty(density_count, preds.len())?;
    let ious = iou_matrix(preds, gts);
    let matched = IOU_THRESHOLDS
        .iter()
        .map(|&t| match_at_threshold(&ious, t).len())
        .collect();
    Ok(ReferringDetail::from_matches(matched, gts.len(), preds.len(), penalty))
}

/// Threshold-averaged recall, precision and DensityF1 for box predictions.
///
/// `density_count` is the numerator of the density penalty, normally the
/// number of persons in the image. Empty predictions score zero.
pub fn referring_metrics(preds: &[BBox], gts: &[BBox], density_count: usize) -> Result<PrTriple, MetricsError> {
    referring_detail(preds, gts, density_count).map(|d| d.scores)
}

pub fn point_referring_detail(
    points: &[Point],
    gt_masks: &[&RleMask],
    density_count: usize,
) -> Result<ReferringDetail, MetricsError> {
    let first = gt_masks.first().ok_or(MetricsError::EmptyGt)?;
    if gt_masks
        .iter()
        .any(|m| m.height != first.height || m.width != first.width)
    {
        return Err(MetricsError::DimensionMismatch);
    }
    if points.is_empty() {
        return Ok(ReferringDetail::empty(gt_masks.len(), 1));
    }
    let penalty = density_penalty(density_count, points.len())?;
    let edges: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            gt_masks
                .iter()
                .enumerate()
                .filter(move |(_, m)| point_in_mask(p, m))
                .map(move |(j, _)| (i, j))
        })
        .collect();
    let matched = maximum_matching(points.len(), gt_masks.len(), &edges).len();
    Ok(ReferringDetail::from_matches(
        vec![matched],
        gt_masks.len(),
        points.len(),
        penalty,
    ))
}

/// Point-in-mask variant: a point matches a mask it falls inside, one-to-one.
/// Containment has no threshold, so nothing is averaged.
pub fn point_referring_metrics(
    points: &[Point],
    gt_masks: &[&RleMask],
    density_count: usize,
) -> Result<PrTriple, MetricsError> {
    point_referring_detail(points, gt_masks, density_count).map(|d| d.scores)
}

/// Percentage of predictions that reject (predict nothing).
pub fn rejection_score(predictions: &[PredictionSet]) -> Result<f64, MetricsError> {
    if predictions.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let rejected = predictions.iter().filter(|p| p.predicted_count() == 0).count();
    Ok(100.0 * rejected as f64 / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EvalOptions {
    pub density_numerator: DensityNumerator,
    /// Score box predictions by their centers under the point-in-mask rule.
    pub point_eval: bool,
    /// Restrict evaluation to one subset.
    pub subset: Option<Subset>,
}

/// Score of one dataset referring against its prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferringScore {
    pub referring_id: String,
    pub image_id: String,
    pub subset: Subset,
    pub gt_count: usize,
    pub predicted_count: usize,
    pub rejected: bool,
    /// `None` for rejection-subset referrings.
    pub scores: Option<PrTriple>,
    /// Exact recall and precision behind `scores`.
    #[serde(skip)]
    pub ratios: Option<(Ratio, Ratio)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EvalWarning {
    MissingPrediction { referring_id: String },
}

impl std::fmt::Display for EvalWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalWarning::MissingPrediction { referring_id } => {
                write!(f, "no prediction for referring '{referring_id}', scored as rejection")
            }
        }
    }
}

/// Scores every referring in `dataset`, in dataset order.
///
/// Missing predictions count as rejections and produce a warning.
/// Per-referring work runs on the current rayon pool; the result does not
/// depend on the pool size.
pub fn score_referrings(
    dataset: &[ImageRecord],
    predictions: &[PredictionSet],
    options: &EvalOptions,
) -> Result<(Vec<ReferringScore>, Vec<EvalWarning>), MetricsError> {
    let mut by_id: HashMap<&str, &PredictionSet> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if by_id.insert(p.referring_id.as_str(), p).is_some() {
            return Err(MetricsError::DuplicatePrediction(p.referring_id.clone()));
        }
    }
    let mut jobs: Vec<(&ImageRecord, &ReferringRecord)> = Vec::new();
    let mut known = 0usize;
    for image in dataset {
        for r in &image.referrings {
            if by_id.contains_key(r.id.as_str()) {
                known += 1;
            }
            if options.subset.is_none_or(|s| s == r.subset) {
                jobs.push((image, r));
            }
        }
    }
    if known != by_id.len() {
        let ids: std::collections::HashSet<&str> = dataset
            .iter()
            .flat_map(|i| i.referrings.iter().map(|r| r.id.as_str()))
            .collect();
        let mut unknown: Vec<&str> = by_id.keys().copied().filter(|k| !ids.contains(k)).collect();
        unknown.sort_unstable();
        return Err(MetricsError::UnknownReferringId(unknown[0].to_string()));
    }

    let warnings = jobs
        .iter()
        .filter(|(_, r)| !by_id.contains_key(r.id.as_str()))
        .map(|(_, r)| EvalWarning::MissingPrediction {
            referring_id: r.id.clone(),
        })
        .collect();

    let scores = jobs
        .par_iter()
        .map(|(image, r)| score_one(image, r, by_id.get(r.id.as_str()).copied(), options))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((scores, warnings))
}

fn score_one(
    image: &ImageRecord,
    r: &ReferringRecord,
    prediction: Option<&PredictionSet>,
    options: &EvalOptions,
) -> Result<ReferringScore, MetricsError> {
    let payload = prediction.map_or(&Payload::Rejection, |p| &p.payload);
    let predicted_count = prediction.map_or(0, |p| p.predicted_count());
    let mut score = ReferringScore {
        referring_id: r.id.clone(),
        image_id: image.image_id.clone(),
        subset: r.subset,
        gt_count: r.gt_indices.len(),
        predicted_count,
        rejected: predicted_count == 0,
        scores: None,
        ratios: None,
    };
    if r.subset.is_rejection() {
        return Ok(score);
    }
    let density_count = match options.density_numerator {
        DensityNumerator::ImagePersons => image.persons.len(),
        DensityNumerator::ReferringGt => r.gt_indices.len(),
    };
    let detail = match payload {
        Payload::Rejection => ReferringDetail::empty(r.gt_indices.len(), 1),
        Payload::Boxes(boxes) if !options.point_eval => referring_detail(boxes, &image.gt_boxes(r), density_count)?,
        Payload::Boxes(boxes) => {
            let centers: Vec<Point> = boxes.iter().map(BBox::center).collect();
            point_referring_detail(&centers, &gt_masks(image, r)?, density_count)?
        }
        Payload::Points(points) => point_referring_detail(points, &gt_masks(image, r)?, density_count)?,
    };
    score.scores = Some(detail.scores);
    score.ratios = Some((detail.recall, detail.precision));
    Ok(score)
}

fn gt_masks<'a>(image: &'a ImageRecord, r: &ReferringRecord) -> Result<Vec<&'a RleMask>, MetricsError> {
    r.gt_indices
        .iter()
        .map(|&i| {
            image
                .persons
                .get(i)
                .and_then(|p| p.mask.as_ref())
                .ok_or_else(|| MetricsError::MissingMask {
                    referring_id: r.id.clone(),
                    person: i,
                })
        })
        .collect()
}

/// Scores expressed as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreRow {
    pub recall: f64,
    pub precision: f64,
    pub density_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    pub subset: Subset,
    pub recall: f64,
    pub precision: f64,
    pub density_f1: f64,
    pub n_referrings: usize,
}

impl SubsetReport {
    pub fn row(&self) -> ScoreRow {
        ScoreRow {
            recall: self.recall,
            precision: self.precision,
            density_f1: self.density_f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_subset: Vec<SubsetReport>,
    /// Unweighted mean over `per_subset`; absent when no subset was scored.
    pub average: Option<ScoreRow>,
    /// Absent when the evaluated referrings include no rejection subset.
    pub rejection_score: Option<f64>,
    pub n_rejection: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub scores: Vec<ReferringScore>,
    pub warnings: Vec<EvalWarning>,
}

/// Reduces per-referring scores into a report.
///
/// Sums run in referring-id order so that the report is independent of
/// dataset order and of how scoring was scheduled.
pub fn reduce_scores(scores: &[ReferringScore]) -> EvalReport {
    let mut ordered: Vec<&ReferringScore> = scores.iter().collect();
    ordered.sort_by(|a, b| a.referring_id.cmp(&b.referring_id));

    let mut sums: BTreeMap<Subset, (RatioMean, RatioMean, f64)> = BTreeMap::new();
    let (mut n_rejection, mut n_rejected) = (0usize, 0usize);
    for s in ordered {
        match (s.scores, s.ratios) {
            (Some(t), Some((recall, precision))) => {
                let e = sums.entry(s.subset).or_default();
                e.0.add(recall);
                e.1.add(precision);
                e.2 += t.density_f1;
            }
            _ => {
                n_rejection += 1;
                n_rejected += usize::from(s.rejected);
            }
        }
    }
    let per_subset: Vec<SubsetReport> = sums
        .into_iter()
        .map(|(subset, (r, p, d))| {
            let n = r.count() as usize;
            SubsetReport {
                subset,
                recall: 100.0 * r.mean().unwrap_or(0.0),
                precision: 100.0 * p.mean().unwrap_or(0.0),
                density_f1: 100.0 * d / n as f64,
                n_referrings: n,
            }
        })
        .collect();
    let average = (!per_subset.is_empty()).then(|| {
        let k = per_subset.len() as f64;
        ScoreRow {
            recall: per_subset.iter().map(|s| s.recall).sum::<f64>() / k,
            precision: per_subset.iter().map(|s| s.precision).sum::<f64>() / k,
            density_f1: per_subset.iter().map(|s| s.density_f1).sum::<f64>() / k,
        }
    });
    let rejection_score = (n_rejection > 0).then(|| 100.0 * n_rejected as f64 / n_rejection as f64);
    EvalReport {
        per_subset,
        average,
        rejection_score,
        n_rejection,
    }
}

/// Evaluates predictions against a dataset and builds the report.
pub fn aggregate(
    dataset: &[ImageRecord],
    predictions: &[PredictionSet],
    options: &EvalOptions,
) -> Result<Evaluation, MetricsError> {
    let (scores, warnings) = score_referrings(dataset, predictions, options)?;
    Ok(Evaluation {
        report: reduce_scores(&scores),
        scores,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PersonRecord, ReferringRecord};

    #[test]
    fn ratio_mean_single_rounding() {
        let mut m = RatioMean::default();
        assert_eq!(m.mean(), None);
        for _ in 0..7 {
            m.add(Ratio::new(10, 30));
        }
        assert_eq!(m.mean(), Some(1.0 / 3.0));
        assert_eq!(m.count(), 7);
        m.add(Ratio::new(1, 2));
        let expected = (7.0 * (10.0 / 30.0) + 0.5) / 8.0;
        assert!((m.mean().unwrap() - expected).abs() < 1e-15);
        assert_eq!(Ratio::new(0, 0).value(), 0.0);
    }

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn rect_mask(h: u32, w: u32, rows: std::ops::Range<u32>, cols: std::ops::Range<u32>) -> RleMask {
        let mut b = crate::geometry::Bitmap::new(h, w);
        for c in cols {
            for r in rows.clone() {
                b.set(r, c, true);
            }
        }
        crate::geometry::rle_encode(&b)
    }

    #[test]
    fn penalty_cases() {
        assert_eq!(density_penalty(8, 2).unwrap().value(), 1.0);
        assert_eq!(density_penalty(2, 3).unwrap().value(), 2.0 / 3.0);
        assert_eq!(density_penalty(5, 5).unwrap().value(), 1.0);
        assert_eq!(density_penalty(5, 0), Err(MetricsError::ZeroPredictions));
    }

    #[test]
    fn pr_at_threshold_cases() {
        let gts = [
            bx(0.0, 0.0, 10.0, 10.0),
            bx(20.0, 0.0, 30.0, 10.0),
            bx(40.0, 0.0, 50.0, 10.0),
        ];
        assert_eq!(referring_pr_at_threshold(&gts, &gts, 0.95).unwrap(), (1.0, 1.0));
        assert_eq!(referring_pr_at_threshold(&[], &gts, 0.5).unwrap(), (0.0, 0.0));
        assert_eq!(referring_pr_at_threshold(&gts, &[], 0.5), Err(MetricsError::EmptyGt));

        let gt = [bx(0.0, 0.0, 10.0, 10.0)];
        let pred = [bx(0.0, 0.0, 10.0, 6.0)];
        assert_eq!(referring_pr_at_threshold(&pred, &gt, 0.55).unwrap(), (1.0, 1.0));
        assert_eq!(referring_pr_at_threshold(&pred, &gt, 0.65).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn one_gt_three_preds() {
        let gt = [bx(0.0, 0.0, 10.0, 10.0)];
        let preds = [gt[0], bx(50.0, 50.0, 60.0, 60.0), bx(70.0, 70.0, 80.0, 80.0)];
        let d = referring_detail(&preds, &gt, 2).unwrap();
        for &(r, p, f) in &d.per_threshold {
            assert_eq!((r, p), (1.0, 1.0 / 3.0));
            assert!((f - 0.5).abs() < 1e-15);
        }
        assert!((d.scores.recall - 1.0).abs() < 1e-12);
        assert!((d.scores.precision - 1.0 / 3.0).abs() < 1e-12);
        assert!((d.scores.density_f1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn partial_iou_averages_over_thresholds() {
        let t = referring_metrics(&[bx(0.0, 0.0, 10.0, 6.0)], &[bx(0.0, 0.0, 10.0, 10.0)], 1).unwrap();
        assert!((t.recall - 0.3).abs() < 1e-12);
        assert!((t.precision - 0.3).abs() < 1e-12);
        assert!((t.density_f1 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_empty() {
        let gts = [bx(0.0, 0.0, 10.0, 10.0), bx(20.0, 0.0, 30.0, 10.0)];
        let t = referring_metrics(&gts, &gts, 2).unwrap();
        assert_eq!(
            t,
            PrTriple {
                recall: 1.0,
                precision: 1.0,
                density_f1: 1.0
            }
        );
        assert_eq!(referring_metrics(&[], &gts, 2).unwrap(), PrTriple::default());
    }

    #[test]
    fn point_cases() {
        let m = rect_mask(10, 10, 0..5, 0..5);
        let one = point_referring_metrics(&[Point::new(1.5, 2.5)], &[&m], 1).unwrap();
        assert_eq!(
            one,
            PrTriple {
                recall: 1.0,
                precision: 1.0,
                density_f1: 1.0
            }
        );

        let two = point_referring_metrics(&[Point::new(1.5, 2.5), Point::new(3.0, 3.0)], &[&m], 1).unwrap();
        assert_eq!((two.recall, two.precision), (1.0, 0.5));
        assert!((two.density_f1 - 1.0 / 3.0).abs() < 1e-15);

        assert_eq!(point_referring_metrics(&[], &[&m], 1).unwrap(), PrTriple::default());
        assert_eq!(point_referring_metrics(&[], &[], 1), Err(MetricsError::EmptyGt));
        let small = rect_mask(4, 4, 0..2, 0..2);
        assert_eq!(
            point_referring_metrics(&[Point::new(0.0, 0.0)], &[&m, &small], 1),
            Err(MetricsError::DimensionMismatch)
        );
    }

    #[test]
    fn point_matching_is_one_to_one() {
        // overlapping masks; one point lies in both, the other only in the first
        let a = rect_mask(10, 10, 0..10, 0..6);
        let b = rect_mask(10, 10, 0..10, 4..10);
        let pts = [Point::new(5.0, 5.0), Point::new(1.0, 1.0)];
        let t = point_referring_metrics(&pts, &[&a, &b], 2).unwrap();
        assert_eq!((t.recall, t.precision, t.density_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn rejection_cases() {
        let rej: Vec<_> = (0..10).map(|i| PredictionSet::rejection(format!("r{i}"))).collect();
        assert_eq!(rejection_score(&rej).unwrap(), 100.0);
        let boxes: Vec<_> = (0..10)
            .map(|i| PredictionSet::boxes(format!("r{i}"), vec![bx(0.0, 0.0, 1.0, 1.0)]))
            .collect();
        assert_eq!(rejection_score(&boxes).unwrap(), 0.0);
        let mixed: Vec<_> = (0..1000)
            .map(|i| {
                if i < 541 {
                    PredictionSet::rejection(format!("r{i}"))
                } else {
                    PredictionSet::boxes(format!("r{i}"), vec![bx(0.0, 0.0, 1.0, 1.0)])
                }
            })
            .collect();
        assert_eq!(rejection_score(&mixed).unwrap(), 54.1);
        assert_eq!(rejection_score(&[]), Err(MetricsError::EmptyInput));
    }

    fn fixture() -> Vec<ImageRecord> {
        let persons: Vec<PersonRecord> = (0..4)
            .map(|k| {
                let x = 20.0 * k as f64;
                PersonRecord {
                    bbox: bx(x, 0.0, x + 10.0, 20.0),
                    mask: Some(rect_mask(40, 100, 0..20, (20 * k)..(20 * k + 10))),
                }
            })
            .collect();
        let r = |id: &str, subset, gt: Vec<usize>| ReferringRecord {
            id: id.into(),
            text: "someone".into(),
            subset,
            gt_indices: gt,
        };
        vec![ImageRecord {
            image_id: "i0".into(),
            width: 100,
            height: 40,
            persons,
            referrings: vec![
                r("a0", Subset::Attribute, vec![0]),
                r("a1", Subset::Attribute, vec![1, 2]),
                r("p0", Subset::Position, vec![3]),
                r("x0", Subset::Rejection, vec![]),
                r("x1", Subset::Rejection, vec![]),
            ],
        }]
    }

    #[test]
    fn aggregate_two_subsets() {
        let ds = fixture();
        let img = &ds[0];
        let b = |i: usize| img.persons[i].bbox;
        let preds = vec![
            PredictionSet::boxes("a0", vec![b(0)]),
            // one of two found
            PredictionSet::boxes("a1", vec![b(1)]),
            // all four persons for one target
            PredictionSet::boxes("p0", vec![b(0), b(1), b(2), b(3)]),
            PredictionSet::rejection("x0"),
            PredictionSet::boxes("x1", vec![b(0)]),
        ];
        let eval = aggregate(&ds, &preds, &EvalOptions::default()).unwrap();
        assert!(eval.warnings.is_empty());
        let rep = &eval.report;
        assert_eq!(rep.per_subset.len(), 2);
        let att = &rep.per_subset[0];
        assert_eq!(att.subset, Subset::Attribute);
        // a0: (1,1,1); a1: R=1/2 P=1 F1=2/3 D=1
        assert!((att.recall - 75.0).abs() < 1e-9);
        assert!((att.precision - 100.0).abs() < 1e-9);
        assert!((att.density_f1 - 100.0 * (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-9);
        let pos = &rep.per_subset[1];
        // p0: R=1 P=1/4 F1=0.4 D=min(1,4/4)=1
        assert!((pos.recall - 100.0).abs() < 1e-9);
        assert!((pos.precision - 25.0).abs() < 1e-9);
        assert!((pos.density_f1 - 40.0).abs() < 1e-9);
        let avg = rep.average.unwrap();
        assert!((avg.density_f1 - (att.density_f1 + 40.0) / 2.0).abs() < 1e-9);
        assert_eq!(rep.rejection_score, Some(50.0));
        assert_eq!(rep.n_rejection, 2);
    }

    #[test]
    fn aggregate_missing_unknown_duplicate() {
        let ds = fixture();
        let eval = aggregate(&ds, &[PredictionSet::rejection("a0")], &EvalOptions::default()).unwrap();
        assert_eq!(eval.warnings.len(), 4);
        assert_eq!(eval.report.rejection_score, Some(100.0));
        assert_eq!(eval.report.average.unwrap().recall, 0.0);

        let err = aggregate(&ds, &[PredictionSet::rejection("nope")], &EvalOptions::default()).unwrap_err();
        assert_eq!(err, MetricsError::UnknownReferringId("nope".into()));
        assert_eq!(err.code(), "UNKNOWN_REFERRING_ID");
        let dup = [PredictionSet::rejection("a0"), PredictionSet::rejection("a0")];
        assert!(matches!(
            aggregate(&ds, &dup, &EvalOptions::default()),
            Err(MetricsError::DuplicatePrediction(_))
        ));
    }

    #[test]
    fn aggregate_subset_filter_and_numerator() {
        let ds = fixture();
        let b = |i: usize| ds[0].persons[i].bbox;
        let preds = vec![PredictionSet::boxes("p0", vec![b(0), b(1), b(2), b(3)])];
        let opts = EvalOptions {
            subset: Some(Subset::Position),
            ..Default::default()
        };
        let rep = aggregate(&ds, &preds, &opts).unwrap();
        assert_eq!(rep.report.per_subset.len(), 1);
        assert!(rep.warnings.is_empty());
        assert_eq!(rep.report.rejection_score, None);

        let opts = EvalOptions {
            subset: Some(Subset::Position),
            density_numerator: DensityNumerator::ReferringGt,
            ..Default::default()
        };
        let rep = aggregate(&ds, &preds, &opts).unwrap();
        // D = 1/4 on F1 = 0.4
        assert!((rep.report.per_subset[0].density_f1 - 10.0).abs() < 1e-9);
    }

    #[test]
    fn aggregate_point_paths() {
        let ds = fixture();
        let preds = vec![
            PredictionSet::points("a0", vec![Point::new(5.0, 5.0)]),
            PredictionSet::boxes("a1", vec![bx(20.0, 0.0, 30.0, 20.0), bx(40.0, 5.0, 46.0, 9.0)]),
        ];
        let opts = EvalOptions {
            point_eval: true,
            subset: Some(Subset::Attribute),
            ..Default::default()
        };
        let rep = aggregate(&ds, &preds, &opts).unwrap();
        assert_eq!(rep.report.per_subset[0].recall, 100.0);

        let mut no_masks = ds.clone();
        no_masks[0].persons[0].mask = None;
        let err = aggregate(&no_masks, &preds, &opts).unwrap_err();
        assert_eq!(
            err,
            MetricsError::MissingMask {
                referring_id: "a0".into(),
                person: 0
            }
        );
    }
}
