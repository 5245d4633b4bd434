//! Seeded synthetic benchmarks and reference baselines.
//!
//! Person boxes are placed with pairwise IoU below 0.5, so every matching
//! has a unique answer, and each person carries a rectangular mask equal to
//! its box. A single ChaCha stream seeded from the config drives all
//! choices.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datastats::DatasetStats;
use crate::geometry::box_iou;
use crate::metrics::{score_referrings, EvalOptions, MetricsError, RatioMean};
use crate::model::{BBox, ImageRecord, PersonRecord, PredictionSet, ReferringRecord, RleMask, Subset};

/// Placement attempts per person before giving up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 2000;

/// Buckets at or above this instance count are pooled.
pub const POOLED_BUCKET: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("INVALID_CONFIG: {0}")]
    InvalidConfig(String),
    #[error(
        "CONFIG_INFEASIBLE: could not place person {person} of image {image} after {MAX_PLACEMENT_ATTEMPTS} attempts"
    )]
    ConfigInfeasible { image: usize, person: usize },
}

impl SynthError {
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::InvalidConfig(_) => "INVALID_CONFIG",
            SynthError::ConfigInfeasible { .. } => "CONFIG_INFEASIBLE",
        }
    }
}

/// Inclusive `[min, max]` range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    pub fn new(min: usize, max: usize) -> Self {
        CountRange { min, max }
    }

    pub fn exactly(n: usize) -> Self {
        CountRange { min: n, max: n }
    }
}

impl From<[usize; 2]> for CountRange {
    fn from(v: [usize; 2]) -> Self {
        CountRange { min: v[0], max: v[1] }
    }
}

impl From<CountRange> for [usize; 2] {
    fn from(r: CountRange) -> Self {
        [r.min, r.max]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_images: usize,
    pub persons_per_image: CountRange,
    pub gts_per_ref: CountRange,
    pub refs_per_image: CountRange,
    /// `(width, height)` in pixels.
    pub image_size: (u32, u32),
    /// Default perturbation for the jittered-oracle baseline, as a fraction
    /// of box size.
    pub jitter: f64,
    pub rejection_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            n_images: 100,
            persons_per_image: CountRange::new(4, 10),
            gts_per_ref: CountRange::new(1, 4),
            refs_per_image: CountRange::new(2, 6),
            image_size: (640, 480),
            jitter: 0.0,
            rejection_fraction: 0.15,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        for (name, r) in [
            ("persons_per_image", self.persons_per_image),
            ("gts_per_ref", self.gts_per_ref),
            ("refs_per_image", self.refs_per_image),
        ] {
            if r.min > r.max {
                return bad(format!("{name} range [{}, {}] is empty", r.min, r.max));
            }
        }
        if self.gts_per_ref.min == 0 {
            return bad("gts_per_ref must start at 1".into());
        }
        if self.persons_per_image.min < self.gts_per_ref.max {
            return bad(format!(
                "persons_per_image minimum {} is below gts_per_ref maximum {}",
                self.persons_per_image.min, self.gts_per_ref.max
            ));
        }
        if self.image_size.0 < 2 || self.image_size.1 < 2 {
            return bad("image_size must be at least 2x2".into());
        }
        if !(0.0..=1.0).contains(&self.rejection_fraction) {
            return bad("rejection_fraction must lie in [0, 1]".into());
        }
        if !self.jitter.is_finite() || self.jitter < 0.0 {
            return bad("jitter must be a finite non-negative number".into());
        }
        Ok(())
    }
}

/// Tallies recorded while generating, for checking computed statistics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GenerationLedger {
    pub seed: u64,
    pub n_images: usize,
    pub n_referrings: usize,
    pub n_rejection: usize,
    pub total_persons: usize,
    pub total_gt_boxes: usize,
    pub total_tokens: usize,
    pub total_width: u64,
    pub total_height: u64,
    pub vocabulary: BTreeSet<String>,
    pub persons_per_image_hist: BTreeMap<usize, usize>,
    pub boxes_per_ref_hist: BTreeMap<usize, usize>,
    pub referrings_per_subset: BTreeMap<Subset, usize>,
    pub gt_boxes_per_subset: BTreeMap<Subset, usize>,
}

const ADJECTIVES: [&str; 12] = [
    "tall", "short", "smiling", "seated", "standing", "young", "older", "bearded", "masked", "running", "waving",
    "laughing",
];
const GARMENTS: [&str; 8] = ["red", "blue", "striped", "white", "black", "green", "yellow", "plaid"];
const NOUNS: [&str; 6] = ["person", "man", "woman", "child", "people", "players"];
const PLACES: [&str; 6] = ["left", "right", "center", "front", "back", "middle"];

/// Builds a templated referring text and returns its words.
fn referring_words(rng: &mut ChaCha8Rng, subset: Subset) -> Vec<&'static str> {
    let pick = |rng: &mut ChaCha8Rng, words: &[&'static str]| words[rng.random_range(0..words.len())];
    let mut words = Vec::new();
    words.push("the");
    if rng.random_bool(0.5) {
        words.push(pick(rng, &ADJECTIVES));
    }
    words.push(pick(rng, &NOUNS));
    match subset {
        Subset::Attribute => words.extend(["wearing", pick(rng, &GARMENTS)]),
        Subset::Position => words.extend(["on", "the", pick(rng, &PLACES)]),
        Subset::Interaction => words.extend(["holding", "hands"]),
        Subset::Reasoning => words.extend(["not", pick(rng, &ADJECTIVES)]),
        Subset::Celebrity => words.extend(["named", "celebrity"]),
        Subset::Rejection => words.extend(["riding", "a", "dragon"]),
    }
    words
}

/// Column-major RLE of the pixel rectangle `[x0, x1) x [y0, y1)`.
pub fn rect_rle(height: u32, width: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> RleMask {
    let mut counts: Vec<u32> = vec![0];
    let mut push = |fg: bool, len: u32| {
        if len == 0 {
            return;
        }
        let last_fg = counts.len().is_multiple_of(2);
        if last_fg == fg {
            *counts.last_mut().unwrap() += len;
        } else {
            counts.push(len);
        }
    };
    let (x0, x1) = (x0.min(width), x1.min(width));
    let (y0, y1) = (y0.min(height), y1.min(height));
    if x0 >= x1 || y0 >= y1 {
        push(false, height * width);
    } else {
        push(false, x0 * height);
        for _ in x0..x1 {
            push(false, y0);
            push(true, y1 - y0);
            push(false, height - y1);
        }
        push(false, (width - x1) * height);
    }
    RleMask { height, width, counts }
}

fn place_person(rng: &mut ChaCha8Rng, placed: &[BBox], w: u32, h: u32) -> Option<(u32, u32, u32, u32)> {
    let min_w = (w / 16).max(1);
    let max_w = (w / 5).max(min_w);
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let bw = rng.random_range(min_w..=max_w);
        let bh = ((bw as f64 * rng.random_range(1.5..2.5)) as u32).clamp(1, h);
        let x0 = rng.random_range(0..=w - bw);
        let y0 = rng.random_range(0..=h - bh);
        let b = BBox::new(f64::from(x0), f64::from(y0), f64::from(x0 + bw), f64::from(y0 + bh)).ok()?;
        if placed.iter().all(|p| box_iou(p, &b) < 0.5) {
            return Some((x0, y0, x0 + bw, y0 + bh));
        }
    }
    None
}

/// Generates a dataset and the ledger of what was generated.
pub fn generate(cfg: &SynthConfig) -> Result<(Vec<ImageRecord>, GenerationLedger), SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (w, h) = cfg.image_size;
    let mut ledger = GenerationLedger {
        seed: cfg.seed,
        ..Default::default()
    };
    let mut images = Vec::with_capacity(cfg.n_images);

    for i in 0..cfg.n_images {
        let image_id = format!("synth-{}-{i:05}", cfg.seed);
        let n_persons = rng.random_range(cfg.persons_per_image.min..=cfg.persons_per_image.max);
        let mut boxes: Vec<BBox> = Vec::with_capacity(n_persons);
        let mut persons = Vec::with_capacity(n_persons);
        for k in 0..n_persons {
            let (x0, y0, x1, y1) =
                place_person(&mut rng, &boxes, w, h).ok_or(SynthError::ConfigInfeasible { image: i, person: k })?;
            let bbox =
                BBox::new(f64::from(x0), f64::from(y0), f64::from(x1), f64::from(y1)).expect("integer box is valid");
            boxes.push(bbox);
            persons.push(PersonRecord {
                bbox,
                mask: Some(rect_rle(h, w, x0, y0, x1, y1)),
            });
        }

        let n_refs = rng.random_range(cfg.refs_per_image.min..=cfg.refs_per_image.max);
        let mut referrings = Vec::with_capacity(n_refs);
        for k in 0..n_refs {
            let subset = if rng.random_bool(cfg.rejection_fraction) {
                Subset::Rejection
            } else {
                Subset::REFERRING[rng.random_range(0..Subset::REFERRING.len())]
            };
            let gt_indices = if subset.is_rejection() {
                Vec::new()
            } else {
                let n_gt = rng.random_range(cfg.gts_per_ref.min..=cfg.gts_per_ref.max);
                let mut idx = sample(&mut rng, n_persons, n_gt).into_vec();
                idx.sort_unstable();
                idx
            };
            let words = referring_words(&mut rng, subset);

            ledger.n_referrings += 1;
            ledger.total_tokens += words.len();
            ledger.vocabulary.extend(words.iter().map(|w| w.to_string()));
            *ledger.referrings_per_subset.entry(subset).or_insert(0) += 1;
            *ledger.gt_boxes_per_subset.entry(subset).or_insert(0) += gt_indices.len();
            if subset.is_rejection() {
                ledger.n_rejection += 1;
            } else {
                ledger.total_gt_boxes += gt_indices.len();
                *ledger.boxes_per_ref_hist.entry(gt_indices.len()).or_insert(0) += 1;
            }

            referrings.push(ReferringRecord {
                id: format!("{image_id}-r{k}"),
                text: words.join(" "),
                subset,
                gt_indices,
            });
        }

        ledger.n_images += 1;
        ledger.total_persons += n_persons;
        ledger.total_width += u64::from(w);
        ledger.total_height += u64::from(h);
        *ledger.persons_per_image_hist.entry(n_persons).or_insert(0) += 1;
        images.push(ImageRecord {
            image_id,
            width: w,
            height: h,
            persons,
            referrings,
        });
    }
    Ok((images, ledger))
}

/// Fields where computed statistics disagree with the generation ledger.
///
/// Averages are compared as the exact ratios of the ledger's integer tallies.
pub fn ledger_mismatches(ledger: &GenerationLedger, stats: &DatasetStats) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |name: &str, ok: bool, detail: String| {
        if !ok {
            out.push(format!("{name}: {detail}"));
        }
    };
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    let non_rejection = ledger.n_referrings - ledger.n_rejection;

    check(
        "n_images",
        stats.n_images == ledger.n_images,
        format!("{} vs {}", stats.n_images, ledger.n_images),
    );
    check(
        "n_referrings",
        stats.n_referrings == ledger.n_referrings,
        format!("{} vs {}", stats.n_referrings, ledger.n_referrings),
    );
    check(
        "n_rejection",
        stats.n_rejection == ledger.n_rejection,
        format!("{} vs {}", stats.n_rejection, ledger.n_rejection),
    );
    check(
        "total_tokens",
        stats.total_tokens == ledger.total_tokens,
        format!("{} vs {}", stats.total_tokens, ledger.total_tokens),
    );
    check(
        "vocab_size",
        stats.vocab_size == ledger.vocabulary.len(),
        format!("{} vs {}", stats.vocab_size, ledger.vocabulary.len()),
    );
    let expected = ratio(ledger.total_persons, ledger.n_images);
    check(
        "avg_persons_per_image",
        stats.avg_persons_per_image == expected,
        format!("{:?} vs {expected:?}", stats.avg_persons_per_image),
    );
    let expected = ratio(ledger.total_gt_boxes, non_rejection);
    check(
        "avg_boxes_per_ref",
        stats.avg_boxes_per_ref == expected,
        format!("{:?} vs {expected:?}", stats.avg_boxes_per_ref),
    );
    let expected = ratio(ledger.total_tokens, ledger.n_referrings);
    check(
        "avg_words_per_ref",
        stats.avg_words_per_ref == expected,
        format!("{:?} vs {expected:?}", stats.avg_words_per_ref),
    );
    let expected = (ledger.n_images > 0).then(|| {
        (
            ledger.total_width as f64 / ledger.n_images as f64,
            ledger.total_height as f64 / ledger.n_images as f64,
        )
    });
    check(
        "avg_image_size",
        stats.avg_image_size == expected,
        format!("{:?} vs {expected:?}", stats.avg_image_size),
    );
    check(
        "persons_per_image_hist",
        stats.persons_per_image_hist == ledger.persons_per_image_hist,
        "histograms differ".into(),
    );
    check(
        "boxes_per_ref_hist",
        stats.boxes_per_ref_hist == ledger.boxes_per_ref_hist,
        "histograms differ".into(),
    );
    for (subset, &n) in &ledger.referrings_per_subset {
        let got = stats.per_subset.get(subset);
        let gt = ledger.gt_boxes_per_subset.get(subset).copied().unwrap_or(0);
        check(
            &format!("per_subset.{subset}"),
            got.is_some_and(|s| s.n_referrings == n && s.total_gt_boxes == gt && s.avg_boxes_per_ref == ratio(gt, n)),
            format!("expected {n} referrings with {gt} boxes"),
        );
    }
    check(
        "per_subset",
        stats.per_subset.len() == ledger.referrings_per_subset.len(),
        "subset sets differ".into(),
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// Every person box for every referring.
    AllPersons,
    /// Exactly the ground-truth boxes.
    Oracle,
    /// The first `k` ground-truth boxes in `gt_indices` order.
    TopK(usize),
    /// Reject everything.
    Empty,
    /// Ground-truth boxes with each corner moved by up to `jitter` times the
    /// box extent, drawn from a stream seeded by `seed`.
    JitteredOracle { jitter: f64, seed: u64 },
}

fn prediction(id: &str, boxes: Vec<BBox>) -> PredictionSet {
    if boxes.is_empty() {
        PredictionSet::rejection(id)
    } else {
        PredictionSet::boxes(id, boxes)
    }
}

fn jitter_box(rng: &mut ChaCha8Rng, b: &BBox, jitter: f64, w: f64, h: f64) -> BBox {
    let (bw, bh) = (b.width(), b.height());
    let mut d = || rng.random_range(-1.0..=1.0) * jitter;
    let (x0, x1) = (b.x0 + d() * bw, b.x1 + d() * bw);
    let (y0, y1) = (b.y0 + d() * bh, b.y1 + d() * bh);
    BBox {
        x0: x0.min(x1),
        y0: y0.min(y1),
        x1: x0.max(x1),
        y1: y0.max(y1),
    }
    .clamped(w, h)
}

/// One prediction per referring, in dataset order.
pub fn run_baseline(kind: BaselineKind, dataset: &[ImageRecord]) -> Vec<PredictionSet> {
    let mut rng = match kind {
        BaselineKind::JitteredOracle { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut out = Vec::new();
    for image in dataset {
        for r in &image.referrings {
            let boxes = match kind {
                BaselineKind::AllPersons => image.person_boxes(),
                BaselineKind::Oracle => image.gt_boxes(r),
                BaselineKind::TopK(k) => image.gt_boxes(r).into_iter().take(k).collect(),
                BaselineKind::Empty => Vec::new(),
                BaselineKind::JitteredOracle { jitter, .. } => {
                    let rng = rng.as_mut().expect("seeded above");
                    let (w, h) = (f64::from(image.width), f64::from(image.height));
                    image
                        .gt_boxes(r)
                        .iter()
                        .map(|b| jitter_box(rng, b, jitter, w, h))
                        .collect()
                }
            };
            out.push(prediction(&r.id, boxes));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceBucket {
    pub recall: f64,
    pub precision: f64,
    pub n_referrings: usize,
}

/// Mean threshold-averaged recall and precision grouped by ground-truth
/// count. Counts of [`POOLED_BUCKET`] and above share one bucket.
pub fn recall_by_instance_count(
    dataset: &[ImageRecord],
    predictions: &[PredictionSet],
    options: &EvalOptions,
) -> Result<BTreeMap<usize, InstanceBucket>, MetricsError> {
    let (mut scores, _) = score_referrings(dataset, predictions, options)?;
    scores.sort_by(|a, b| a.referring_id.cmp(&b.referring_id));
    let mut buckets: BTreeMap<usize, (RatioMean, RatioMean)> = BTreeMap::new();
    for s in &scores {
        if let Some((recall, precision)) = s.ratios {
            let e = buckets.entry(s.gt_count.min(POOLED_BUCKET)).or_default();
            e.0.add(recall);
            e.1.add(precision);
        }
    }
    Ok(buckets
        .into_iter()
        .map(|(k, (r, p))| {
            (
                k,
                InstanceBucket {
                    recall: r.mean().unwrap_or(0.0),
                    precision: p.mean().unwrap_or(0.0),
                    n_referrings: r.count() as usize,
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rle_decode, rle_encode, Bitmap};
    use crate::model::validate_dataset;

    fn small_cfg(seed: u64) -> SynthConfig {
        SynthConfig {
            seed,
            n_images: 10,
            ..Default::default()
        }
    }

    #[test]
    fn rect_rle_matches_bitmap_encoding() {
        for &(h, w, x0, y0, x1, y1) in &[
            (5, 4, 1, 1, 3, 4),
            (5, 4, 0, 0, 4, 5),
            (5, 4, 0, 0, 2, 5),
            (5, 4, 2, 0, 4, 3),
            (3, 3, 1, 1, 1, 2),
            (6, 7, 6, 5, 7, 6),
        ] {
            let mut b = Bitmap::new(h, w);
            for c in x0..x1 {
                for r in y0..y1 {
                    b.set(r, c, true);
                }
            }
            let got = rect_rle(h, w, x0, y0, x1, y1);
            assert_eq!(got, rle_encode(&b), "{:?}", (h, w, x0, y0, x1, y1));
            assert_eq!(rle_decode(&got).unwrap(), b);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let (a, la) = generate(&small_cfg(1)).unwrap();
        let (b, lb) = generate(&small_cfg(1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        let (c, _) = generate(&small_cfg(2)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_data_is_valid_and_separated() {
        let (ds, _) = generate(&small_cfg(3)).unwrap();
        assert!(validate_dataset(&ds).is_empty());
        for image in &ds {
            let boxes = image.person_boxes();
            for i in 0..boxes.len() {
                for j in i + 1..boxes.len() {
                    assert!(box_iou(&boxes[i], &boxes[j]) < 0.5);
                }
                let m = image.persons[i].mask.as_ref().unwrap();
                assert_eq!(m.area() as f64, boxes[i].area());
            }
        }
    }

    #[test]
    fn stats_match_ledger() {
        let (ds, ledger) = generate(&small_cfg(8)).unwrap();
        let stats = crate::datastats::compute_stats(&ds);
        assert_eq!(ledger_mismatches(&ledger, &stats), Vec::<String>::new());
        let mut off = ledger.clone();
        off.total_tokens += 1;
        off.vocabulary.insert("zebra".into());
        assert_eq!(ledger_mismatches(&off, &stats).len(), 3);
    }

    #[test]
    fn fixed_counts_are_honoured() {
        let cfg = SynthConfig {
            persons_per_image: CountRange::exactly(4),
            gts_per_ref: CountRange::exactly(2),
            ..small_cfg(4)
        };
        let (ds, ledger) = generate(&cfg).unwrap();
        assert_eq!(ledger.total_persons as f64 / ledger.n_images as f64, 4.0);
        for r in ds.iter().flat_map(|i| &i.referrings) {
            if !r.subset.is_rejection() {
                assert_eq!(r.gt_indices.len(), 2);
            }
        }
    }

    #[test]
    fn config_errors() {
        let cfg = SynthConfig {
            persons_per_image: CountRange::new(2, 5),
            gts_per_ref: CountRange::new(1, 3),
            ..Default::default()
        };
        assert_eq!(generate(&cfg).unwrap_err().code(), "INVALID_CONFIG");
        let cfg = SynthConfig {
            rejection_fraction: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SynthConfig {
            image_size: (4, 4),
            persons_per_image: CountRange::exactly(40),
            ..Default::default()
        };
        assert_eq!(generate(&cfg).unwrap_err().code(), "CONFIG_INFEASIBLE");
    }

    #[test]
    fn config_json_uses_range_pairs() {
        let cfg: SynthConfig =
            serde_json::from_str(r#"{"seed":9,"persons_per_image":[6,6],"image_size":[320,240]}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.persons_per_image, CountRange::exactly(6));
        assert_eq!(cfg.image_size, (320, 240));
        assert_eq!(cfg.n_images, SynthConfig::default().n_images);
    }

    #[test]
    fn baselines() {
        let (ds, _) = generate(&small_cfg(5)).unwrap();
        let n_refs: usize = ds.iter().map(|i| i.referrings.len()).sum();
        for kind in [
            BaselineKind::AllPersons,
            BaselineKind::Oracle,
            BaselineKind::TopK(1),
            BaselineKind::Empty,
            BaselineKind::JitteredOracle { jitter: 0.05, seed: 1 },
        ] {
            assert_eq!(run_baseline(kind, &ds).len(), n_refs);
        }
        assert!(run_baseline(BaselineKind::Empty, &ds)
            .iter()
            .all(PredictionSet::is_rejection));
        let zero = run_baseline(BaselineKind::JitteredOracle { jitter: 0.0, seed: 77 }, &ds);
        assert_eq!(zero, run_baseline(BaselineKind::Oracle, &ds));
        let a = run_baseline(BaselineKind::JitteredOracle { jitter: 0.1, seed: 3 }, &ds);
        assert_eq!(
            a,
            run_baseline(BaselineKind::JitteredOracle { jitter: 0.1, seed: 3 }, &ds)
        );
        assert_ne!(a, zero);
    }

    #[test]
    fn buckets_for_simple_predictors() {
        let cfg = SynthConfig {
            gts_per_ref: CountRange::new(1, 5),
            persons_per_image: CountRange::new(5, 8),
            n_images: 60,
            ..small_cfg(6)
        };
        let (ds, _) = generate(&cfg).unwrap();
        let opts = EvalOptions::default();
        let oracle = recall_by_instance_count(&ds, &run_baseline(BaselineKind::Oracle, &ds), &opts).unwrap();
        let top1 = recall_by_instance_count(&ds, &run_baseline(BaselineKind::TopK(1), &ds), &opts).unwrap();
        let empty = recall_by_instance_count(&ds, &run_baseline(BaselineKind::Empty, &ds), &opts).unwrap();
        assert_eq!(oracle.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        for n in 1..=5 {
            assert_eq!((oracle[&n].recall, oracle[&n].precision), (1.0, 1.0));
            assert_eq!(top1[&n].recall, 1.0 / n as f64);
            assert_eq!(top1[&n].precision, 1.0);
            assert_eq!((empty[&n].recall, empty[&n].precision), (0.0, 0.0));
        }
    }
}
