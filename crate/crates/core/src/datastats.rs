//! Dataset statistics: referring counts, vocabulary, boxes per referring and
//! persons per image.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::model::{ImageRecord, Subset};

/// Lowercases, splits on whitespace and trims non-alphanumeric characters
/// from both ends of each token. Interior punctuation such as hyphens and
/// apostrophes is kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetStats {
    pub n_referrings: usize,
    pub total_gt_boxes: usize,
    pub total_tokens: usize,
    pub avg_boxes_per_ref: Option<f64>,
    pub avg_words_per_ref: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub n_images: usize,
    pub n_referrings: usize,
    pub n_rejection: usize,
    pub total_persons: usize,
    pub total_gt_boxes: usize,
    pub total_tokens: usize,
    pub vocab_size: usize,
    pub avg_words_per_ref: Option<f64>,
    /// Over non-rejection referrings.
    pub avg_boxes_per_ref: Option<f64>,
    /// Over all referrings, rejection ones counting zero boxes.
    pub avg_boxes_per_ref_all: Option<f64>,
    pub avg_persons_per_image: Option<f64>,
    /// Componentwise mean `(width, height)`.
    pub avg_image_size: Option<(f64, f64)>,
    pub persons_per_image_hist: BTreeMap<usize, usize>,
    /// Over non-rejection referrings.
    pub boxes_per_ref_hist: BTreeMap<usize, usize>,
    pub per_subset: BTreeMap<Subset, SubsetStats>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_stats(dataset: &[ImageRecord]) -> DatasetStats {
    let mut vocab: HashSet<String> = HashSet::new();
    let mut persons_hist = BTreeMap::new();
    let mut boxes_hist = BTreeMap::new();
    let mut per_subset: BTreeMap<Subset, (usize, usize, usize)> = BTreeMap::new();
    let (mut total_persons, mut total_gt, mut total_tokens) = (0usize, 0usize, 0usize);
    let (mut n_refs, mut n_rejection) = (0usize, 0usize);
    let (mut sum_w, mut sum_h) = (0u64, 0u64);

    for image in dataset {
        total_persons += image.persons.len();
        *persons_hist.entry(image.persons.len()).or_insert(0) += 1;
        sum_w += u64::from(image.width);
        sum_h += u64::from(image.height);
        for r in &image.referrings {
            let tokens = tokenize(&r.text);
            total_tokens += tokens.len();
            n_refs += 1;
            let e = per_subset.entry(r.subset).or_insert((0, 0, 0));
            e.0 += 1;
            e.1 += r.gt_indices.len();
            e.2 += tokens.len();
            vocab.extend(tokens);
            if r.subset.is_rejection() {
                n_rejection += 1;
            } else {
                total_gt += r.gt_indices.len();
                *boxes_hist.entry(r.gt_indices.len()).or_insert(0) += 1;
            }
        }
    }

    let n_images = dataset.len();
    DatasetStats {
        n_images,
        n_referrings: n_refs,
        n_rejection,
        total_persons,
        total_gt_boxes: total_gt,
        total_tokens,
        vocab_size: vocab.len(),
        avg_words_per_ref: ratio(total_tokens, n_refs),
        avg_boxes_per_ref: ratio(total_gt, n_refs - n_rejection),
        avg_boxes_per_ref_all: ratio(total_gt, n_refs),
        avg_persons_per_image: ratio(total_persons, n_images),
        avg_image_size: (n_images > 0).then(|| (sum_w as f64 / n_images as f64, sum_h as f64 / n_images as f64)),
        persons_per_image_hist: persons_hist,
        boxes_per_ref_hist: boxes_hist,
        per_subset: per_subset
            .into_iter()
            .map(|(s, (n, gt, tok))| {
                (
                    s,
                    SubsetStats {
                        n_referrings: n,
                        total_gt_boxes: gt,
                        total_tokens: tok,
                        avg_boxes_per_ref: ratio(gt, n),
                        avg_words_per_ref: ratio(tok, n),
                    },
                )
            })
            .collect(),
    }
}

/// `count,frequency` rows with a header, ascending by count.
pub fn histogram_csv(hist: &BTreeMap<usize, usize>) -> String {
    let mut out = String::from("count,frequency\n");
    for (k, v) in hist {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}
