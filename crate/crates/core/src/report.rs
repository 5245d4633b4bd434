//! Text rendering of evaluation reports and instance-count buckets.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::metrics::EvalReport;
use crate::synth::{InstanceBucket, POOLED_BUCKET};

/// Rounds to one decimal, halves away from zero.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

pub fn fmt_pct(x: f64) -> String {
    format!("{:.1}", round1(x))
}

fn title_case(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

/// Renders the report as a fixed-width table: one column group (R, P, DF1)
/// per subset, then the average and the rejection score.
pub fn render_table(report: &EvalReport, method: &str) -> String {
    const CELL: usize = 7;
    let label_w = method.len().max("Method".len()) + 2;
    let mut groups: Vec<(String, [String; 3])> = report
        .per_subset
        .iter()
        .map(|s| {
            (
                title_case(s.subset.as_str()),
                [fmt_pct(s.recall), fmt_pct(s.precision), fmt_pct(s.density_f1)],
            )
        })
        .collect();
    if let Some(a) = report.average {
        groups.push((
            "Average".into(),
            [fmt_pct(a.recall), fmt_pct(a.precision), fmt_pct(a.density_f1)],
        ));
    }

    let mut head = format!("{:<label_w$}", "Method");
    let mut sub = format!("{:<label_w$}", "");
    let mut row = format!("{method:<label_w$}");
    for (name, cells) in &groups {
        head.push_str(&format!("{:<w$}", name, w = 3 * CELL));
        for (h, v) in ["R", "P", "DF1"].iter().zip(cells) {
            sub.push_str(&format!("{h:>CELL$}"));
            row.push_str(&format!("{v:>CELL$}"));
        }
    }
    head.push_str("  Rejection");
    sub.push_str(&format!("{:>11}", "Score"));
    let rejection = report.rejection_score.map_or_else(|| "-".to_string(), fmt_pct);
    row.push_str(&format!("{rejection:>11}"));

    let mut out = String::new();
    for line in [head, sub, row] {
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}

pub fn bucket_label(count: usize) -> String {
    if count >= POOLED_BUCKET {
        format!("{POOLED_BUCKET}+")
    } else {
        count.to_string()
    }
}

pub fn render_buckets(buckets: &BTreeMap<usize, InstanceBucket>) -> String {
    let mut out = format!(
        "{:<10}{:>12}{:>10}{:>11}\n",
        "instances", "referrings", "recall", "precision"
    );
    for (k, b) in buckets {
        let _ = writeln!(
            out,
            "{:<10}{:>12}{:>10}{:>11}",
            bucket_label(*k),
            b.n_referrings,
            fmt_pct(100.0 * b.recall),
            fmt_pct(100.0 * b.precision)
        );
    }
    out
}

/// Full-precision delimiter-separated bucket rows, recall and precision as fractions.
pub fn buckets_csv(buckets: &BTreeMap<usize, InstanceBucket>) -> String {
    let mut out = String::from("instances,referrings,recall,precision\n");
    for (k, b) in buckets {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            bucket_label(*k),
            b.n_referrings,
            b.recall,
            b.precision
        );
    }
    out
}
