//! Parsers that turn model output into [`PredictionSet`]s.
//!
//! Two inputs are supported: the retrieval-index grammar
//! `<g>text</g><o><obj1><obj3></o>`, whose indices point into the image's
//! person boxes, and the line-delimited prediction interchange format.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{normalize_prediction, BBox, ModelError, Payload, Point, PredictionSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdapterError {
    #[error("MALFORMED_OUTPUT: {0}")]
    MalformedOutput(String),
    #[error("BAD_INDEX_TOKEN: '{0}'")]
    BadIndexToken(String),
    #[error("INDEX_OUT_OF_RANGE: index {index} but only {len} boxes")]
    IndexOutOfRange { index: usize, len: usize },
}

impl AdapterError {
    pub fn code(&self) -> &'static str {
        match self {
            AdapterError::MalformedOutput(_) => "MALFORMED_OUTPUT",
            AdapterError::BadIndexToken(_) => "BAD_INDEX_TOKEN",
            AdapterError::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalOutput {
    pub referring_text: String,
    pub indices: Vec<usize>,
}

fn find_once(text: &str, token: &str) -> Result<usize, AdapterError> {
    let mut it = text.match_indices(token);
    let (pos, _) = it
        .next()
        .ok_or_else(|| AdapterError::MalformedOutput(format!("missing {token}")))?;
    if it.next().is_some() {
        return Err(AdapterError::MalformedOutput(format!("{token} appears more than once")));
    }
    Ok(pos)
}

/// Parses `<g>referring</g><o><objK>...</o>`.
///
/// Each delimiter must appear exactly once and in that order. Text outside
/// the delimiters, including between `</g>` and `<o>`, is ignored. The
/// object span must be a plain concatenation of `<objK>` tokens.
pub fn parse_retrieval_output(text: &str) -> Result<RetrievalOutput, AdapterError> {
    let g_open = find_once(text, "<g>")?;
    let g_close = find_once(text, "</g>")?;
    let o_open = find_once(text, "<o>")?;
    let o_close = find_once(text, "</o>")?;
    if !(g_open < g_close && g_close < o_open && o_open < o_close) {
        return Err(AdapterError::MalformedOutput("delimiters are mis-nested".into()));
    }
    let referring_text = text[g_open + 3..g_close].to_string();
    let mut span = &text[o_open + 3..o_close];
    let mut indices = Vec::new();
    while !span.is_empty() {
        let rest = span
            .strip_prefix("<obj")
            .ok_or_else(|| AdapterError::MalformedOutput(format!("unexpected text in object span: '{span}'")))?;
        let end = rest
            .find('>')
            .ok_or_else(|| AdapterError::MalformedOutput("unterminated object token".into()))?;
        let digits = &rest[..end];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(AdapterError::BadIndexToken(format!("<obj{digits}>")));
        }
        let index = digits
            .parse::<usize>()
            .map_err(|_| AdapterError::BadIndexToken(format!("<obj{digits}>")))?;
        indices.push(index);
        span = &rest[end + 1..];
    }
    Ok(RetrievalOutput {
        referring_text,
        indices,
    })
}

/// Inverse of [`parse_retrieval_output`].
pub fn render_retrieval_output(r: &RetrievalOutput) -> String {
    let mut out = format!("<g>{}</g><o>", r.referring_text);
    for i in &r.indices {
        out.push_str(&format!("<obj{i}>"));
    }
    out.push_str("</o>");
    out
}

/// Maps object indices onto boxes, dropping repeated indices.
pub fn resolve_indices(
    referring_id: &str,
    r: &RetrievalOutput,
    input_boxes: &[BBox],
) -> Result<PredictionSet, AdapterError> {
    let mut seen = HashSet::new();
    let mut boxes = Vec::with_capacity(r.indices.len());
    for &index in &r.indices {
        let b = input_boxes.get(index).ok_or(AdapterError::IndexOutOfRange {
            index,
            len: input_boxes.len(),
        })?;
        if seen.insert(index) {
            boxes.push(*b);
        }
    }
    Ok(if boxes.is_empty() {
        PredictionSet::rejection(referring_id)
    } else {
        PredictionSet::boxes(referring_id, boxes)
    })
}

/// Wire shape of one prediction line.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionWire {
    referring_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boxes: Option<Vec<BBox>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rejection: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw: Option<String>,
}

/// A parsed prediction line: either ready to score or raw decoder text that
/// still needs the image's boxes.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictionRecord {
    Ready(PredictionSet),
    Raw { referring_id: String, raw: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SchemaError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SCHEMA_ERROR at line {}: {}", self.line, self.message)
    }
}

impl SchemaError {
    pub fn code(&self) -> &'static str {
        "SCHEMA_ERROR"
    }
}

pub fn parse_prediction_line(line: &str) -> Result<PredictionRecord, String> {
    let wire: PredictionWire = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let present = usize::from(wire.boxes.is_some())
        + usize::from(wire.points.is_some())
        + usize::from(wire.rejection.is_some())
        + usize::from(wire.raw.is_some());
    if present != 1 {
        return Err(format!(
            "record for '{}' must carry exactly one of boxes, points, rejection, raw (found {present})",
            wire.referring_id
        ));
    }
    let id = wire.referring_id;
    let set = if let Some(boxes) = wire.boxes {
        PredictionSet::boxes(id, boxes)
    } else if let Some(points) = wire.points {
        PredictionSet::points(id, points)
    } else if let Some(raw) = wire.raw {
        return Ok(PredictionRecord::Raw { referring_id: id, raw });
    } else if wire.rejection == Some(true) {
        PredictionSet::rejection(id)
    } else {
        return Err("rejection must be true when present".into());
    };
    normalize_prediction(set)
        .map(PredictionRecord::Ready)
        .map_err(|e: ModelError| e.to_string())
}

/// Parses prediction lines, reporting any failure with its 1-based line number.
/// Blank lines are skipped.
pub fn parse_prediction_records(content: &str) -> Result<Vec<PredictionRecord>, SchemaError> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_prediction_line(l).map_err(|message| SchemaError { line: i + 1, message }))
        .collect()
}

/// Parses box/point/rejection records; raw decoder records are a schema
/// error here since they need the dataset to resolve.
pub fn parse_box_predictions(content: &str) -> Result<Vec<PredictionSet>, SchemaError> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| match parse_prediction_line(l) {
            Ok(PredictionRecord::Ready(p)) => Ok(p),
            Ok(PredictionRecord::Raw { .. }) => Err(SchemaError {
                line: i + 1,
                message: "raw decoder output needs the dataset's person boxes".into(),
            }),
            Err(message) => Err(SchemaError { line: i + 1, message }),
        })
        .collect()
}

/// Serializes one prediction as an interchange line (no trailing newline).
pub fn prediction_to_line(p: &PredictionSet) -> String {
    let mut wire = PredictionWire {
        referring_id: p.referring_id.clone(),
        ..Default::default()
    };
    match &p.payload {
        Payload::Boxes(b) => wire.boxes = Some(b.clone()),
        Payload::Points(pts) => wire.points = Some(pts.clone()),
        Payload::Rejection => wire.rejection = Some(true),
    }
    serde_json::to_string(&wire).expect("prediction serializes")
}
