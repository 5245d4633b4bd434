//! Line-delimited dataset and prediction files.
//!
//! Each line holds one JSON object: an [`ImageRecord`] for dataset files, a
//! prediction record for prediction files. Readers stream line by line and
//! report failures with the 1-based line number.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::adapters::{
    parse_prediction_line, parse_retrieval_output, prediction_to_line, resolve_indices, PredictionRecord, SchemaError,
};
use crate::model::{BBox, ImageRecord, PredictionSet};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("IO_ERROR: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

impl IoError {
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Io(_) => "IO_ERROR",
            IoError::Schema(_) => "SCHEMA_ERROR",
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            IoError::Io(_) => None,
            IoError::Schema(e) => Some(e.line),
        }
    }
}

/// Emitted when person boxes were clamped to the image on ingest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClampWarning {
    pub line: usize,
    pub image_id: String,
    pub boxes_clamped: usize,
}

impl std::fmt::Display for ClampWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "line {}: clamped {} person box(es) of image '{}' to the image bounds",
            self.line, self.boxes_clamped, self.image_id
        )
    }
}

pub fn parse_image_line(line: &str) -> Result<ImageRecord, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

/// A dataset file as read, with the line each image came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub images: Vec<ImageRecord>,
    pub lines: Vec<usize>,
    pub warnings: Vec<ClampWarning>,
}

impl LoadedDataset {
    /// 1-based file line of the image with this id.
    pub fn line_of(&self, image_id: &str) -> Option<usize> {
        self.images
            .iter()
            .position(|i| i.image_id == image_id)
            .map(|k| self.lines[k])
    }
}

/// Reads a dataset file, clamping out-of-bounds person boxes.
pub fn read_dataset<R: BufRead>(reader: R) -> Result<(Vec<ImageRecord>, Vec<ClampWarning>), IoError> {
    load_dataset(reader).map(|d| (d.images, d.warnings))
}

pub fn load_dataset<R: BufRead>(reader: R) -> Result<LoadedDataset, IoError> {
    let mut images = Vec::new();
    let mut lines = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut image = parse_image_line(&line).map_err(|message| SchemaError { line: i + 1, message })?;
        let clamped = image.clamp_person_boxes();
        if clamped > 0 {
            warnings.push(ClampWarning {
                line: i + 1,
                image_id: image.image_id.clone(),
                boxes_clamped: clamped,
            });
        }
        images.push(image);
        lines.push(i + 1);
    }
    Ok(LoadedDataset {
        images,
        lines,
        warnings,
    })
}

pub fn write_dataset<W: Write>(dataset: &[ImageRecord], mut out: W) -> std::io::Result<()> {
    for image in dataset {
        serde_json::to_writer(&mut out, image)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads a prediction file. Raw decoder records are resolved against the
/// person boxes of the image that owns the referring.
pub fn read_predictions<R: BufRead>(reader: R, dataset: &[ImageRecord]) -> Result<Vec<PredictionSet>, IoError> {
    let mut boxes_by_ref: Option<HashMap<&str, Vec<BBox>>> = None;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| SchemaError { line: i + 1, message };
        match parse_prediction_line(&line).map_err(err)? {
            PredictionRecord::Ready(p) => out.push(p),
            PredictionRecord::Raw { referring_id, raw } => {
                let lookup = boxes_by_ref.get_or_insert_with(|| {
                    dataset
                        .iter()
                        .flat_map(|img| {
                            let boxes = img.person_boxes();
                            img.referrings.iter().map(move |r| (r.id.as_str(), boxes.clone()))
                        })
                        .collect()
                });
                let boxes = lookup.get(referring_id.as_str()).ok_or_else(|| {
                    err(format!(
                        "UNKNOWN_REFERRING_ID: raw record for '{referring_id}' matches no referring"
                    ))
                })?;
                let parsed = parse_retrieval_output(&raw).map_err(|e| err(e.to_string()))?;
                out.push(resolve_indices(&referring_id, &parsed, boxes).map_err(|e| err(e.to_string()))?);
            }
        }
    }
    Ok(out)
}

pub fn write_predictions<W: Write>(predictions: &[PredictionSet], mut out: W) -> std::io::Result<()> {
    for p in predictions {
        out.write_all(prediction_to_line(p).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PersonRecord, ReferringRecord, RleMask, Subset};

    fn image() -> ImageRecord {
        ImageRecord {
            image_id: "img-1".into(),
            width: 4,
            height: 3,
            persons: vec![
                PersonRecord {
                    bbox: BBox::new(0.0, 0.0, 2.0, 3.0).unwrap(),
                    mask: Some(RleMask {
                        height: 3,
                        width: 4,
                        counts: vec![0, 6, 6],
                    }),
                },
                PersonRecord {
                    bbox: BBox::new(2.5, 0.125, 4.0, 2.0).unwrap(),
                    mask: None,
                },
            ],
            referrings: vec![
                ReferringRecord {
                    id: "r1".into(),
                    text: "left one".into(),
                    subset: Subset::Position,
                    gt_indices: vec![0],
                },
                ReferringRecord {
                    id: "r2".into(),
                    text: "a unicorn".into(),
                    subset: Subset::Rejection,
                    gt_indices: vec![],
                },
            ],
        }
    }

    #[test]
    fn dataset_wire_format() {
        let line = r#"{"image_id":"a","width":4,"height":3,"persons":[{"box":[0,0,2,3],"mask":{"size":[3,4],"counts":[0,6,6]}}],"referrings":[{"id":"r","text":"t","subset":"attribute","gt_indices":[0]}]}"#;
        let (ds, w) = read_dataset(line.as_bytes()).unwrap();
        assert!(w.is_empty());
        assert_eq!(ds[0].persons[0].mask.as_ref().unwrap().counts, vec![0, 6, 6]);
        assert_eq!(ds[0].referrings[0].subset, Subset::Attribute);
    }

    #[test]
    fn dataset_round_trip() {
        let mut buf = Vec::new();
        write_dataset(&[image(), image()], &mut buf).unwrap();
        let (back, warnings) = read_dataset(&buf[..]).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(back, vec![image(), image()]);
    }

    #[test]
    fn dataset_clamps_with_warning() {
        let line = r#"{"image_id":"a","width":4,"height":3,"persons":[{"box":[-0.5,0,4.2,3]}],"referrings":[]}"#;
        let (ds, w) = read_dataset(format!("\n{line}\n").as_bytes()).unwrap();
        assert_eq!(ds[0].persons[0].bbox, BBox::new(0.0, 0.0, 4.0, 3.0).unwrap());
        assert_eq!(
            w,
            vec![ClampWarning {
                line: 2,
                image_id: "a".into(),
                boxes_clamped: 1
            }]
        );
        let loaded = load_dataset(format!("\n{line}\n").as_bytes()).unwrap();
        assert_eq!(loaded.line_of("a"), Some(2));
        assert_eq!(loaded.line_of("b"), None);
    }

    #[test]
    fn dataset_schema_error_has_line() {
        let content = format!("{}\n{{\"image_id\":\"b\"}}\n", serde_json::to_string(&image()).unwrap());
        let err = read_dataset(content.as_bytes()).unwrap_err();
        assert_eq!(err.code(), "SCHEMA_ERROR");
        assert_eq!(err.line(), Some(2));
        let bad_subset = r#"{"image_id":"a","width":4,"height":3,"persons":[],"referrings":[{"id":"r","text":"t","subset":"crowd","gt_indices":[]}]}"#;
        assert_eq!(read_dataset(bad_subset.as_bytes()).unwrap_err().line(), Some(1));
    }

    #[test]
    fn predictions_with_raw_records() {
        let ds = vec![image()];
        let content = "{\"referring_id\":\"r1\",\"raw\":\"<g>left one</g><o><obj1><obj1><obj0></o>\"}\n\
                       {\"referring_id\":\"r2\",\"raw\":\"<g>a unicorn</g><o></o>\"}\n";
        let preds = read_predictions(content.as_bytes(), &ds).unwrap();
        let boxes = ds[0].person_boxes();
        assert_eq!(preds[0], PredictionSet::boxes("r1", vec![boxes[1], boxes[0]]));
        assert!(preds[1].is_rejection());

        let bad = "{\"referring_id\":\"r1\",\"boxes\":[]}\n{\"referring_id\":\"r1\",\"raw\":\"<g>x</g><o><obj7></o>\"}";
        let err = read_predictions(bad.as_bytes(), &ds).unwrap_err();
        assert_eq!(err.line(), Some(2));
        assert!(err.to_string().contains("INDEX_OUT_OF_RANGE"));
        let unknown = "{\"referring_id\":\"zz\",\"raw\":\"<g>x</g><o></o>\"}";
        assert!(read_predictions(unknown.as_bytes(), &ds)
            .unwrap_err()
            .to_string()
            .contains("UNKNOWN_REFERRING_ID"));
    }

    #[test]
    fn predictions_round_trip() {
        let preds = vec![
            PredictionSet::boxes("r1", vec![BBox::new(0.1, 0.2, 0.3, 0.4).unwrap()]),
            PredictionSet::rejection("r2"),
        ];
        let mut buf = Vec::new();
        write_predictions(&preds, &mut buf).unwrap();
        assert_eq!(read_predictions(&buf[..], &[]).unwrap(), preds);
    }
}
