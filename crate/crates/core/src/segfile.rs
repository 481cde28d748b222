//! Segmentation files.
//!
//! The main file has one line per utterance, `id<TAB>label<TAB>seg`, where
//! `seg` is the phoneme sequence with `|` at boundaries and `label` is a
//! language code, `vote(T=…)` or `select`. A sidecar JSON-Lines file next to
//! it (`<stem>.words.jsonl`) carries the aligned word of every segment and
//! the ANE value.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{gold_boundaries_from_segmented, render_segmented};
use crate::error::{Error, Result};
use crate::num::Float;
use crate::segmenter::{AneScore, Origin, Segmentation};

pub const SELECT_LABEL: &str = "select";

pub fn vote_label(threshold: f64) -> String {
    format!("vote(T={threshold})")
}

/// A segmentation together with its sentence ANE when known.
#[derive(Debug, Clone, PartialEq)]
pub struct SegRecord<F> {
    pub segmentation: Segmentation,
    pub ane: Option<F>,
}

impl<F: Float> SegRecord<F> {
    pub fn new(segmentation: Segmentation, ane: Option<F>) -> Self {
        SegRecord { segmentation, ane }
    }

    pub fn ane_score(&self) -> Option<AneScore<F>> {
        self.ane.map(|value| AneScore {
            utterance_id: self.segmentation.utterance_id.clone(),
            language: self.segmentation.language.clone(),
            value,
        })
    }
}

impl<F: Float> From<(Segmentation, AneScore<F>)> for SegRecord<F> {
    fn from((segmentation, score): (Segmentation, AneScore<F>)) -> Self {
        SegRecord {
            segmentation,
            ane: Some(score.value),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    id: String,
    lang: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chosen: Option<String>,
    ane: Option<f64>,
    words: Vec<Option<String>>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("words.jsonl")
}

fn origin_for(label: &str, chosen: Option<String>) -> Origin {
    if label.starts_with("vote(") {
        Origin::Voted
    } else if let Some(from) = chosen {
        Origin::Selected { from }
    } else if label == SELECT_LABEL {
        Origin::Selected { from: String::new() }
    } else {
        Origin::Aligned
    }
}

pub fn format_tsv_line(seg: &Segmentation) -> String {
    format!(
        "{}\t{}\t{}",
        seg.utterance_id,
        seg.language,
        render_segmented(&seg.phonemes, &seg.boundaries)
    )
}

/// Renders both files' contents: `(tsv, sidecar)`.
pub fn render_records<F: Float>(records: &[SegRecord<F>]) -> (String, String) {
    let mut tsv = String::new();
    let mut side = String::new();
    for rec in records {
        let seg = &rec.segmentation;
        tsv.push_str(&format_tsv_line(seg));
        tsv.push('\n');
        let chosen = match &seg.origin {
            Origin::Selected { from } if !from.is_empty() => Some(from.clone()),
            _ => None,
        };
        let car = Sidecar {
            id: seg.utterance_id.clone(),
            lang: seg.language.clone(),
            chosen,
            ane: rec.ane.map(Float::to_f64_lossy),
            words: seg.words(),
        };
        side.push_str(&serde_json::to_string(&car).expect("sidecar serializes"));
        side.push('\n');
    }
    (tsv, side)
}

pub fn write_records<F: Float>(records: &[SegRecord<F>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (tsv, side) = render_records(records);
    write_file(path, &tsv)?;
    write_file(&sidecar_path(path), &side)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Parses a segmentation file plus optional sidecar contents.
pub fn parse_records<F: Float>(tsv: &str, sidecar: Option<&str>) -> Result<Vec<SegRecord<F>>> {
    let mut extra: HashMap<(String, String), Sidecar> = HashMap::new();
    if let Some(text) = sidecar {
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let car: Sidecar = serde_json::from_str(line)
                .map_err(|e| Error::parse(i + 1, "sidecar", e.to_string()))?;
            extra.insert((car.id.clone(), car.lang.clone()), car);
        }
    }
    let mut out = Vec::new();
    for (i, line) in tsv.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(line_no, "row", "expected id, label, segmentation"));
        }
        let (id, label) = (fields[0], fields[1]);
        let (phonemes, boundaries) = gold_boundaries_from_segmented(fields[2])
            .map_err(|e| Error::parse(line_no, "seg", e.to_string()))?;
        let car = extra.remove(&(id.to_string(), label.to_string()));
        let (words, ane, chosen) = match car {
            Some(c) => (Some(c.words), c.ane, c.chosen),
            None => (None, None, None),
        };
        let seg = Segmentation::from_boundaries(
            id,
            label,
            origin_for(label, chosen),
            phonemes,
            boundaries,
            words,
        )
        .map_err(|e| Error::parse(line_no, "seg", e.to_string()))?;
        out.push(SegRecord::new(seg, ane.map(F::of)));
    }
    Ok(out)
}

/// Reads a segmentation file, picking up its sidecar when present.
pub fn read_records<F: Float>(path: impl AsRef<Path>) -> Result<Vec<SegRecord<F>>> {
    let path = path.as_ref();
    let tsv = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let side_path = sidecar_path(path);
    let side = if side_path.exists() {
        Some(fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?)
    } else {
        None
    };
    parse_records(&tsv, side.as_deref())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    #[test]
    fn render_and_parse() {
        let seg = Segmentation::from_boundaries(
            "u1",
            "fr",
            Origin::Aligned,
            vec!["a".into(), "b".into(), "c".into()],
            BTreeSet::from([2]),
            Some(vec![Some("chat".into()), None]),
        )
        .unwrap();
        let recs = vec![SegRecord::new(seg.clone(), Some(0.25f64))];
        let (tsv, side) = render_records(&recs);
        assert_eq!(tsv, "u1\tfr\ta b | c\n");
        let back: Vec<SegRecord<f64>> = parse_records(&tsv, Some(&side)).unwrap();
        assert_eq!(back, recs);
        let bare: Vec<SegRecord<f64>> = parse_records(&tsv, None).unwrap();
        assert_eq!(bare[0].segmentation.boundaries, seg.boundaries);
        assert_eq!(bare[0].ane, None);
        assert!(parse_records::<f64>("u1\tfr\n", None).is_err());
    }

    #[test]
    fn labels_map_to_origin() {
        assert_eq!(origin_for(&vote_label(0.5), None), Origin::Voted);
        assert_eq!(vote_label(0.5), "vote(T=0.5)");
        assert_eq!(
            origin_for("select", Some("fr".into())),
            Origin::Selected { from: "fr".into() }
        );
        assert_eq!(origin_for("fr", None), Origin::Aligned);
    }
}
