//! Alignment-driven segmentation: neighbouring phonemes whose most probable
//! source word is the same are grouped into one discovered unit.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::AlignmentMatrix;
use crate::num::Float;

/// Where a segmentation came from. Only aligned and selected segmentations
/// carry per-segment source words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Aligned,
    Voted,
    Selected { from: String },
}

/// A half-open span `[start, end)` of phoneme positions (0-based) and the
/// source word it aligns to. `word == None` is the NULL marker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub word: Option<String>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub utterance_id: String,
    /// Language code, or a label such as `vote(T=0.5)` / `select`.
    pub language: String,
    pub origin: Origin,
    pub phonemes: Vec<String>,
    pub boundaries: BTreeSet<usize>,
    pub segments: Vec<Segment>,
}

impl Segmentation {
    /// Builds a segmentation from internal boundaries. `words`, when given,
    /// supplies one aligned word per segment.
    pub fn from_boundaries(
        utterance_id: impl Into<String>,
        language: impl Into<String>,
        origin: Origin,
        phonemes: Vec<String>,
        boundaries: BTreeSet<usize>,
        words: Option<Vec<Option<String>>>,
    ) -> Result<Self> {
        let utterance_id = utterance_id.into();
        let len = phonemes.len();
        if len == 0 {
            return Err(Error::mismatch(&utterance_id, "empty phoneme sequence"));
        }
        if let Some(b) = boundaries.iter().find(|&&b| b == 0 || b >= len) {
            return Err(Error::mismatch(
                &utterance_id,
                format!("boundary {b} outside 1..{len}"),
            ));
        }
        let n_segments = boundaries.len() + 1;
        let mut words = match words {
            Some(w) if w.len() != n_segments => {
                return Err(Error::mismatch(
                    &utterance_id,
                    format!("{} words for {n_segments} segments", w.len()),
                ))
            }
            Some(w) => w.into_iter(),
            None => vec![None; n_segments].into_iter(),
        };
        let mut segments = Vec::with_capacity(n_segments);
        let mut start = 0;
        for end in boundaries.iter().copied().chain(std::iter::once(len)) {
            segments.push(Segment {
                start,
                end,
                word: words.next().flatten(),
            });
            start = end;
        }
        Ok(Segmentation {
            utterance_id,
            language: language.into(),
            origin,
            phonemes,
            boundaries,
            segments,
        })
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn segment_phonemes(&self, seg: &Segment) -> &[String] {
        &self.phonemes[seg.start..seg.end]
    }

    /// Phoneme spans of every segment, in order.
    pub fn units(&self) -> impl Iterator<Item = &[String]> + '_ {
        self.segments.iter().map(|s| self.segment_phonemes(s))
    }

    pub fn words(&self) -> Vec<Option<String>> {
        self.segments.iter().map(|s| s.word.clone()).collect()
    }
}

/// Average normalized entropy of one alignment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AneScore<F> {
    pub utterance_id: String,
    pub language: String,
    pub value: F,
}

/// Index of the largest cell; ties go to the lowest index.
pub(crate) fn argmax<F: Float>(row: &[F]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// Resolved source column for every target position. NULL-aligned positions
/// inherit the previous column; a leading NULL run takes the first non-NULL
/// column of the sentence. `None` means every row prefers NULL.
fn resolved_columns<F: Float>(m: &AlignmentMatrix<F>) -> Option<Vec<usize>> {
    let mut cols: Vec<usize> = m.rows().map(argmax).collect();
    if m.has_null() {
        let mut prev = *cols.iter().find(|&&c| c != 0)?;
        for c in cols.iter_mut() {
            if *c == 0 {
                *c = prev;
            } else {
                prev = *c;
            }
        }
    }
    Some(cols)
}

pub fn segment_from_matrix<F: Float>(m: &AlignmentMatrix<F>) -> Segmentation {
    let phonemes = m.target_phonemes().to_vec();
    let build = |boundaries, words| {
        Segmentation::from_boundaries(
            m.utterance_id(),
            m.language(),
            Origin::Aligned,
            phonemes.clone(),
            boundaries,
            Some(words),
        )
        .expect("boundaries derived from a valid matrix")
    };
    let Some(cols) = resolved_columns(m) else {
        return build(BTreeSet::new(), vec![None]);
    };
    let boundaries: BTreeSet<usize> = cols
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(t, _)| t + 1)
        .collect();
    let mut words = vec![Some(m.source_tokens()[cols[0]].clone())];
    words.extend(
        boundaries
            .iter()
            .map(|&b| Some(m.source_tokens()[cols[b]].clone())),
    );
    build(boundaries, words)
}

/// Mean over rows of `H(row) / ln S`, in `[0, 1]`. A single-column matrix
/// scores 0.
pub fn ane<F: Float>(m: &AlignmentMatrix<F>) -> AneScore<F> {
    let s = m.n_source();
    let value = if s < 2 {
        F::zero()
    } else {
        let ceiling = F::count(s).ln();
        let total: F = m
            .rows()
            .map(|row| {
                let h: F = row
                    .iter()
                    .filter(|p| **p > F::zero())
                    .map(|&p| -p * p.ln())
                    .sum();
                h / ceiling
            })
            .sum();
        (total / F::count(m.n_target())).max(F::zero()).min(F::one())
    };
    AneScore {
        utterance_id: m.utterance_id().to_string(),
        language: m.language().to_string(),
        value,
    }
}

/// Segments and scores every matrix of one language run, preserving order.
pub fn segment_corpus<F: Float>(
    matrices: &[AlignmentMatrix<F>],
) -> Result<Vec<(Segmentation, AneScore<F>)>> {
    let mut seen = HashSet::new();
    for m in matrices {
        if !seen.insert((m.language(), m.utterance_id())) {
            return Err(Error::DuplicateRun(m.utterance_id().to_string()));
        }
    }
    Ok(matrices
        .par_iter()
        .map(|m| (segment_from_matrix(m), ane(m)))
        .collect())
}
