//! Row-stochastic soft-alignment matrices and their JSON-Lines interchange
//! format.
//!
//! One JSON object per sentence pair:
//!
//! ```text
//! {"id": "...", "lang": "...", "source": [...], "target": [...], "rows": [[...], ...]}
//! ```
//!
//! `rows[t][s]` is the probability that target position `t` aligns to source
//! position `s`. Numbers are written in shortest round-trip form, so a
//! write/read cycle reproduces every `f64` exactly.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{sum_tolerance, Float};

/// Source token standing for "aligned to nothing". Always column 0 when present.
pub const NULL_TOKEN: &str = "<null>";

/// Row-sum tolerance enforced on constructed matrices.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Maximum relative deviation of an ingested row sum before the row is
/// rejected as corrupt. Rows inside the band are renormalized.
pub const INGEST_ROW_SUM_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMatrix<F> {
    utterance_id: String,
    language: String,
    source_tokens: Vec<String>,
    target_phonemes: Vec<String>,
    cells: Vec<F>,
}

impl<F: Float> AlignmentMatrix<F> {
    /// Builds a matrix whose rows already sum to one within
    /// [`ROW_SUM_TOLERANCE`].
    pub fn new(
        utterance_id: impl Into<String>,
        language: impl Into<String>,
        source_tokens: Vec<String>,
        target_phonemes: Vec<String>,
        rows: Vec<Vec<F>>,
    ) -> Result<Self> {
        let m = Self::assemble(utterance_id.into(), language.into(), source_tokens, target_phonemes, rows)?;
        let tol = sum_tolerance::<F>(ROW_SUM_TOLERANCE, m.n_source());
        for (t, row) in m.rows().enumerate() {
            let sum: F = row.iter().copied().sum();
            if (sum - F::one()).abs() > tol {
                return Err(Error::matrix(
                    &m.utterance_id,
                    format!("row {t} sums to {sum}, expected 1"),
                ));
            }
        }
        Ok(m)
    }

    /// Builds a matrix from non-negative weights, dividing each row by its sum.
    pub fn from_weights(
        utterance_id: impl Into<String>,
        language: impl Into<String>,
        source_tokens: Vec<String>,
        target_phonemes: Vec<String>,
        rows: Vec<Vec<F>>,
    ) -> Result<Self> {
        let mut m = Self::assemble(utterance_id.into(), language.into(), source_tokens, target_phonemes, rows)?;
        m.normalize_rows(|t, sum| {
            if sum > F::zero() {
                Ok(())
            } else {
                Err(format!("row {t} has zero total weight"))
            }
        })?;
        Ok(m)
    }

    fn assemble(
        utterance_id: String,
        language: String,
        source_tokens: Vec<String>,
        target_phonemes: Vec<String>,
        rows: Vec<Vec<F>>,
    ) -> Result<Self> {
        if source_tokens.is_empty() || target_phonemes.is_empty() {
            return Err(Error::matrix(&utterance_id, "empty source or target token list"));
        }
        if rows.len() != target_phonemes.len() {
            return Err(Error::matrix(
                &utterance_id,
                format!(
                    "{} rows for {} target phonemes",
                    rows.len(),
                    target_phonemes.len()
                ),
            ));
        }
        let width = source_tokens.len();
        let mut cells = Vec::with_capacity(width * rows.len());
        for (t, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::matrix(
                    &utterance_id,
                    format!("row {t} has {} cells for {width} source tokens", row.len()),
                ));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < F::zero()) {
                return Err(Error::matrix(
                    &utterance_id,
                    format!("row {t} contains invalid probability {v}"),
                ));
            }
            cells.extend(row);
        }
        Ok(AlignmentMatrix {
            utterance_id,
            language,
            source_tokens,
            target_phonemes,
            cells,
        })
    }

    fn normalize_rows(
        &mut self,
        check: impl Fn(usize, F) -> std::result::Result<(), String>,
    ) -> Result<()> {
        let width = self.n_source();
        for (t, row) in self.cells.chunks_mut(width).enumerate() {
            let sum: F = row.iter().copied().sum();
            check(t, sum).map_err(|m| Error::matrix(&self.utterance_id, m))?;
            // Rows already normalized up to rounding are kept bit-for-bit, so
            // a written matrix reads back unchanged.
            if (sum - F::one()).abs() > sum_tolerance::<F>(0.0, width) {
                row.iter_mut().for_each(|v| *v = *v / sum);
            }
        }
        Ok(())
    }

    pub fn utterance_id(&self) -> &str {
        &self.utterance_id
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn source_tokens(&self) -> &[String] {
        &self.source_tokens
    }

    pub fn target_phonemes(&self) -> &[String] {
        &self.target_phonemes
    }

    /// Number of source columns, NULL included.
    pub fn n_source(&self) -> usize {
        self.source_tokens.len()
    }

    pub fn n_target(&self) -> usize {
        self.target_phonemes.len()
    }

    /// True when column 0 is the NULL token.
    pub fn has_null(&self) -> bool {
        self.source_tokens.first().is_some_and(|s| s == NULL_TOKEN)
    }

    pub fn row(&self, t: usize) -> &[F] {
        let w = self.n_source();
        &self.cells[t * w..(t + 1) * w]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, F> {
        self.cells.chunks_exact(self.n_source())
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        self.rows().map(<[F]>::to_vec).collect()
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixRecord {
    id: String,
    lang: String,
    source: Vec<String>,
    target: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl<F: Float> From<&AlignmentMatrix<F>> for MatrixRecord {
    fn from(m: &AlignmentMatrix<F>) -> Self {
        MatrixRecord {
            id: m.utterance_id.clone(),
            lang: m.language.clone(),
            source: m.source_tokens.clone(),
            target: m.target_phonemes.clone(),
            rows: m
                .rows()
                .map(|r| r.iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
        }
    }
}

/// Serializes one matrix as a single interchange line (no trailing newline).
pub fn matrix_to_json<F: Float>(m: &AlignmentMatrix<F>) -> String {
    serde_json::to_string(&MatrixRecord::from(m)).expect("finite matrix serializes")
}

/// Parses one interchange line, applying the ingestion rules of
/// [`read_matrices`].
pub fn matrix_from_json<F: Float>(line: &str) -> Result<AlignmentMatrix<F>> {
    let rec: MatrixRecord =
        serde_json::from_str(line).map_err(|e| Error::invalid(format!("malformed matrix record: {e}")))?;
    let rows = rec
        .rows
        .into_iter()
        .map(|r| r.into_iter().map(F::of).collect())
        .collect();
    let mut m = AlignmentMatrix::assemble(rec.id, rec.lang, rec.source, rec.target, rows)?;
    let band = F::of(INGEST_ROW_SUM_BAND);
    m.normalize_rows(|t, sum| {
        if (sum - F::one()).abs() <= band {
            Ok(())
        } else {
            Err(format!("row {t} sums to {sum}, outside 1 ± {INGEST_ROW_SUM_BAND}"))
        }
    })?;
    Ok(m)
}

pub fn write_matrices<F: Float, W: Write>(matrices: &[AlignmentMatrix<F>], mut out: W) -> std::io::Result<()> {
    for m in matrices {
        out.write_all(matrix_to_json(m).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_matrices_file<F: Float>(matrices: &[AlignmentMatrix<F>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_matrices(matrices, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Reads interchange records. Rows whose sums lie within 5% of one are
/// renormalized exactly; anything further off is rejected.
pub fn read_matrices<F: Float, R: BufRead>(input: R) -> Result<Vec<AlignmentMatrix<F>>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<matrices>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let m = matrix_from_json(&line).map_err(|e| match e {
            Error::Invalid { message } => Error::parse(i + 1, "record", message),
            other => other,
        })?;
        out.push(m);
    }
    Ok(out)
}

pub fn read_matrices_file<F: Float>(path: impl AsRef<Path>) -> Result<Vec<AlignmentMatrix<F>>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrices(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn constructor_checks_shape_and_sums() {
        let ok = AlignmentMatrix::<f64>::new("u", "fr", s(&["a", "b"]), s(&["x"]), vec![vec![0.25, 0.75]]);
        assert!(ok.is_ok());
        let bad_sum = AlignmentMatrix::<f64>::new("u", "fr", s(&["a", "b"]), s(&["x"]), vec![vec![0.2, 0.7]]);
        assert!(bad_sum.is_err());
        let bad_dim =
            AlignmentMatrix::<f64>::new("u9", "fr", s(&["a", "b", "c"]), s(&["x", "y"]), vec![vec![0.5, 0.5]; 2]);
        let msg = bad_dim.unwrap_err().to_string();
        assert!(msg.contains("u9"), "{msg}");
        let neg = AlignmentMatrix::<f64>::new("u", "fr", s(&["a", "b"]), s(&["x"]), vec![vec![-0.5, 1.5]]);
        assert!(neg.is_err());
    }

    #[test]
    fn ingest_renormalizes_slightly_off_rows() {
        let line = r#"{"id":"u1","lang":"fr","source":["a","b"],"target":["x"],"rows":[[0.62,0.39]]}"#;
        let m: AlignmentMatrix<f64> = matrix_from_json(line).unwrap();
        assert!((m.row(0)[0] - 0.62 / 1.01).abs() < 1e-15);
        assert!((m.row(0)[1] - 0.39 / 1.01).abs() < 1e-15);
        assert!((m.row(0)[0] - 0.6139).abs() < 1e-4);
    }

    #[test]
    fn ingest_rejects_corrupt_rows_and_dims() {
        let off = r#"{"id":"u1","lang":"fr","source":["a","b"],"target":["x"],"rows":[[0.7,0.4]]}"#;
        assert!(matrix_from_json::<f64>(off).is_err());
        let dims = r#"{"id":"u7","lang":"fr","source":["a","b","c"],"target":["x","y"],"rows":[[0.5,0.5],[0.5,0.5]]}"#;
        let err = matrix_from_json::<f64>(dims).unwrap_err().to_string();
        assert!(err.contains("u7"), "{err}");
    }

    #[test]
    fn round_trips_exactly() {
        let ms: Vec<AlignmentMatrix<f64>> = (0..3)
            .map(|i| {
                let p = 1.0 / (3.0 + i as f64);
                AlignmentMatrix::new(
                    format!("u{i}"),
                    "en",
                    s(&[NULL_TOKEN, "w"]),
                    s(&["a", "b"]),
                    vec![vec![p, 1.0 - p], vec![1.0 - p, p]],
                )
                .unwrap()
            })
            .collect();
        let mut buf = Vec::new();
        write_matrices(&ms, &mut buf).unwrap();
        let back: Vec<AlignmentMatrix<f64>> = read_matrices(&buf[..]).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in ms.iter().zip(&back) {
            assert_eq!(a.utterance_id(), b.utterance_id());
            assert!(b.has_null());
            for (x, y) in a.rows().flatten().zip(b.rows().flatten()) {
                assert!((x - y).abs() <= 1e-9);
            }
        }
    }
}
