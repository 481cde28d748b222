//! End-to-end run: align every language, segment, combine by voting and by
//! ANE selection, score against gold and extract lexicons.
//!
//! This is composition only; every step is a public library operation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::aligner::{align_corpus, train_ibm1_traced, AlignerConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::eval::{
    boundary_prf, cross_model_overlap, extract_lexicon, lexicon_tsv, LexiconEntry, OverlapReport,
    PrfScore, SCORE_HEADER,
};
use crate::matrix::{write_matrices, AlignmentMatrix};
use crate::multilingual::{combine_corpus, CombineMode};
use crate::num::Float;
use crate::segfile::{render_records, vote_label, SegRecord, SELECT_LABEL};
use crate::segmenter::{segment_corpus, Segmentation};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Languages in priority order; empty means all corpus languages.
    pub languages: Vec<String>,
    pub aligner: AlignerConfig,
    pub vote_threshold: f64,
    /// Entries per language kept in lexicon reports and overlap analysis.
    pub lexicon_top: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            languages: Vec::new(),
            aligner: AlignerConfig::default(),
            vote_threshold: 0.5,
            lexicon_top: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanguageRun<F> {
    pub language: String,
    pub log_likelihoods: Vec<F>,
    pub matrices: Vec<AlignmentMatrix<F>>,
    pub records: Vec<SegRecord<F>>,
    pub lexicon: Vec<LexiconEntry<F>>,
}

/// A combined (voted or selected) segmentation of the corpus.
#[derive(Debug, Clone)]
pub struct CombinedRun<F> {
    pub label: String,
    pub records: Vec<SegRecord<F>>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput<F> {
    pub languages: Vec<String>,
    pub runs: Vec<LanguageRun<F>>,
    /// Voting at T = 0, the configured T, and T = 1 (deduplicated, ascending).
    pub voted: Vec<CombinedRun<F>>,
    pub selected: CombinedRun<F>,
    pub overlap: OverlapReport,
    /// `(metric, score)` rows; empty when the corpus lacks gold boundaries.
    pub scores: Vec<(String, PrfScore<F>)>,
    pub gold_types: BTreeSet<Vec<String>>,
    pub lexicon_top: usize,
}

impl<F: Float> PipelineOutput<F> {
    pub fn score(&self, metric: &str) -> Option<&PrfScore<F>> {
        self.scores.iter().find(|(m, _)| m == metric).map(|(_, s)| s)
    }

    pub fn score_report(&self) -> String {
        let mut out = String::from(SCORE_HEADER);
        out.push('\n');
        for (metric, s) in &self.scores {
            out.push_str(&s.tsv_row(metric));
            out.push('\n');
        }
        out
    }

    /// Writes matrices, segmentations, lexicons and the score report.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: &str| {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))
        };
        let put_records = |stem: &str, recs: &[SegRecord<F>]| {
            let (tsv, side) = render_records(recs);
            put(&format!("{stem}.tsv"), &tsv)?;
            put(&format!("{stem}.words.jsonl"), &side)
        };
        for run in &self.runs {
            let mut buf = Vec::new();
            write_matrices(&run.matrices, &mut buf).map_err(|e| Error::io(dir, e))?;
            put(
                &format!("matrices.{}.jsonl", run.language),
                &String::from_utf8(buf).expect("utf-8 json"),
            )?;
            put_records(&format!("segs.{}", run.language), &run.records)?;
            let gold = (!self.gold_types.is_empty()).then_some(&self.gold_types);
            let top: Vec<_> = run.lexicon.iter().take(self.lexicon_top).cloned().collect();
            put(&format!("lexicon.{}.tsv", run.language), &lexicon_tsv(&top, gold))?;
        }
        for v in &self.voted {
            put_records(&format!("segs.{}", v.label), &v.records)?;
        }
        put_records("segs.select", &self.selected.records)?;
        put("overlap.tsv", &overlap_tsv(&self.overlap))?;
        put("scores.tsv", &self.score_report())
    }
}

pub fn overlap_tsv(r: &OverlapReport) -> String {
    let mut out = String::from("bucket\ttype\tlanguages\n");
    for t in &r.all {
        out.push_str(&format!("all\t{t}\t*\n"));
    }
    for (t, langs) in &r.some {
        out.push_str(&format!("some\t{t}\t{}\n", langs.join(",")));
    }
    for (t, lang) in &r.one {
        out.push_str(&format!("one\t{t}\t{lang}\n"));
    }
    out
}

fn segs(records: &[SegRecord<impl Float>]) -> Vec<Segmentation> {
    records.iter().map(|r| r.segmentation.clone()).collect()
}

pub fn run_pipeline<F: Float>(corpus: &Corpus, cfg: &PipelineConfig) -> Result<PipelineOutput<F>> {
    let languages = if cfg.languages.is_empty() {
        corpus.languages.clone()
    } else {
        cfg.languages.clone()
    };
    if languages.is_empty() {
        return Err(Error::Config("no languages selected".into()));
    }
    for l in &languages {
        if !corpus.has_language(l) {
            return Err(Error::UnknownLanguage(l.clone()));
        }
    }

    let mut runs = Vec::with_capacity(languages.len());
    for lang in &languages {
        let training = train_ibm1_traced::<F>(corpus, lang, &cfg.aligner)?;
        let matrices = align_corpus(&training.table, corpus, lang, &cfg.aligner)?;
        let records: Vec<SegRecord<F>> = segment_corpus(&matrices)?
            .into_iter()
            .map(SegRecord::from)
            .collect();
        let lexicon = extract_lexicon(
            records
                .iter()
                .map(|r| (&r.segmentation, r.ane.unwrap_or_else(F::one))),
        )?;
        runs.push(LanguageRun {
            language: lang.clone(),
            log_likelihoods: training.log_likelihoods,
            matrices,
            records,
            lexicon,
        });
    }

    let per_language: BTreeMap<String, Vec<SegRecord<F>>> = runs
        .iter()
        .map(|r| (r.language.clone(), r.records.clone()))
        .collect();

    let mut voted = Vec::new();
    if languages.len() >= 2 {
        let mut thresholds = vec![0.0, cfg.vote_threshold, 1.0];
        thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite threshold"));
        thresholds.dedup();
        for t in thresholds {
            voted.push(CombinedRun {
                label: vote_label(t),
                records: combine_corpus(&per_language, CombineMode::Vote(F::of(t)), &languages)?,
            });
        }
    }
    let selected = CombinedRun {
        label: SELECT_LABEL.to_string(),
        records: combine_corpus(&per_language, CombineMode::Select, &languages)?,
    };

    let lexicons: BTreeMap<String, Vec<LexiconEntry<F>>> = runs
        .iter()
        .map(|r| (r.language.clone(), r.lexicon.clone()))
        .collect();
    let overlap = cross_model_overlap(&lexicons, cfg.lexicon_top);

    let has_gold = corpus.utterances.iter().all(|u| u.gold_boundaries.is_some());
    let mut scores = Vec::new();
    if has_gold {
        for run in &runs {
            scores.push((
                format!("boundary:{}", run.language),
                boundary_prf(&segs(&run.records), corpus)?,
            ));
        }
        for v in voted.iter().chain(std::iter::once(&selected)) {
            scores.push((format!("boundary:{}", v.label), boundary_prf(&segs(&v.records), corpus)?));
        }
    }

    Ok(PipelineOutput {
        languages,
        runs,
        voted,
        selected,
        overlap,
        scores,
        gold_types: corpus.gold_types(),
        lexicon_top: cfg.lexicon_top,
    })
}
