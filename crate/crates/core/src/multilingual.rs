//! Combining bilingual segmentations of the same utterances: boundary voting
//! under an agreement threshold, and per-sentence selection of the most
//! confident (lowest ANE) model.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Float;
use crate::segfile::{vote_label, SegRecord, SELECT_LABEL};
use crate::segmenter::{AneScore, Origin, Segmentation};

#[derive(Debug, Clone, PartialEq)]
pub struct VoteConfig<F> {
    /// Fraction of models that must agree on a boundary, in `[0, 1]`.
    pub threshold: F,
    pub languages: Vec<String>,
}

impl<F: Float> VoteConfig<F> {
    pub fn new(threshold: F, languages: Vec<String>) -> Result<Self> {
        let cfg = VoteConfig {
            threshold,
            languages,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold >= F::zero() && self.threshold <= F::one()) {
            return Err(Error::Config(format!(
                "vote threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if self.languages.len() < 2 {
            return Err(Error::Config("voting needs at least two languages".into()));
        }
        let distinct: BTreeSet<_> = self.languages.iter().collect();
        if distinct.len() != self.languages.len() {
            return Err(Error::Config("vote languages must be distinct".into()));
        }
        Ok(())
    }

    /// Minimum number of proposing models for a boundary to survive:
    /// `max(1, ⌈T·N⌉)`. `T = 0` therefore keeps the union and `T = 1` the
    /// intersection.
    pub fn required_votes(&self) -> usize {
        required_votes(self.threshold, self.languages.len())
    }
}

pub fn required_votes<F: Float>(threshold: F, models: usize) -> usize {
    let n = F::count(models);
    // Absorb representation error so that e.g. 0.6 * 5 counts as exactly 3.
    let slack = F::epsilon() * n * F::of(8.0);
    let need = (threshold * n - slack).ceil().to_usize().unwrap_or(0);
    need.max(1)
}

fn check_same_sequence<'a>(
    id: &str,
    mut segs: impl Iterator<Item = &'a Segmentation>,
) -> Result<()> {
    let Some(first) = segs.next() else {
        return Ok(());
    };
    for seg in segs {
        if seg.utterance_id != first.utterance_id {
            return Err(Error::mismatch(
                id,
                format!("mixed utterance ids `{}` and `{}`", first.utterance_id, seg.utterance_id),
            ));
        }
        if seg.phonemes != first.phonemes {
            return Err(Error::mismatch(id, "phoneme sequences differ across languages"));
        }
    }
    Ok(())
}

/// Keeps every boundary proposed by at least
/// [`VoteConfig::required_votes`] of the configured languages.
pub fn vote<F: Float>(
    per_language: &BTreeMap<String, Segmentation>,
    cfg: &VoteConfig<F>,
) -> Result<Segmentation> {
    cfg.validate()?;
    let id = per_language
        .values()
        .next()
        .map(|s| s.utterance_id.clone())
        .unwrap_or_default();
    let mut chosen = Vec::with_capacity(cfg.languages.len());
    for lang in &cfg.languages {
        let seg = per_language.get(lang).ok_or_else(|| {
            Error::mismatch(&id, format!("no segmentation for language `{lang}`"))
        })?;
        chosen.push(seg);
    }
    check_same_sequence(&id, chosen.iter().copied())?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for seg in &chosen {
        for &b in &seg.boundaries {
            *counts.entry(b).or_default() += 1;
        }
    }
    let need = cfg.required_votes();
    let boundaries = counts
        .into_iter()
        .filter(|&(_, c)| c >= need)
        .map(|(b, _)| b)
        .collect();
    Segmentation::from_boundaries(
        id,
        vote_label(cfg.threshold.to_f64_lossy()),
        Origin::Voted,
        chosen[0].phonemes.clone(),
        boundaries,
        None,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult<F> {
    pub utterance_id: String,
    pub chosen_language: String,
    pub segmentation: Segmentation,
    pub ane_values: BTreeMap<String, F>,
}

/// Picks the language whose alignment has the lowest ANE; ties go to the
/// earliest language in `priority`.
pub fn ane_select<F: Float>(
    per_language: &BTreeMap<String, (Segmentation, AneScore<F>)>,
    priority: &[String],
) -> Result<SelectionResult<F>> {
    let Some((_, (first, _))) = per_language.iter().next() else {
        return Err(Error::invalid("ANE selection needs at least one language"));
    };
    let id = first.utterance_id.clone();
    if let Some(missing) = per_language.keys().find(|l| !priority.contains(l)) {
        return Err(Error::Config(format!(
            "language `{missing}` is not in the priority order"
        )));
    }
    check_same_sequence(&id, per_language.values().map(|(s, _)| s))?;
    let mut best: Option<(&String, F)> = None;
    for lang in priority {
        if let Some((_, score)) = per_language.get(lang) {
            if best.is_none_or(|(_, v)| score.value < v) {
                best = Some((lang, score.value));
            }
        }
    }
    let (lang, _) = best.expect("non-empty input");
    Ok(SelectionResult {
        utterance_id: id,
        chosen_language: lang.clone(),
        segmentation: per_language[lang].0.clone(),
        ane_values: per_language
            .iter()
            .map(|(l, (_, a))| (l.clone(), a.value))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CombineMode<F> {
    Vote(F),
    Select,
}

/// Combines whole-corpus runs utterance by utterance.
///
/// Only the languages listed in `priority` take part, which is how language
/// subsets are evaluated. Output follows the utterance order of the first
/// priority language. Voted records carry no ANE; selected records carry the
/// chosen model's ANE and words.
pub fn combine_corpus<F: Float>(
    per_language_runs: &BTreeMap<String, Vec<SegRecord<F>>>,
    mode: CombineMode<F>,
    priority: &[String],
) -> Result<Vec<SegRecord<F>>> {
    if priority.is_empty() {
        return Err(Error::Config("no languages to combine".into()));
    }
    let mut runs = Vec::with_capacity(priority.len());
    for lang in priority {
        let run = per_language_runs
            .get(lang)
            .ok_or_else(|| Error::UnknownLanguage(lang.clone()))?;
        let mut index = HashMap::with_capacity(run.len());
        for rec in run {
            if index.insert(rec.segmentation.utterance_id.as_str(), rec).is_some() {
                return Err(Error::DuplicateRun(rec.segmentation.utterance_id.clone()));
            }
        }
        runs.push((lang, run, index));
    }
    let mut missing = BTreeSet::new();
    for (_, run, _) in &runs {
        for rec in run.iter() {
            let id = rec.segmentation.utterance_id.as_str();
            if runs.iter().any(|(_, _, idx)| !idx.contains_key(id)) {
                missing.insert(id.to_string());
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage(missing.into_iter().collect()));
    }
    let order: Vec<&str> = runs[0]
        .1
        .iter()
        .map(|r| r.segmentation.utterance_id.as_str())
        .collect();
    order
        .par_iter()
        .map(|id| match mode {
            CombineMode::Vote(threshold) => {
                let cfg = VoteConfig::new(threshold, priority.to_vec())?;
                let per: BTreeMap<String, Segmentation> = runs
                    .iter()
                    .map(|(l, _, idx)| ((*l).clone(), idx[id].segmentation.clone()))
                    .collect();
                Ok(SegRecord::new(vote(&per, &cfg)?, None))
            }
            CombineMode::Select => {
                let mut per = BTreeMap::new();
                for (l, _, idx) in &runs {
                    let rec = idx[id];
                    let score = rec.ane_score().ok_or_else(|| {
                        Error::invalid(format!(
                            "utterance `{id}` has no ANE value for language `{l}`"
                        ))
                    })?;
                    per.insert((*l).clone(), (rec.segmentation.clone(), score));
                }
                let sel = ane_select(&per, priority)?;
                let ane = sel.ane_values[&sel.chosen_language];
                let mut seg = sel.segmentation;
                seg.language = SELECT_LABEL.to_string();
                seg.origin = Origin::Selected {
                    from: sel.chosen_language,
                };
                Ok(SegRecord::new(seg, Some(ane)))
            }
        })
        .collect()
}
