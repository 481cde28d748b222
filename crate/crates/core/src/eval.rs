//! Scoring against gold segmentations and lexicon extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::corpus::{split_at_boundaries, Corpus};
use crate::error::{Error, Result};
use crate::num::Float;
use crate::segmenter::{Origin, Segmentation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrfScore<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
    pub hits: usize,
    pub hyp_count: usize,
    pub gold_count: usize,
}

impl<F: Float> PrfScore<F> {
    /// Precision and recall from raw counts. An empty side scores 0 on its
    /// ratio, except that empty hypothesis against empty gold is a perfect
    /// match.
    pub fn from_counts(hits: usize, hyp_count: usize, gold_count: usize) -> Self {
        if hyp_count == 0 && gold_count == 0 {
            return PrfScore {
                precision: F::one(),
                recall: F::one(),
                f1: F::one(),
                hits,
                hyp_count,
                gold_count,
            };
        }
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                F::zero()
            } else {
                F::count(num) / F::count(den)
            }
        };
        let precision = ratio(hits, hyp_count);
        let recall = ratio(hits, gold_count);
        let f1 = if precision + recall > F::zero() {
            F::of(2.0) * precision * recall / (precision + recall)
        } else {
            F::zero()
        };
        PrfScore {
            precision,
            recall,
            f1,
            hits,
            hyp_count,
            gold_count,
        }
    }

    pub fn tsv_row(&self, metric: &str) -> String {
        format!(
            "{metric}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}",
            self.precision.to_f64_lossy(),
            self.recall.to_f64_lossy(),
            self.f1.to_f64_lossy(),
            self.hits,
            self.hyp_count,
            self.gold_count
        )
    }
}

pub const SCORE_HEADER: &str = "metric\tprecision\trecall\tf1\thits\thyp\tgold";

fn gold_for<'a>(seg: &Segmentation, gold: &'a Corpus, index: &HashMap<&str, usize>) -> Result<&'a BTreeSet<usize>> {
    let utt = index
        .get(seg.utterance_id.as_str())
        .map(|&i| &gold.utterances[i])
        .ok_or_else(|| Error::mismatch(&seg.utterance_id, "not in the gold corpus"))?;
    if utt.phonemes != seg.phonemes {
        return Err(Error::mismatch(
            &seg.utterance_id,
            "hypothesis phonemes differ from the gold corpus",
        ));
    }
    utt.gold_boundaries
        .as_ref()
        .ok_or_else(|| Error::MissingGold(seg.utterance_id.clone()))
}

/// Corpus-level (micro-averaged) precision/recall/F over internal boundaries.
pub fn boundary_prf<F: Float>(hyp: &[Segmentation], gold: &Corpus) -> Result<PrfScore<F>> {
    let index = gold.index();
    let (mut hits, mut n_hyp, mut n_gold) = (0, 0, 0);
    for seg in hyp {
        let g = gold_for(seg, gold, &index)?;
        hits += seg.boundaries.intersection(g).count();
        n_hyp += seg.boundaries.len();
        n_gold += g.len();
    }
    Ok(PrfScore::from_counts(hits, n_hyp, n_gold))
}

fn spans(len: usize, boundaries: &BTreeSet<usize>) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    let mut start = 0;
    for end in boundaries.iter().copied().chain(std::iter::once(len)) {
        out.insert((start, end));
        start = end;
    }
    out
}

/// Word-token scores: a hypothesized unit is a hit when both of its edges
/// match a gold word.
pub fn token_prf<F: Float>(hyp: &[Segmentation], gold: &Corpus) -> Result<PrfScore<F>> {
    let index = gold.index();
    let (mut hits, mut n_hyp, mut n_gold) = (0, 0, 0);
    for seg in hyp {
        let g = gold_for(seg, gold, &index)?;
        let h = spans(seg.len(), &seg.boundaries);
        let g = spans(seg.len(), g);
        hits += h.intersection(&g).count();
        n_hyp += h.len();
        n_gold += g.len();
    }
    Ok(PrfScore::from_counts(hits, n_hyp, n_gold))
}

/// Type scores: distinct hypothesized unit strings against distinct gold
/// words over the evaluated utterances.
pub fn type_prf<F: Float>(hyp: &[Segmentation], gold: &Corpus) -> Result<PrfScore<F>> {
    let index = gold.index();
    let mut hyp_types = BTreeSet::new();
    let mut gold_types = BTreeSet::new();
    for seg in hyp {
        let g = gold_for(seg, gold, &index)?;
        hyp_types.extend(seg.units().map(<[String]>::to_vec));
        gold_types.extend(split_at_boundaries(&seg.phonemes, g));
    }
    let hits = hyp_types.intersection(&gold_types).count();
    Ok(PrfScore::from_counts(hits, hyp_types.len(), gold_types.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry<F> {
    /// Concatenated phoneme symbols.
    pub discovered_type: String,
    pub phonemes: Vec<String>,
    pub translation_word: String,
    /// Lowest sentence ANE among the pair's occurrences.
    pub best_ane: F,
    pub frequency: usize,
}

/// Groups aligned segments into (type, translation) pairs ranked by
/// confidence: ascending best ANE, then descending frequency, then type.
///
/// NULL-aligned segments are skipped. Voted segmentations are rejected since
/// they carry no aligned words.
pub fn extract_lexicon<'a, F: Float>(
    runs: impl IntoIterator<Item = (&'a Segmentation, F)>,
) -> Result<Vec<LexiconEntry<F>>> {
    let mut groups: HashMap<(Vec<String>, String), (F, usize)> = HashMap::new();
    for (seg, ane) in runs {
        if seg.origin == Origin::Voted {
            return Err(Error::VotedLexicon);
        }
        for s in &seg.segments {
            let Some(word) = &s.word else { continue };
            let key = (seg.segment_phonemes(s).to_vec(), word.clone());
            let e = groups.entry(key).or_insert((ane, 0));
            e.0 = e.0.min(ane);
            e.1 += 1;
        }
    }
    let mut out: Vec<LexiconEntry<F>> = groups
        .into_iter()
        .map(|((phonemes, word), (best_ane, frequency))| LexiconEntry {
            discovered_type: phonemes.concat(),
            phonemes,
            translation_word: word,
            best_ane,
            frequency,
        })
        .collect();
    out.sort_by(|a, b| {
        a.best_ane
            .partial_cmp(&b.best_ane)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.frequency.cmp(&a.frequency))
            .then_with(|| a.discovered_type.cmp(&b.discovered_type))
            .then_with(|| a.phonemes.cmp(&b.phonemes))
            .then_with(|| a.translation_word.cmp(&b.translation_word))
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcatStatus {
    Exact,
    Concat2,
    None,
}

impl fmt::Display for ConcatStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConcatStatus::Exact => "exact",
            ConcatStatus::Concat2 => "concat2",
            ConcatStatus::None => "none",
        })
    }
}

/// Whether a discovered type is a gold type, or two gold types back to back.
/// Comparison is over phoneme symbols, not characters.
pub fn concat_check(discovered: &[String], gold_types: &BTreeSet<Vec<String>>) -> Result<ConcatStatus> {
    if discovered.is_empty() {
        return Err(Error::invalid("empty discovered type"));
    }
    if gold_types.contains(discovered) {
        return Ok(ConcatStatus::Exact);
    }
    let split = (1..discovered.len()).any(|k| {
        let (head, tail) = discovered.split_at(k);
        gold_types.contains(head) && gold_types.contains(tail)
    });
    Ok(if split {
        ConcatStatus::Concat2
    } else {
        ConcatStatus::None
    })
}

/// Gold lexicon file: one type per line, phoneme symbols separated by
/// spaces. Only the first tab-separated column is read.
pub fn parse_gold_lexicon(text: &str) -> BTreeSet<Vec<String>> {
    text.lines()
        .filter_map(|l| l.split('\t').next())
        .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect()
}

pub const LEXICON_HEADER: &str = "rank\ttype\ttranslation\tbest_ane\tfreq\tconcat_status";

pub fn lexicon_tsv<F: Float>(entries: &[LexiconEntry<F>], gold: Option<&BTreeSet<Vec<String>>>) -> String {
    let mut out = String::from(LEXICON_HEADER);
    out.push('\n');
    for (i, e) in entries.iter().enumerate() {
        let status = gold
            .and_then(|g| concat_check(&e.phonemes, g).ok())
            .map(|s| s.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\t{}\t{}\n",
            i + 1,
            e.discovered_type,
            e.translation_word,
            e.best_ane.to_f64_lossy(),
            e.frequency,
            status
        ));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverlapReport {
    /// Types in every language's top-k.
    pub all: Vec<String>,
    /// Types in more than one but not all top-k lists, with those languages.
    pub some: Vec<(String, Vec<String>)>,
    /// Types found in exactly one top-k list.
    pub one: Vec<(String, String)>,
}

pub fn cross_model_overlap<F: Float>(
    lexicons: &BTreeMap<String, Vec<LexiconEntry<F>>>,
    k: usize,
) -> OverlapReport {
    let mut seen: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (lang, entries) in lexicons {
        for e in entries.iter().take(k) {
            seen.entry(e.discovered_type.as_str())
                .or_default()
                .insert(lang.as_str());
        }
    }
    let mut report = OverlapReport::default();
    let n = lexicons.len();
    for (ty, langs) in seen {
        match langs.len() {
            c if c == n => report.all.push(ty.to_string()),
            1 => report
                .one
                .push((ty.to_string(), langs.first().copied().unwrap_or_default().to_string())),
            _ => report
                .some
                .push((ty.to_string(), langs.iter().map(|l| l.to_string()).collect())),
        }
    }
    report
}
