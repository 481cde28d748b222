//! IBM Model 1 lexical translation trained by EM, used to manufacture
//! soft-alignment matrices between translation words (source) and phonemes
//! (target).
//!
//! Training is deterministic. Sentences are put in a canonical order before
//! the first E-step and expected counts are reduced chunk by chunk in that
//! order, so the learned table does not depend on corpus order or on the
//! number of worker threads.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::corpus::{Corpus, Utterance};
use crate::error::{Error, Result};
use crate::matrix::{AlignmentMatrix, NULL_TOKEN};
use crate::num::{sum_tolerance, Float};

/// Sentences per E-step work unit. Fixed so reductions never depend on the
/// thread count.
const CHUNK: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignerConfig {
    pub iterations: usize,
    /// Stop once the per-token log-likelihood improves by less than this.
    pub convergence_epsilon: f64,
    pub prob_floor: f64,
    pub use_null: bool,
    /// Not used by EM.
    pub seed: u64,
}

impl Default for AlignerConfig {
    fn default() -> Self {
        AlignerConfig {
            iterations: 30,
            convergence_epsilon: 1e-6,
            prob_floor: 1e-12,
            use_null: true,
            seed: 0,
        }
    }
}

impl AlignerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !(self.prob_floor > 0.0 && self.prob_floor < 1.0) {
            return Err(Error::Config("prob_floor must lie in (0, 1)".into()));
        }
        if self.convergence_epsilon.is_nan() || self.convergence_epsilon < 0.0 {
            return Err(Error::Config("convergence_epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

/// Lexical translation probabilities `t(phoneme | source word)`.
///
/// Stored densely: one distribution over the whole target vocabulary per
/// source word. Source index 0 is always [`NULL_TOKEN`].
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable<F> {
    source_vocab: Vec<String>,
    target_vocab: Vec<String>,
    source_index: HashMap<String, usize>,
    target_index: HashMap<String, usize>,
    probs: Vec<F>,
    prob_floor: F,
}

impl<F: Float> TranslationTable<F> {
    fn width(&self) -> usize {
        self.target_vocab.len()
    }

    /// Source vocabulary, NULL first.
    pub fn source_vocab(&self) -> &[String] {
        &self.source_vocab
    }

    pub fn target_vocab(&self) -> &[String] {
        &self.target_vocab
    }

    pub fn prob_floor(&self) -> F {
        self.prob_floor
    }

    /// `t(target | source)`; pairs outside the vocabulary get the floor.
    pub fn prob(&self, source: &str, target: &str) -> F {
        match (self.source_index.get(source), self.target_index.get(target)) {
            (Some(&s), Some(&t)) => self.probs[s * self.width() + t],
            _ => self.prob_floor,
        }
    }

    /// Full distribution over the target vocabulary for one source word.
    pub fn distribution(&self, source: &str) -> Option<&[F]> {
        let s = *self.source_index.get(source)?;
        Some(&self.probs[s * self.width()..(s + 1) * self.width()])
    }

    fn row_mut(&mut self, s: usize) -> &mut [F] {
        let w = self.width();
        &mut self.probs[s * w..(s + 1) * w]
    }

    fn floor_and_normalize(&mut self) {
        let floor = self.prob_floor;
        for s in 0..self.source_vocab.len() {
            let row = self.row_mut(s);
            row.iter_mut().for_each(|p| *p = p.max(floor));
            let sum: F = row.iter().copied().sum();
            row.iter_mut().for_each(|p| *p = *p / sum);
        }
    }

    /// Checks that every distribution is proper within `1e-9`.
    pub fn check_normalized(&self) -> Result<()> {
        let tol = sum_tolerance::<F>(1e-9, self.width());
        for (s, word) in self.source_vocab.iter().enumerate() {
            let row = &self.probs[s * self.width()..(s + 1) * self.width()];
            let sum: F = row.iter().copied().sum();
            if (sum - F::one()).abs() > tol || row.iter().any(|p| *p < F::zero() || *p > F::one()) {
                return Err(Error::invalid(format!(
                    "distribution for `{word}` is not normalized (sum {sum})"
                )));
            }
        }
        Ok(())
    }
}

/// One training run: final table plus the log-likelihood after
/// initialization and after every EM round.
#[derive(Debug, Clone)]
pub struct Training<F> {
    pub table: TranslationTable<F>,
    pub log_likelihoods: Vec<F>,
    pub converged: bool,
}

impl<F> Training<F> {
    /// Number of EM rounds performed.
    pub fn rounds(&self) -> usize {
        self.log_likelihoods.len().saturating_sub(1)
    }
}

/// Sentence pairs as vocabulary indices, source side prefixed with NULL
/// when enabled.
struct Bitext {
    pairs: Vec<(Vec<usize>, Vec<usize>)>,
    target_tokens: usize,
}

fn source_side(utt: &Utterance, language: &str, use_null: bool) -> Result<Vec<String>> {
    let tokens = utt.tokens(language)?;
    if tokens.is_empty() && !use_null {
        return Err(Error::EmptySource(utt.id.clone()));
    }
    let mut src = Vec::with_capacity(tokens.len() + 1);
    if use_null {
        src.push(NULL_TOKEN.to_string());
    }
    src.extend(tokens.iter().cloned());
    Ok(src)
}

fn build<F: Float>(
    corpus: &Corpus,
    language: &str,
    config: &AlignerConfig,
) -> Result<(TranslationTable<F>, Bitext)> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !corpus.has_language(language) {
        return Err(Error::UnknownLanguage(language.to_string()));
    }
    let mut sources = Vec::with_capacity(corpus.len());
    let mut src_words = BTreeSet::new();
    let mut tgt_words = BTreeSet::new();
    for utt in &corpus.utterances {
        let src = source_side(utt, language, config.use_null)?;
        src_words.extend(src.iter().filter(|w| *w != NULL_TOKEN).cloned());
        tgt_words.extend(utt.phonemes.iter().cloned());
        sources.push(src);
    }
    // NULL always owns index 0, trained or not.
    let source_vocab: Vec<String> = std::iter::once(NULL_TOKEN.to_string())
        .chain(src_words)
        .collect();
    let target_vocab: Vec<String> = tgt_words.into_iter().collect();
    let source_index: HashMap<String, usize> =
        source_vocab.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let target_index: HashMap<String, usize> =
        target_vocab.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();

    let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = corpus
        .utterances
        .iter()
        .zip(sources)
        .map(|(utt, src)| {
            (
                src.iter().map(|w| source_index[w]).collect(),
                utt.phonemes.iter().map(|p| target_index[p]).collect(),
            )
        })
        .collect();
    pairs.sort_unstable();
    let target_tokens = pairs.iter().map(|(_, t)| t.len()).sum();

    // Uniform over the targets each source word co-occurs with.
    let width = target_vocab.len();
    let mut cooc = vec![false; source_vocab.len() * width];
    for (src, tgt) in &pairs {
        for &s in src {
            for &t in tgt {
                cooc[s * width + t] = true;
            }
        }
    }
    let mut probs = vec![F::zero(); cooc.len()];
    for (row, flags) in probs.chunks_mut(width).zip(cooc.chunks(width)) {
        let n = flags.iter().filter(|&&c| c).count();
        if n == 0 {
            row.iter_mut().for_each(|p| *p = F::one() / F::count(width));
        } else {
            let u = F::one() / F::count(n);
            for (p, &c) in row.iter_mut().zip(flags) {
                if c {
                    *p = u;
                }
            }
        }
    }
    let mut table = TranslationTable {
        source_vocab,
        target_vocab,
        source_index,
        target_index,
        probs,
        prob_floor: F::of(config.prob_floor),
    };
    table.floor_and_normalize();
    Ok((
        table,
        Bitext {
            pairs,
            target_tokens,
        },
    ))
}

/// Log-likelihood of one indexed pair under `table`.
fn pair_log_likelihood<F: Float>(table: &TranslationTable<F>, src: &[usize], tgt: &[usize]) -> F {
    let w = table.width();
    let ln_s = F::count(src.len()).ln();
    tgt.iter()
        .map(|&t| {
            let total: F = src.iter().map(|&s| table.probs[s * w + t]).sum();
            total.ln() - ln_s
        })
        .sum()
}

fn bitext_log_likelihood<F: Float>(table: &TranslationTable<F>, bitext: &Bitext) -> F {
    let partial: Vec<F> = bitext
        .pairs
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|(s, t)| pair_log_likelihood(table, s, t))
                .sum()
        })
        .collect();
    partial.into_iter().sum()
}

/// One E-step followed by one M-step.
fn em_round<F: Float>(table: &TranslationTable<F>, bitext: &Bitext) -> TranslationTable<F> {
    let w = table.width();
    let partial: Vec<HashMap<usize, F>> = bitext
        .pairs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut counts: HashMap<usize, F> = HashMap::new();
            for (src, tgt) in chunk {
                for &t in tgt {
                    let total: F = src.iter().map(|&s| table.probs[s * w + t]).sum();
                    for &s in src {
                        let post = table.probs[s * w + t] / total;
                        *counts.entry(s * w + t).or_insert_with(F::zero) += post;
                    }
                }
            }
            counts
        })
        .collect();
    let mut counts = vec![F::zero(); table.probs.len()];
    for chunk in partial {
        for (cell, c) in chunk {
            counts[cell] += c;
        }
    }
    let mut next = table.clone();
    for (s, row) in counts.chunks(w).enumerate() {
        let total: F = row.iter().copied().sum();
        if total > F::zero() {
            for (p, c) in next.row_mut(s).iter_mut().zip(row) {
                *p = *c / total;
            }
        }
    }
    next.floor_and_normalize();
    next
}

/// Trains IBM Model 1 for `language`, returning the log-likelihood trace.
pub fn train_ibm1_traced<F: Float>(
    corpus: &Corpus,
    language: &str,
    config: &AlignerConfig,
) -> Result<Training<F>> {
    let (mut table, bitext) = build::<F>(corpus, language, config)?;
    let tokens = F::count(bitext.target_tokens.max(1));
    let eps = F::of(config.convergence_epsilon);
    let mut lls = vec![bitext_log_likelihood(&table, &bitext)];
    let mut converged = false;
    for _ in 0..config.iterations {
        table = em_round(&table, &bitext);
        let ll = bitext_log_likelihood(&table, &bitext);
        let prev = *lls.last().expect("non-empty trace");
        lls.push(ll);
        if (ll - prev) / tokens < eps {
            converged = true;
            break;
        }
    }
    Ok(Training {
        table,
        log_likelihoods: lls,
        converged,
    })
}

pub fn train_ibm1<F: Float>(
    corpus: &Corpus,
    language: &str,
    config: &AlignerConfig,
) -> Result<TranslationTable<F>> {
    train_ibm1_traced(corpus, language, config).map(|t| t.table)
}

/// Natural-log corpus likelihood: for each sentence,
/// `log[(1 / S^L) Π_t Σ_s t(f_t | e_s)]`, with `S` counting NULL when enabled.
pub fn log_likelihood<F: Float>(
    table: &TranslationTable<F>,
    corpus: &Corpus,
    language: &str,
    config: &AlignerConfig,
) -> Result<F> {
    let mut total = F::zero();
    for utt in &corpus.utterances {
        let src = source_side(utt, language, config.use_null)?;
        let ln_s = F::count(src.len()).ln();
        for f in &utt.phonemes {
            let sum: F = src.iter().map(|e| table.prob(e, f)).sum();
            total += sum.ln() - ln_s;
        }
    }
    Ok(total)
}

/// IBM-1 alignment posterior for one utterance: row `t` is
/// `t(f_t | e_s) / Σ_s' t(f_t | e_s')`.
pub fn posterior_matrix<F: Float>(
    table: &TranslationTable<F>,
    utterance: &Utterance,
    language: &str,
    config: &AlignerConfig,
) -> Result<AlignmentMatrix<F>> {
    let src = source_side(utterance, language, config.use_null)?;
    let rows = utterance
        .phonemes
        .iter()
        .map(|f| src.iter().map(|e| table.prob(e, f)).collect())
        .collect();
    AlignmentMatrix::from_weights(
        utterance.id.clone(),
        language,
        src,
        utterance.phonemes.clone(),
        rows,
    )
}

/// Posterior matrices for every utterance, in corpus order.
pub fn align_corpus<F: Float>(
    table: &TranslationTable<F>,
    corpus: &Corpus,
    language: &str,
    config: &AlignerConfig,
) -> Result<Vec<AlignmentMatrix<F>>> {
    corpus
        .utterances
        .par_iter()
        .map(|u| posterior_matrix(table, u, language, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    pub(crate) fn bitext(pairs: &[(&[&str], &[&str])]) -> Corpus {
        let utts = pairs
            .iter()
            .enumerate()
            .map(|(i, (src, tgt))| {
                Utterance::new(
                    format!("u{i}"),
                    s(tgt),
                    BTreeMap::from([("fr".to_string(), s(src))]),
                    None,
                )
                .unwrap()
            })
            .collect();
        Corpus::new(utts, s(&["fr"])).unwrap()
    }

    fn no_null() -> AlignerConfig {
        AlignerConfig {
            use_null: false,
            ..AlignerConfig::default()
        }
    }

    #[test]
    fn symmetric_pair_stays_uniform() {
        let c = bitext(&[(&["a"], &["x", "y"])]);
        for iters in 1..5 {
            let cfg = AlignerConfig {
                iterations: iters,
                convergence_epsilon: 0.0,
                ..no_null()
            };
            let t = train_ibm1::<f64>(&c, "fr", &cfg).unwrap();
            assert!((t.prob("a", "x") - 0.5).abs() < 1e-12);
            assert!((t.prob("a", "y") - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn crib_corpus_converges() {
        let c = bitext(&[(&["a"], &["x"]), (&["a", "b"], &["x", "y"])]);
        let cfg = AlignerConfig {
            iterations: 50,
            ..no_null()
        };
        let tr = train_ibm1_traced::<f64>(&c, "fr", &cfg).unwrap();
        assert!(tr.table.prob("a", "x") > 0.999);
        // t(x|b) decays like 1/k once t(x|a) saturates.
        assert!(tr.table.prob("b", "y") > 0.98);
        tr.table.check_normalized().unwrap();
        for w in tr.log_likelihoods.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }

        let long = AlignerConfig {
            iterations: 5000,
            convergence_epsilon: 1e-9,
            ..no_null()
        };
        let t = train_ibm1::<f64>(&c, "fr", &long).unwrap();
        assert!((t.prob("a", "x") - 1.0).abs() < 1e-3);
        assert!((t.prob("b", "y") - 1.0).abs() < 1e-3);
    }

    #[test]
    fn log_likelihood_analytic() {
        // t(x|NULL) = t(x|a) = 0.5 via a two-symbol target vocabulary.
        let c = bitext(&[(&["a"], &["x", "y"])]);
        let cfg = AlignerConfig {
            iterations: 1,
            ..AlignerConfig::default()
        };
        let t = train_ibm1::<f64>(&c, "fr", &cfg).unwrap();
        assert!((t.prob(NULL_TOKEN, "x") - 0.5).abs() < 1e-12);
        assert!((t.prob("a", "x") - 0.5).abs() < 1e-12);
        let one = bitext(&[(&["a"], &["x"])]);
        let ll = log_likelihood(&t, &one, "fr", &cfg).unwrap();
        assert!((ll - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let empty = Corpus::new(vec![], s(&["fr"])).unwrap();
        assert!(matches!(
            train_ibm1::<f64>(&empty, "fr", &AlignerConfig::default()),
            Err(Error::EmptyCorpus)
        ));
        let c = bitext(&[(&["a"], &["x"]), (&[], &["y"])]);
        assert!(train_ibm1::<f64>(&c, "fr", &AlignerConfig::default()).is_ok());
        match train_ibm1::<f64>(&c, "fr", &no_null()) {
            Err(Error::EmptySource(id)) => assert_eq!(id, "u1"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(train_ibm1::<f64>(&c, "de", &AlignerConfig::default()).is_err());
        let bad = AlignerConfig {
            iterations: 0,
            ..AlignerConfig::default()
        };
        assert!(train_ibm1::<f64>(&c, "fr", &bad).is_err());
    }

    #[test]
    fn posterior_rows() {
        let c = bitext(&[(&["a", "b"], &["x", "y"])]);
        let cfg = AlignerConfig {
            iterations: 1,
            ..no_null()
        };
        let t = train_ibm1::<f64>(&c, "fr", &cfg).unwrap();
        let m = posterior_matrix(&t, &c.utterances[0], "fr", &cfg).unwrap();
        for row in m.rows() {
            assert!((row[0] - 0.5).abs() < 1e-12 && (row[1] - 0.5).abs() < 1e-12);
        }
        assert!(!m.has_null());
        let with_null = posterior_matrix(&t, &c.utterances[0], "fr", &AlignerConfig::default()).unwrap();
        assert!(with_null.has_null());
        assert_eq!(with_null.n_source(), 3);
    }

    #[test]
    fn floor_dominated_row_is_one_hot() {
        // t(z|a) = 1 after training; `b` never co-occurs with `z`.
        let c = bitext(&[(&["a"], &["z"]), (&["b"], &["w"])]);
        let cfg = AlignerConfig {
            iterations: 1,
            ..no_null()
        };
        let t = train_ibm1::<f64>(&c, "fr", &cfg).unwrap();
        assert!((t.prob("b", "z") - cfg.prob_floor).abs() < 1e-15);
        let probe = bitext(&[(&["a", "b"], &["z"])]);
        let m = posterior_matrix(&t, &probe.utterances[0], "fr", &cfg).unwrap();
        assert!((m.row(0)[0] - 1.0).abs() < 1e-6 && m.row(0)[1] < 1e-6);
    }

    #[test]
    fn works_in_f32() {
        let c = bitext(&[(&["a"], &["x"]), (&["a", "b"], &["x", "y"])]);
        let t = train_ibm1::<f32>(&c, "fr", &no_null()).unwrap();
        assert!(t.prob("a", "x") > 0.99);
        t.check_normalized().unwrap();
    }
}
